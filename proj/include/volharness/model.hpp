#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "volharness/calendar.hpp"
#include "volharness/estimators.hpp"

namespace volharness {

enum class SpecName {
    HarRv,
    HarSemiRv,
    HarSemiRvFull,
    HarRvLev,
    HarSemiRvLev,
    HarJv,
    HarSjv,
    HarBv,
};

/// CLI spelling: har-rv, har-semirv, ...
std::string_view cli_name(SpecName name);
/// Throws Error(Usage) listing the valid names.
SpecName parse_spec_name(std::string_view text);

enum class Source { Rv, RvPos, RvNeg, Bv, Sjv, SjvPos, SjvNeg };

enum class Transform {
    Lag1,                  // day t value
    WeeklyAvg,             // mean over lags 1..4
    MonthlyAvg,            // mean over lags 5..21
    NegReturnInteraction,  // day t value times 1[daily_return_t < 0]
};

/// Lag window a transform reads from; the three windows are disjoint.
enum class Window { Daily, Weekly, Monthly };
Window window_of(Transform t);

struct Column {
    Source source;
    Transform transform;
    std::string label;
};

struct ModelSpec {
    SpecName name;
    std::vector<Column> columns;  // excludes the intercept

    /// "intercept" followed by the column labels.
    std::vector<std::string> labels() const;
};

const ModelSpec& spec(SpecName name);
const std::vector<ModelSpec>& list_specs();

constexpr std::size_t kWeeklyFirstLag = 1;
constexpr std::size_t kWeeklyLastLag = 4;
constexpr std::size_t kMonthlyFirstLag = 5;
constexpr std::size_t kMonthlyLastLag = 21;

enum class TargetConvention { Average, Single, Sum };
TargetConvention parse_target(std::string_view text);
const char* to_string(TargetConvention t);

/// Future realized variance over days t+1..t+h under the chosen convention.
/// Throws Error(InsufficientData) if t + h is past the end of the series.
double horizon_target(const MeasureSeries& series, std::size_t t, int h,
                      TargetConvention convention = TargetConvention::Average);

struct RowKey {
    std::string symbol;
    Date date;  // day t, the last day of information used by the regressors
};

struct RegressionSample {
    Eigen::VectorXd y;
    Eigen::MatrixXd X;  // first column is the intercept
    std::vector<std::string> labels;
    std::vector<RowKey> index;
    int horizon = 1;
    std::size_t dropped_nonfinite = 0;

    std::size_t rows() const { return static_cast<std::size_t>(X.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(X.cols()); }
};

/// Series length needed for at least one row at horizon h.
std::size_t required_length(int h);

RegressionSample build_design(const MeasureSeries& series, const ModelSpec& spec, int h,
                              TargetConvention convention = TargetConvention::Average);

/// Row-stacks samples that share labels and horizon.
RegressionSample stack_samples(const std::vector<RegressionSample>& samples);

}  // namespace volharness
