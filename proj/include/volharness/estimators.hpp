#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "volharness/calendar.hpp"
#include "volharness/marketdata.hpp"

namespace volharness {

/// One day's realized measures. All variance-type fields are in %^2.
struct DailyMeasures {
    Date date{};
    double rv = 0.0;
    double bv = 0.0;
    double rv_pos = 0.0;
    double rv_neg = 0.0;
    double sjv = 0.0;      // rv_pos - rv_neg
    double sjv_pos = 0.0;  // max(sjv, 0)
    double sjv_neg = 0.0;  // min(sjv, 0)
    double daily_return = 0.0;
    std::size_t n_obs = 0;
};

struct EstimatorOptions {
    int bv_skips = 4;
    /// Apply n/(n-q-1) to each skip-q bipower sum.
    bool bv_scaling = true;
};

/// Skip-q bipower variation of one day; nullopt when n < q + 2.
std::optional<double> bipower_skip(std::span<const double> returns, int skip, bool scaling = true);

/// Throws Error(Data) on an empty vector and Error(InsufficientData) when
/// fewer than two returns leave bipower variation undefined.
DailyMeasures daily_measures(std::span<const double> returns, const EstimatorOptions& options = {});

struct MeasureSeries {
    std::string symbol;
    AssetClass asset_class = AssetClass::Crypto;
    std::vector<DailyMeasures> days;  // strictly increasing dates
};

struct DayReturns {
    Date date;
    std::vector<double> returns;
};

struct BuiltSeries {
    MeasureSeries series;
    std::vector<DroppedDay> excluded;  // days whose bipower variation is undefined
};

BuiltSeries build_series(std::string symbol, AssetClass asset_class, std::vector<DayReturns> days,
                         const EstimatorOptions& options = {});
BuiltSeries build_series(const IntradayReturns& returns, const EstimatorOptions& options = {});

/// Checks date ordering and throws on duplicates.
void validate_series(const MeasureSeries& series);

/// Names accepted in stats/correlation requests.
const std::vector<std::string>& measure_names();
double measure_value(const DailyMeasures& m, std::string_view name);

enum class StdDenominator { Population, Sample };

struct StatsRow {
    std::string measure;
    std::size_t count = 0;
    double mean = 0.0;
    double std_dev = 0.0;
    double q05 = 0.0, q25 = 0.0, q50 = 0.0, q75 = 0.0, q95 = 0.0;
};

struct StatsTable {
    AssetClass asset_class = AssetClass::Crypto;
    StdDenominator denominator = StdDenominator::Population;
    std::vector<StatsRow> rows;
};

/// Linear interpolation between order statistics, position (n-1)p.
double quantile_sorted(std::span<const double> sorted, double p);

StatsTable descriptive_stats(const std::vector<MeasureSeries>& panel,
                             const std::vector<std::string>& measures,
                             StdDenominator denominator = StdDenominator::Population);

struct CorrMatrix {
    std::vector<std::string> labels;
    /// nullopt where a measure has zero variance.
    std::vector<std::vector<std::optional<double>>> values;
    std::size_t observations = 0;
};

CorrMatrix correlation_matrix(const std::vector<MeasureSeries>& panel,
                              const std::vector<std::string>& measures);

// symbol,date,n_obs,rv,bv,rv_pos,rv_neg,sjv,sjv_pos,sjv_neg,daily_return
void write_measures_csv(const std::filesystem::path& path, const std::vector<MeasureSeries>& panel);
std::vector<MeasureSeries> read_measures_csv(const std::filesystem::path& path,
                                             AssetClass asset_class = AssetClass::Crypto);

void write_stats_csv(const std::filesystem::path& path, const StatsTable& table);
void write_correlation_csv(const std::filesystem::path& path, const CorrMatrix& corr);

}  // namespace volharness
