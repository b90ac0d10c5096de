#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "volharness/estimators.hpp"
#include "volharness/model.hpp"
#include "volharness/regress.hpp"

namespace volharness {

enum class StudyMode { Panel, Individual };
const char* to_string(StudyMode m);
StudyMode parse_study_mode(std::string_view text);

/// Inclusive date range. An unbounded window applies no filter.
struct DateWindow {
    std::optional<Date> start;
    std::optional<Date> end;
    std::string label;
};

/// Full-year ranges are labelled "2020-2021"; others "2020-03-01_2021-06-30".
std::string window_label(Date start, Date end);
/// Parses "YYYY-MM-DD:YYYY-MM-DD".
DateWindow parse_window(std::string_view text);
DateWindow full_window();

struct StudyConfig {
    std::vector<SpecName> specs;
    std::vector<int> horizons{1, 5, 22, 66};
    std::vector<DateWindow> windows;  // empty: one unfiltered window
    StudyMode mode = StudyMode::Panel;
    FitOptions fit;
    TargetConvention target = TargetConvention::Average;
    bool fixed_effects = false;
    /// Individual fits need at least this many rows per coefficient.
    std::size_t min_rows_per_coef = 5;
};

void validate(const StudyConfig& config);
nlohmann::json config_to_json(const StudyConfig& config);

struct Exclusion {
    std::string symbol;
    std::string reason;
};

struct StudyEntry {
    SpecName spec = SpecName::HarRv;
    int horizon = 1;
    std::string window;
    std::optional<FitResult> panel;
    std::map<std::string, FitResult> individual;
    std::vector<Exclusion> excluded;
    std::size_t rows = 0;
    std::size_t entities = 0;
    std::optional<std::string> failure;
};

struct StudyResults {
    StudyMode mode = StudyMode::Panel;
    nlohmann::json config;
    std::vector<StudyEntry> entries;  // ordered by window, spec, horizon
    std::vector<std::string> window_labels;
};

/// Runs every (window, spec, horizon) combination in config.mode. Combos that
/// cannot be fitted become failure entries; if none succeeds the call throws
/// Error(EmptyOutput).
StudyResults run_study(const std::vector<MeasureSeries>& panel, const StudyConfig& config);

StudyResults fit_panel(const std::vector<MeasureSeries>& panel, StudyConfig config);
StudyResults fit_individual(const std::vector<MeasureSeries>& panel, StudyConfig config);
/// Requires at least one explicit window.
StudyResults window_study(const std::vector<MeasureSeries>& panel, StudyConfig config);

/// Keeps days within the window; series left empty are dropped.
std::vector<MeasureSeries> filter_window(const std::vector<MeasureSeries>& panel, const DateWindow& window);

nlohmann::json fit_to_json(const FitResult& fit);
FitResult fit_from_json(const nlohmann::json& j);

enum class TableFormat { Markdown, Csv, Json };
TableFormat parse_table_format(std::string_view text);

std::string render_coeff_table(const StudyResults& results, TableFormat format);

/// Named figure documents, e.g. {"windows_har-semirv_h1", {...}}.
std::vector<std::pair<std::string, nlohmann::json>> render_figure_data(const StudyResults& results);

/// results/<window>/<spec>/h<h>/{panel,individual}.json plus failures.json.
void write_study(const StudyResults& results, const std::filesystem::path& out_dir);
StudyResults read_study(const std::filesystem::path& out_dir);

}  // namespace volharness
