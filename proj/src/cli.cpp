#include "volharness/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "volharness/error.hpp"
#include "volharness/estimators.hpp"
#include "volharness/manifest.hpp"
#include "volharness/marketdata.hpp"
#include "volharness/parallel.hpp"
#include "volharness/simlab.hpp"
#include "volharness/study.hpp"

namespace volharness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<std::string> kReportMeasures{"rv", "bv", "rv_pos", "rv_neg", "sjv", "sjv_pos", "sjv_neg"};

json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::InputFormat, "cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::InputFormat, path.string() + ": " + e.what());
    }
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Data, "cannot write " + path.string());
    out << text;
}

fs::path sibling(const fs::path& file, const std::string& suffix) {
    return file.parent_path() / (file.stem().string() + suffix);
}

RunManifest make_manifest(std::string command, json options, const std::vector<fs::path>& inputs) {
    RunManifest m;
    m.command = std::move(command);
    m.options = std::move(options);
    for (const auto& p : inputs) m.inputs.push_back({p.generic_string(), sha256_file(p)});
    m.timestamp = manifest_timestamp();
    return m;
}

struct IngestArgs {
    std::string input, asset_class, out;
};

int cmd_ingest(const IngestArgs& a, std::ostream& out, std::ostream& err) {
    const AssetClass ac = parse_asset_class(a.asset_class);
    LoadedPrices loaded = load_price_panel_csv(a.input, ac);
    if (loaded.duplicate_count > 0) {
        err << "warning: " << loaded.duplicate_count << " duplicate timestamp(s) resolved by keeping the last row\n";
    }
    const fs::path dir = a.out;
    fs::create_directories(dir);
    write_price_csv(dir / "prices.csv", loaded.series);
    json symbols = json::object();
    for (const auto& s : loaded.series) {
        symbols[s.symbol] = {{"points", s.points.size()},
                             {"first", format_timestamp(s.points.front().timestamp)},
                             {"last", format_timestamp(s.points.back().timestamp)}};
    }
    std::ofstream(dir / "series.json") << json{{"asset_class", to_string(ac)},
                                                {"duplicates", loaded.duplicate_count},
                                                {"symbols", symbols}}
                                              .dump(2)
                                       << '\n';
    write_manifest(dir / "manifest.json",
                   make_manifest("ingest", {{"input", a.input}, {"asset_class", a.asset_class}, {"out", a.out}},
                                 {a.input}));
    out << "ingested " << loaded.series.size() << " symbol(s) into " << dir.string() << "\n";
    return 0;
}

struct EstimateArgs {
    std::string data, out, bv_scaling = "on", std_denominator = "population";
    int grid_minutes = 5;
    double min_coverage = 0.8;
    int bv_skips = 4;
};

int cmd_estimate(const EstimateArgs& a, std::ostream& out, std::ostream& err) {
    if (a.bv_scaling != "on" && a.bv_scaling != "off") throw Error(ErrorKind::Usage, "--bv-scaling must be on or off");
    if (a.std_denominator != "population" && a.std_denominator != "sample") {
        throw Error(ErrorKind::Usage, "--std must be population or sample");
    }
    const fs::path data = a.data;
    const json meta = read_json_file(data / "series.json");
    const AssetClass ac = parse_asset_class(meta.at("asset_class").get<std::string>());
    const LoadedPrices loaded = load_price_panel_csv(data / "prices.csv", ac);

    GridOptions grid{a.grid_minutes, a.min_coverage};
    EstimatorOptions est{a.bv_skips, a.bv_scaling == "on"};
    expected_returns(ac, grid.grid_minutes);  // validates the grid before fanning out
    if (!(grid.min_coverage > 0.0 && grid.min_coverage <= 1.0)) throw Error(ErrorKind::Usage, "--min-coverage must be in (0, 1]");
    if (est.bv_skips < 0) throw Error(ErrorKind::Usage, "--bv-skips must be >= 0");

    struct Outcome {
        std::optional<MeasureSeries> series;
        std::vector<DroppedDay> dropped;
        std::string failure;
    };
    std::vector<Outcome> outcomes(loaded.series.size());
    parallel_for(loaded.series.size(), [&](std::size_t i) {
        Outcome& o = outcomes[i];
        try {
            IntradayReturns r = to_intraday_returns(loaded.series[i], grid);
            o.dropped = r.dropped;
            BuiltSeries b = build_series(r, est);
            o.dropped.insert(o.dropped.end(), b.excluded.begin(), b.excluded.end());
            o.series = std::move(b.series);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::Usage) throw;
            o.failure = e.what();
        }
    });

    std::vector<MeasureSeries> panel;
    std::vector<DroppedDay> dropped;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        auto& o = outcomes[i];
        dropped.insert(dropped.end(), o.dropped.begin(), o.dropped.end());
        if (o.series) panel.push_back(std::move(*o.series));
        else err << "warning: " << loaded.series[i].symbol << " skipped: " << o.failure << "\n";
    }
    std::sort(dropped.begin(), dropped.end(), [](const DroppedDay& x, const DroppedDay& y) {
        return x.symbol != y.symbol ? x.symbol < y.symbol : x.date < y.date;
    });
    if (panel.empty()) throw Error(ErrorKind::EmptyOutput, "no symbol produced any valid day");

    const fs::path out_csv = a.out;
    if (out_csv.has_parent_path()) fs::create_directories(out_csv.parent_path());
    write_measures_csv(out_csv, panel);
    write_dropped_days_csv(sibling(out_csv, "_dropped_days.csv"), dropped);
    const auto denom = a.std_denominator == "population" ? StdDenominator::Population : StdDenominator::Sample;
    write_stats_csv(sibling(out_csv, "_descriptive.csv"), descriptive_stats(panel, kReportMeasures, denom));
    std::size_t pooled_days = 0;
    for (const auto& s : panel) pooled_days += s.days.size();
    if (pooled_days >= 2) {
        write_correlation_csv(sibling(out_csv, "_correlation.csv"), correlation_matrix(panel, kReportMeasures));
    }

    RunManifest m = make_manifest("estimate",
                                  {{"data", a.data},
                                   {"grid_minutes", a.grid_minutes},
                                   {"min_coverage", a.min_coverage},
                                   {"bv_skips", a.bv_skips},
                                   {"bv_scaling", a.bv_scaling},
                                   {"std", a.std_denominator},
                                   {"out", a.out}},
                                  {data / "prices.csv", data / "series.json"});
    m.options["asset_class"] = to_string(ac);
    write_manifest(fs::path(a.out + ".manifest.json"), m);
    out << "estimated " << pooled_days << " day(s) for " << panel.size() << " symbol(s); " << dropped.size()
        << " day(s) dropped\n";
    return 0;
}

struct FitArgs {
    std::string measures, mode = "panel", out, wls_weights = "fitted", target = "average";
    std::vector<std::string> specs;
    std::vector<int> horizons{1, 5, 22, 66};
    std::vector<std::string> windows;
    int nw_lag = -1;
    double weight_floor = 1e-8;
    bool fixed_effects = false;
};

int cmd_fit(const FitArgs& a, std::ostream& out, std::ostream& err) {
    StudyConfig config;
    for (const auto& s : a.specs) config.specs.push_back(parse_spec_name(s));
    config.horizons = a.horizons;
    for (const auto& w : a.windows) config.windows.push_back(parse_window(w));
    config.mode = parse_study_mode(a.mode);
    if (a.nw_lag >= 0) config.fit.nw_lag = a.nw_lag;
    else if (a.nw_lag != -1) throw Error(ErrorKind::Usage, "--nw-lag must be >= 0");
    config.fit.weights = parse_wls_weights(a.wls_weights);
    config.fit.weight_floor = a.weight_floor;
    config.target = parse_target(a.target);
    config.fixed_effects = a.fixed_effects;
    validate(config);

    std::vector<fs::path> inputs{a.measures};
    AssetClass ac = AssetClass::Crypto;
    const fs::path sidecar = a.measures + ".manifest.json";
    if (fs::exists(sidecar)) {
        const json m = read_json_file(sidecar);
        if (m.contains("options") && m["options"].contains("asset_class")) {
            ac = parse_asset_class(m["options"]["asset_class"].get<std::string>());
        }
        inputs.push_back(sidecar);
    }
    const auto panel = read_measures_csv(a.measures, ac);
    StudyResults results = run_study(panel, config);

    const fs::path dir = a.out;
    fs::create_directories(dir);
    write_study(results, dir);
    json options = config_to_json(config);
    options["measures"] = a.measures;
    options["out"] = a.out;
    write_manifest(dir / "manifest.json", make_manifest("fit", options, inputs));

    std::size_t failed = 0;
    for (const auto& e : results.entries) {
        if (e.failure) {
            ++failed;
            err << "warning: " << cli_name(e.spec) << " h" << e.horizon << " [" << e.window << "]: " << *e.failure << "\n";
        }
    }
    out << "fitted " << results.entries.size() - failed << " of " << results.entries.size() << " combination(s) into "
        << dir.string() << "\n";
    return 0;
}

struct ReportArgs {
    std::string results, format = "md";
};

int cmd_report(const ReportArgs& a, std::ostream& out, std::ostream&) {
    const TableFormat format = parse_table_format(a.format);
    const fs::path dir = a.results;
    const StudyResults results = read_study(dir);
    const std::string text = render_coeff_table(results, format);
    const char* ext = format == TableFormat::Markdown ? "md" : format == TableFormat::Csv ? "csv" : "json";
    write_text(dir / "tables" / (std::string("coefficients.") + ext), text);
    for (const auto& [name, doc] : render_figure_data(results)) {
        write_text(dir / "figures" / (name + ".json"), doc.dump(2) + "\n");
    }
    const RunManifest m = make_manifest("report", {{"results", a.results}, {"format", a.format}},
                                        {dir / "study.json"});
    write_manifest(dir / "tables" / "manifest.json", m);
    write_manifest(dir / "figures" / "manifest.json", m);
    out << text;
    return 0;
}

struct SimulateArgs {
    std::string config, out;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream&) {
    const json cfg = read_json_file(a.config);
    const SimParams params = sim_params_from_json(cfg);
    const long long entities = cfg.value("entities", 1LL);
    if (entities < 1) throw Error(ErrorKind::Usage, "entities must be >= 1");
    const auto paths = simulate_panel(params, static_cast<std::size_t>(entities));
    const fs::path dir = a.out;
    fs::create_directories(dir);
    std::vector<PriceSeries> series;
    for (const auto& p : paths) series.push_back(p.series);
    write_price_csv(dir / "prices.csv", series);
    write_truth_csv(dir / "truth.csv", paths);
    json options = sim_params_to_json(params);
    options["entities"] = entities;
    options["config"] = a.config;
    options["out"] = a.out;
    write_manifest(dir / "manifest.json", make_manifest("simulate", options, {a.config}));
    out << "simulated " << entities << " path(s) x " << params.days << " day(s) into " << dir.string() << "\n";
    return 0;
}

int cmd_specs(std::ostream& out) {
    for (const auto& s : list_specs()) {
        out << cli_name(s.name) << ':';
        for (const auto& l : s.labels()) out << ' ' << l;
        out << '\n';
    }
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Realized volatility measures and HAR-family regressions"};
    app.require_subcommand(1);

    IngestArgs ingest;
    auto* c_ingest = app.add_subcommand("ingest", "Validate and normalise a 5-minute price CSV");
    c_ingest->add_option("--input", ingest.input, "timestamp,symbol,price CSV")->required();
    c_ingest->add_option("--asset-class", ingest.asset_class, "crypto|equity")->required();
    c_ingest->add_option("--out", ingest.out, "Output directory")->required();

    EstimateArgs estimate;
    auto* c_est = app.add_subcommand("estimate", "Compute daily realized measures");
    c_est->add_option("--data", estimate.data, "Directory written by ingest")->required();
    c_est->add_option("--grid-minutes", estimate.grid_minutes, "Sampling grid")->capture_default_str();
    c_est->add_option("--min-coverage", estimate.min_coverage, "Minimum fraction of expected returns")
        ->capture_default_str();
    c_est->add_option("--bv-skips", estimate.bv_skips, "Highest bipower skip averaged")->capture_default_str();
    c_est->add_option("--bv-scaling", estimate.bv_scaling, "on|off small-sample skip scaling")->capture_default_str();
    c_est->add_option("--std", estimate.std_denominator, "population|sample")->capture_default_str();
    c_est->add_option("--out", estimate.out, "Measures CSV")->required();

    FitArgs fit;
    auto* c_fit = app.add_subcommand("fit", "Fit HAR-family specifications");
    c_fit->add_option("--measures", fit.measures, "Measures CSV from estimate")->required();
    c_fit->add_option("--spec", fit.specs, "Comma-separated spec names")->required()->delimiter(',');
    c_fit->add_option("--horizons", fit.horizons, "Comma-separated horizons")->delimiter(',')->capture_default_str();
    c_fit->add_option("--mode", fit.mode, "panel|individual")->capture_default_str();
    c_fit->add_option("--window", fit.windows, "YYYY-MM-DD:YYYY-MM-DD (repeatable)");
    c_fit->add_option("--nw-lag", fit.nw_lag, "Newey-West lag (default: rule of thumb)");
    c_fit->add_option("--wls-weights", fit.wls_weights, "fitted|abs-residual")->capture_default_str();
    c_fit->add_option("--weight-floor", fit.weight_floor, "Lower bound on the weight basis")->capture_default_str();
    c_fit->add_option("--target", fit.target, "single|average|sum")->capture_default_str();
    c_fit->add_flag("--fixed-effects", fit.fixed_effects, "Add entity dummies to pooled fits");
    c_fit->add_option("--out", fit.out, "Output directory")->required();

    ReportArgs report;
    auto* c_report = app.add_subcommand("report", "Render coefficient tables and figure data");
    c_report->add_option("--results", report.results, "Directory written by fit")->required();
    c_report->add_option("--format", report.format, "md|csv|json")->capture_default_str();

    SimulateArgs simulate;
    auto* c_sim = app.add_subcommand("simulate", "Simulate jump-diffusion price paths");
    c_sim->add_option("--config", simulate.config, "JSON parameter file")->required();
    c_sim->add_option("--out", simulate.out, "Output directory")->required();

    auto* c_specs = app.add_subcommand("specs", "List model specifications and their columns");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (c_ingest->parsed()) return cmd_ingest(ingest, out, err);
        if (c_est->parsed()) return cmd_estimate(estimate, out, err);
        if (c_fit->parsed()) return cmd_fit(fit, out, err);
        if (c_report->parsed()) return cmd_report(report, out, err);
        if (c_sim->parsed()) return cmd_simulate(simulate, out, err);
        if (c_specs->parsed()) return cmd_specs(out);
    } catch (const Error& e) {
        err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const nlohmann::json::exception& e) {
        err << "error (input format error): " << e.what() << "\n";
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error (data error): " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace volharness
