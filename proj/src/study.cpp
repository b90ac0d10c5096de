#include "volharness/study.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "volharness/error.hpp"
#include "volharness/numfmt.hpp"
#include "volharness/parallel.hpp"

namespace volharness {

using nlohmann::json;

namespace {

const std::set<int> kAllowedHorizons{1, 5, 22, 66};

json number(double v) {
    if (std::isfinite(v)) return v;
    return format_double(v);  // "inf", "-inf", "nan"
}

double read_number(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    throw Error(ErrorKind::InputFormat, "expected a number, got " + j.dump());
}

json vector_json(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(number(v(i)));
    return arr;
}

Eigen::VectorXd vector_from(const json& j) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = read_number(j[i]);
    return v;
}

struct Combo {
    std::size_t window;
    SpecName spec;
    int horizon;
};

// Entity dummies after the intercept; the first entity is the base level.
RegressionSample add_fixed_effects(const RegressionSample& s) {
    std::vector<std::string> symbols;
    for (const auto& key : s.index) {
        if (std::find(symbols.begin(), symbols.end(), key.symbol) == symbols.end()) symbols.push_back(key.symbol);
    }
    if (symbols.size() < 2) return s;
    const auto extra = static_cast<Eigen::Index>(symbols.size() - 1);
    RegressionSample out = s;
    out.X.resize(s.X.rows(), s.X.cols() + extra);
    out.X.col(0) = s.X.col(0);
    out.X.rightCols(s.X.cols() - 1) = s.X.rightCols(s.X.cols() - 1);
    out.X.middleCols(1, extra).setZero();
    for (Eigen::Index r = 0; r < s.X.rows(); ++r) {
        const auto it = std::find(symbols.begin(), symbols.end(), s.index[static_cast<std::size_t>(r)].symbol);
        const auto pos = it - symbols.begin();
        if (pos > 0) out.X(r, pos) = 1.0;
    }
    out.labels = {s.labels.front()};
    for (std::size_t i = 1; i < symbols.size(); ++i) out.labels.push_back("fe_" + symbols[i]);
    out.labels.insert(out.labels.end(), s.labels.begin() + 1, s.labels.end());
    return out;
}

std::string convergence_reason(const FitResult& f) {
    std::ostringstream os;
    os << "not_converged: rank " << f.rank << " of " << f.labels.size() << ", condition number "
       << format_double(f.condition_number);
    return os.str();
}

struct IndividualOutcome {
    std::optional<FitResult> fit;
    std::optional<std::string> reason;
    std::size_t rows = 0;
};

IndividualOutcome fit_one_entity(const MeasureSeries& series, const Combo& combo, const StudyConfig& config) {
    IndividualOutcome out;
    if (series.days.size() < required_length(combo.horizon)) {
        out.reason = "insufficient_rows: " + std::to_string(series.days.size()) + " days, need " +
                     std::to_string(required_length(combo.horizon));
        return out;
    }
    try {
        RegressionSample sample = build_design(series, spec(combo.spec), combo.horizon, config.target);
        out.rows = sample.rows();
        const std::size_t needed = config.min_rows_per_coef * sample.cols();
        if (sample.rows() < needed) {
            out.reason = "insufficient_rows: " + std::to_string(sample.rows()) + " rows, need " + std::to_string(needed);
            return out;
        }
        FitOptions options = config.fit;
        options.pvalues = PValueDist::StudentT;
        FitResult fit = wls_two_stage(sample, options);
        if (!fit.converged) {
            out.reason = convergence_reason(fit);
            return out;
        }
        out.fit = std::move(fit);
    } catch (const Error& e) {
        out.reason = std::string(to_string(e.kind())) + ": " + e.what();
    }
    return out;
}

StudyEntry fit_panel_combo(const std::vector<MeasureSeries>& panel, const Combo& combo, const StudyConfig& config,
                           const std::string& window_label) {
    StudyEntry entry;
    entry.spec = combo.spec;
    entry.horizon = combo.horizon;
    entry.window = window_label;
    std::vector<RegressionSample> samples;
    for (const auto& series : panel) {
        if (series.days.size() < required_length(combo.horizon)) {
            entry.excluded.push_back({series.symbol, "insufficient_rows: " + std::to_string(series.days.size()) +
                                                         " days, need " +
                                                         std::to_string(required_length(combo.horizon))});
            continue;
        }
        samples.push_back(build_design(series, spec(combo.spec), combo.horizon, config.target));
    }
    if (samples.empty()) {
        entry.failure = "no entity has enough data for horizon " + std::to_string(combo.horizon);
        return entry;
    }
    RegressionSample stacked = stack_samples(samples);
    if (config.fixed_effects) stacked = add_fixed_effects(stacked);
    entry.rows = stacked.rows();
    entry.entities = samples.size();
    try {
        FitOptions options = config.fit;
        options.pvalues = PValueDist::Normal;
        options.group_by_entity = true;
        entry.panel = wls_two_stage(stacked, options);
    } catch (const Error& e) {
        entry.failure = std::string(to_string(e.kind())) + ": " + e.what();
    }
    return entry;
}

}  // namespace

const char* to_string(StudyMode m) {
    return m == StudyMode::Panel ? "panel" : "individual";
}

StudyMode parse_study_mode(std::string_view text) {
    if (text == "panel") return StudyMode::Panel;
    if (text == "individual") return StudyMode::Individual;
    throw Error(ErrorKind::Usage, "unknown mode '" + std::string(text) + "' (valid: panel, individual)");
}

std::string window_label(Date start, Date end) {
    using namespace std::chrono;
    const year_month_day s{start}, e{end};
    if (s.month() == January && s.day() == day{1} && e.month() == December && e.day() == day{31}) {
        const int ys = static_cast<int>(s.year()), ye = static_cast<int>(e.year());
        return ys == ye ? std::to_string(ys) : std::to_string(ys) + "-" + std::to_string(ye);
    }
    return format_date(start) + "_" + format_date(end);
}

DateWindow parse_window(std::string_view text) {
    const auto colon = text.find(':');
    auto bad = [&] {
        return Error(ErrorKind::Usage, "window must be YYYY-MM-DD:YYYY-MM-DD, got '" + std::string(text) + "'");
    };
    if (colon == std::string_view::npos) throw bad();
    auto start = parse_date(text.substr(0, colon));
    auto end = parse_date(text.substr(colon + 1));
    if (!start || !end) throw bad();
    if (*start > *end) throw Error(ErrorKind::Usage, "window start after end: '" + std::string(text) + "'");
    return {start, end, window_label(*start, *end)};
}

DateWindow full_window() {
    return {std::nullopt, std::nullopt, "full"};
}

void validate(const StudyConfig& config) {
    if (config.specs.empty()) throw Error(ErrorKind::Usage, "no model specifications requested");
    if (config.horizons.empty()) throw Error(ErrorKind::Usage, "no horizons requested");
    for (int h : config.horizons) {
        if (!kAllowedHorizons.count(h)) {
            throw Error(ErrorKind::Usage, "horizon " + std::to_string(h) + " not in {1, 5, 22, 66}");
        }
    }
    std::set<std::string> labels;
    for (const auto& w : config.windows) {
        if (w.start && w.end && *w.start > *w.end) throw Error(ErrorKind::Usage, "degenerate window " + w.label);
        if (!labels.insert(w.label).second) throw Error(ErrorKind::Usage, "duplicate window " + w.label);
    }
    if (config.fit.nw_lag && *config.fit.nw_lag < 0) throw Error(ErrorKind::Usage, "nw lag must be >= 0");
}

json config_to_json(const StudyConfig& config) {
    json specs = json::array();
    for (auto s : config.specs) specs.push_back(std::string(cli_name(s)));
    json windows = json::array();
    for (const auto& w : config.windows) {
        windows.push_back({{"label", w.label},
                           {"start", w.start ? json(format_date(*w.start)) : json(nullptr)},
                           {"end", w.end ? json(format_date(*w.end)) : json(nullptr)}});
    }
    return {{"specs", specs},
            {"horizons", config.horizons},
            {"windows", windows},
            {"mode", to_string(config.mode)},
            {"nw_lag", config.fit.nw_lag ? json(*config.fit.nw_lag) : json("default")},
            {"wls_weights", to_string(config.fit.weights)},
            {"weight_floor", config.fit.weight_floor},
            {"target", to_string(config.target)},
            {"fixed_effects", config.fixed_effects},
            {"min_rows_per_coef", config.min_rows_per_coef},
            {"hac_blocking", "within-entity"}};
}

std::vector<MeasureSeries> filter_window(const std::vector<MeasureSeries>& panel, const DateWindow& window) {
    std::vector<MeasureSeries> out;
    for (const auto& s : panel) {
        MeasureSeries f{s.symbol, s.asset_class, {}};
        for (const auto& d : s.days) {
            if (window.start && d.date < *window.start) continue;
            if (window.end && d.date > *window.end) continue;
            f.days.push_back(d);
        }
        if (!f.days.empty()) out.push_back(std::move(f));
    }
    return out;
}

StudyResults run_study(const std::vector<MeasureSeries>& panel, const StudyConfig& config) {
    validate(config);
    if (panel.empty()) throw Error(ErrorKind::EmptyInput, "empty panel");
    for (const auto& s : panel) {
        if (s.asset_class != panel.front().asset_class) {
            throw Error(ErrorKind::Usage, "panel mixes asset classes; fit crypto and equity separately");
        }
    }

    StudyResults results;
    results.mode = config.mode;
    results.config = config_to_json(config);
    results.config["asset_class"] = to_string(panel.front().asset_class);

    const std::vector<DateWindow> windows = config.windows.empty() ? std::vector{full_window()} : config.windows;
    std::vector<std::vector<MeasureSeries>> filtered;
    for (const auto& w : windows) {
        filtered.push_back(filter_window(panel, w));
        results.window_labels.push_back(w.label);
    }

    std::vector<Combo> combos;
    for (std::size_t w = 0; w < windows.size(); ++w) {
        for (auto s : config.specs) {
            for (int h : config.horizons) combos.push_back({w, s, h});
        }
    }

    results.entries.resize(combos.size());
    if (config.mode == StudyMode::Panel) {
        parallel_for(combos.size(), [&](std::size_t i) {
            const Combo& c = combos[i];
            if (filtered[c.window].empty()) {
                StudyEntry& e = results.entries[i];
                e.spec = c.spec;
                e.horizon = c.horizon;
                e.window = windows[c.window].label;
                e.failure = "window contains no data";
                return;
            }
            results.entries[i] = fit_panel_combo(filtered[c.window], c, config, windows[c.window].label);
        });
    } else {
        // One task per (combo, entity); outcomes land in fixed slots.
        std::vector<std::pair<std::size_t, std::size_t>> tasks;
        for (std::size_t i = 0; i < combos.size(); ++i) {
            for (std::size_t e = 0; e < filtered[combos[i].window].size(); ++e) tasks.emplace_back(i, e);
        }
        std::vector<IndividualOutcome> outcomes(tasks.size());
        parallel_for(tasks.size(), [&](std::size_t t) {
            const auto [ci, ei] = tasks[t];
            outcomes[t] = fit_one_entity(filtered[combos[ci].window][ei], combos[ci], config);
        });
        for (std::size_t i = 0; i < combos.size(); ++i) {
            StudyEntry& e = results.entries[i];
            e.spec = combos[i].spec;
            e.horizon = combos[i].horizon;
            e.window = windows[combos[i].window].label;
        }
        for (std::size_t t = 0; t < tasks.size(); ++t) {
            const auto [ci, ei] = tasks[t];
            StudyEntry& e = results.entries[ci];
            const std::string& symbol = filtered[combos[ci].window][ei].symbol;
            if (outcomes[t].fit) {
                e.individual.emplace(symbol, std::move(*outcomes[t].fit));
                e.rows += outcomes[t].rows;
                ++e.entities;
            } else {
                e.excluded.push_back({symbol, *outcomes[t].reason});
            }
        }
        for (std::size_t i = 0; i < combos.size(); ++i) {
            StudyEntry& e = results.entries[i];
            if (filtered[combos[i].window].empty()) e.failure = "window contains no data";
            else if (e.individual.empty()) e.failure = "all entities excluded";
        }
    }

    const bool any_ok = std::any_of(results.entries.begin(), results.entries.end(),
                                    [](const StudyEntry& e) { return !e.failure; });
    if (!any_ok) {
        std::string reason = results.entries.empty() ? "nothing requested" : *results.entries.front().failure;
        throw Error(ErrorKind::EmptyOutput, "study produced no fits (first failure: " + reason + ")");
    }
    return results;
}

StudyResults fit_panel(const std::vector<MeasureSeries>& panel, StudyConfig config) {
    config.mode = StudyMode::Panel;
    return run_study(panel, config);
}

StudyResults fit_individual(const std::vector<MeasureSeries>& panel, StudyConfig config) {
    config.mode = StudyMode::Individual;
    return run_study(panel, config);
}

StudyResults window_study(const std::vector<MeasureSeries>& panel, StudyConfig config) {
    if (config.windows.empty()) throw Error(ErrorKind::Usage, "window study needs at least one window");
    return run_study(panel, config);
}

json fit_to_json(const FitResult& fit) {
    json cov = json::array();
    for (Eigen::Index r = 0; r < fit.covariance.rows(); ++r) {
        cov.push_back(vector_json(fit.covariance.row(r).transpose()));
    }
    json stars = json::array();
    for (Eigen::Index i = 0; i < fit.p_values.size(); ++i) stars.push_back(significance(fit.p_values(i)));
    json j{{"labels", fit.labels},
           {"coefficients", vector_json(fit.coefficients)},
           {"covariance", cov},
           {"std_errors", vector_json(fit.std_errors)},
           {"t_stats", vector_json(fit.t_stats)},
           {"p_values", vector_json(fit.p_values)},
           {"stars", stars},
           {"n_obs", fit.n_obs},
           {"nw_lag", fit.nw_lag},
           {"nw_lag_truncated", fit.nw_lag_truncated},
           {"estimator", to_string(fit.estimator)},
           {"pvalue_dist", to_string(fit.pvalue_dist)},
           {"converged", fit.converged},
           {"rank", fit.rank},
           {"condition_number", number(fit.condition_number)},
           {"stage1_condition_number",
            fit.stage1_condition_number ? number(*fit.stage1_condition_number) : json(nullptr)}};
    if (fit.weights_summary) {
        j["weights_summary"] = {{"min", number(fit.weights_summary->min)},
                                {"median", number(fit.weights_summary->median)},
                                {"max", number(fit.weights_summary->max)},
                                {"floored", fit.weights_summary->floored}};
    } else {
        j["weights_summary"] = nullptr;
    }
    return j;
}

FitResult fit_from_json(const json& j) {
    try {
        FitResult f;
        f.labels = j.at("labels").get<std::vector<std::string>>();
        f.coefficients = vector_from(j.at("coefficients"));
        const auto& cov = j.at("covariance");
        const auto k = static_cast<Eigen::Index>(cov.size());
        f.covariance.resize(k, k);
        for (Eigen::Index r = 0; r < k; ++r) f.covariance.row(r) = vector_from(cov[static_cast<std::size_t>(r)]);
        f.std_errors = vector_from(j.at("std_errors"));
        f.t_stats = vector_from(j.at("t_stats"));
        f.p_values = vector_from(j.at("p_values"));
        f.n_obs = j.at("n_obs").get<std::size_t>();
        f.nw_lag = j.at("nw_lag").get<int>();
        f.nw_lag_truncated = j.at("nw_lag_truncated").get<bool>();
        f.estimator = j.at("estimator").get<std::string>() == "OLS" ? Estimator::Ols : Estimator::Wls;
        f.pvalue_dist = j.at("pvalue_dist").get<std::string>() == "normal" ? PValueDist::Normal : PValueDist::StudentT;
        f.converged = j.at("converged").get<bool>();
        f.rank = j.at("rank").get<std::size_t>();
        f.condition_number = read_number(j.at("condition_number"));
        if (!j.at("stage1_condition_number").is_null()) {
            f.stage1_condition_number = read_number(j.at("stage1_condition_number"));
        }
        if (!j.at("weights_summary").is_null()) {
            const auto& w = j.at("weights_summary");
            f.weights_summary = WeightsSummary{read_number(w.at("min")), read_number(w.at("median")),
                                               read_number(w.at("max")), w.at("floored").get<std::size_t>()};
        }
        return f;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::InputFormat, std::string("malformed fit document: ") + e.what());
    }
}

TableFormat parse_table_format(std::string_view text) {
    if (text == "md") return TableFormat::Markdown;
    if (text == "csv") return TableFormat::Csv;
    if (text == "json") return TableFormat::Json;
    throw Error(ErrorKind::Usage, "unknown format '" + std::string(text) + "' (valid: md, csv, json)");
}

namespace {

struct FlatRow {
    std::string symbol;  // empty in panel mode
    std::string spec;
    int horizon;
    std::string window;
    std::string coef;
    double value, tstat, pvalue;
    std::size_t nobs;
};

std::vector<FlatRow> flatten(const StudyResults& results) {
    std::vector<FlatRow> rows;
    auto add = [&](const std::string& symbol, const StudyEntry& e, const FitResult& f) {
        for (std::size_t i = 0; i < f.labels.size(); ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            rows.push_back({symbol, std::string(cli_name(e.spec)), e.horizon, e.window, f.labels[i],
                            f.coefficients(ii), f.t_stats(ii), f.p_values(ii), f.n_obs});
        }
    };
    for (const auto& e : results.entries) {
        if (e.failure) continue;
        if (e.panel) add("", e, *e.panel);
        for (const auto& [sym, f] : e.individual) add(sym, e, f);
    }
    return rows;
}

std::string md_cell(const FitResult& f, std::size_t i) {
    const auto ii = static_cast<Eigen::Index>(i);
    return format_fixed(f.coefficients(ii), 4) + significance(f.p_values(ii));
}

std::string md_tcell(const FitResult& f, std::size_t i) {
    return "(" + format_fixed(f.t_stats(static_cast<Eigen::Index>(i)), 3) + ")";
}

void md_table(std::ostringstream& os, const std::vector<std::string>& columns,
              const std::vector<std::pair<std::string, const FitResult*>>& blocks) {
    os << "| |";
    for (const auto& c : columns) os << ' ' << c << " |";
    os << " nobs |\n|---|";
    for (std::size_t i = 0; i < columns.size(); ++i) os << "---|";
    os << "---|\n";
    for (const auto& [name, fit] : blocks) {
        os << "| " << name << " |";
        for (const auto& c : columns) {
            auto idx = fit->find(c);
            os << ' ' << (idx ? md_cell(*fit, *idx) : "-") << " |";
        }
        os << ' ' << fit->n_obs << " |\n| |";
        for (const auto& c : columns) {
            auto idx = fit->find(c);
            os << ' ' << (idx ? md_tcell(*fit, *idx) : "") << " |";
        }
        os << " |\n";
    }
}

}  // namespace

std::string render_coeff_table(const StudyResults& results, TableFormat format) {
    const bool individual = results.mode == StudyMode::Individual;
    if (format == TableFormat::Csv) {
        std::ostringstream os;
        if (individual) os << "symbol,";
        os << "spec,horizon,window,coef,value,tstat,pvalue,stars,nobs\n";
        for (const auto& r : flatten(results)) {
            if (individual) os << r.symbol << ',';
            os << r.spec << ',' << r.horizon << ',' << r.window << ',' << r.coef << ',' << format_double(r.value) << ','
               << format_double(r.tstat) << ',' << format_double(r.pvalue) << ',' << significance(r.pvalue) << ','
               << r.nobs << '\n';
        }
        return os.str();
    }
    if (format == TableFormat::Json) {
        json arr = json::array();
        for (const auto& r : flatten(results)) {
            json o{{"spec", r.spec},       {"horizon", r.horizon},       {"window", r.window},
                   {"coef", r.coef},       {"value", number(r.value)},   {"tstat", number(r.tstat)},
                   {"pvalue", number(r.pvalue)}, {"stars", significance(r.pvalue)}, {"nobs", r.nobs}};
            if (individual) o["symbol"] = r.symbol;
            arr.push_back(std::move(o));
        }
        return arr.dump(2) + "\n";
    }

    std::ostringstream os;
    os << "# Coefficient estimates (" << to_string(results.mode) << ")\n\n"
       << "T-stats in parentheses. ***p<0.01, **p<0.05, *p<0.1\n";
    for (const auto& window : results.window_labels) {
        os << "\n## Window " << window << "\n\n";
        if (!individual) {
            std::vector<std::string> columns;
            std::vector<std::pair<std::string, const FitResult*>> blocks;
            for (const auto& e : results.entries) {
                if (e.window != window || !e.panel) continue;
                for (const auto& l : e.panel->labels) {
                    if (std::find(columns.begin(), columns.end(), l) == columns.end()) columns.push_back(l);
                }
                blocks.emplace_back(std::string(cli_name(e.spec)) + " t+" + std::to_string(e.horizon), &*e.panel);
            }
            if (!blocks.empty()) md_table(os, columns, blocks);
        } else {
            for (const auto& e : results.entries) {
                if (e.window != window || e.individual.empty()) continue;
                os << "### " << cli_name(e.spec) << " t+" << e.horizon << "\n\n";
                std::vector<std::pair<std::string, const FitResult*>> blocks;
                for (const auto& [sym, f] : e.individual) blocks.emplace_back(sym, &f);
                md_table(os, blocks.front().second->labels, blocks);
                os << '\n';
            }
        }
        for (const auto& e : results.entries) {
            if (e.window == window && e.failure) {
                os << "\n- " << cli_name(e.spec) << " t+" << e.horizon << ": failed (" << *e.failure << ")\n";
            }
        }
    }
    return os.str();
}

std::vector<std::pair<std::string, json>> render_figure_data(const StudyResults& results) {
    std::vector<std::pair<std::string, json>> docs;
    if (results.mode == StudyMode::Panel) {
        std::vector<std::pair<SpecName, int>> keys;
        for (const auto& e : results.entries) {
            const std::pair key{e.spec, e.horizon};
            if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
        }
        for (const auto& [s, h] : keys) {
            json bars = json::object();
            json significant = json::object();
            for (const auto& e : results.entries) {
                if (e.spec != s || e.horizon != h || !e.panel) continue;
                for (std::size_t i = 0; i < e.panel->labels.size(); ++i) {
                    const auto ii = static_cast<Eigen::Index>(i);
                    bars[e.panel->labels[i]][e.window] = number(e.panel->coefficients(ii));
                    significant[e.panel->labels[i]][e.window] = e.panel->p_values(ii) < 0.05;
                }
            }
            docs.emplace_back("windows_" + std::string(cli_name(s)) + "_h" + std::to_string(h),
                              json{{"config", results.config},
                                   {"spec", cli_name(s)},
                                   {"horizon", h},
                                   {"windows", results.window_labels},
                                   {"bars", bars},
                                   {"significant_5pct", significant}});
        }
        return docs;
    }

    const bool multi_window = results.window_labels.size() > 1;
    for (const auto& e : results.entries) {
        if (e.individual.empty()) continue;
        const auto& labels = e.individual.begin()->second.labels;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            struct Bar {
                std::string symbol;
                double value, tstat, pvalue;
            };
            std::vector<Bar> bars;
            for (const auto& [sym, f] : e.individual) {
                const auto ii = static_cast<Eigen::Index>(i);
                bars.push_back({sym, f.coefficients(ii), f.t_stats(ii), f.p_values(ii)});
            }
            std::stable_sort(bars.begin(), bars.end(),
                             [](const Bar& a, const Bar& b) { return std::abs(a.value) > std::abs(b.value); });
            json entities = json::array();
            for (const auto& b : bars) {
                entities.push_back({{"symbol", b.symbol},
                                    {"value", number(b.value)},
                                    {"tstat", number(b.tstat)},
                                    {"pvalue", number(b.pvalue)},
                                    {"significant", b.pvalue < 0.05}});
            }
            std::string name = "individual_" + std::string(cli_name(e.spec)) + "_" + labels[i] + "_h" +
                               std::to_string(e.horizon);
            if (multi_window) name += "_" + e.window;
            docs.emplace_back(name, json{{"config", results.config},
                                         {"spec", cli_name(e.spec)},
                                         {"coefficient", labels[i]},
                                         {"horizon", e.horizon},
                                         {"window", e.window},
                                         {"entities", entities}});
        }
    }
    return docs;
}

namespace {

void write_json(const std::filesystem::path& path, const json& j) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Data, "cannot write " + path.string());
    out << j.dump(2) << '\n';
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::InputFormat, "cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::InputFormat, path.string() + ": " + e.what());
    }
}

json exclusions_json(const std::vector<Exclusion>& ex) {
    json arr = json::array();
    for (const auto& x : ex) arr.push_back({{"symbol", x.symbol}, {"reason", x.reason}});
    return arr;
}

std::filesystem::path entry_path(const StudyResults& r, const StudyEntry& e) {
    return std::filesystem::path("results") / e.window / std::string(cli_name(e.spec)) /
           ("h" + std::to_string(e.horizon)) / (r.mode == StudyMode::Panel ? "panel.json" : "individual.json");
}

}  // namespace

void write_study(const StudyResults& results, const std::filesystem::path& out_dir) {
    json index = json::array();
    json failures = json::array();
    for (const auto& e : results.entries) {
        json item{{"spec", cli_name(e.spec)}, {"horizon", e.horizon}, {"window", e.window}};
        if (e.failure) {
            item["failure"] = *e.failure;
            failures.push_back(item);
            index.push_back(item);
            continue;
        }
        const auto rel = entry_path(results, e);
        item["file"] = rel.generic_string();
        index.push_back(item);
        json doc{{"config", results.config},
                 {"spec", cli_name(e.spec)},
                 {"horizon", e.horizon},
                 {"window", e.window},
                 {"rows", e.rows},
                 {"entities", e.entities},
                 {"excluded", exclusions_json(e.excluded)}};
        if (e.panel) {
            doc["fit"] = fit_to_json(*e.panel);
        } else {
            json fits = json::object();
            for (const auto& [sym, f] : e.individual) fits[sym] = fit_to_json(f);
            doc["fits"] = fits;
        }
        write_json(out_dir / rel, doc);
    }
    write_json(out_dir / "failures.json", failures);
    write_json(out_dir / "study.json", {{"config", results.config},
                                        {"mode", to_string(results.mode)},
                                        {"windows", results.window_labels},
                                        {"entries", index}});
}

StudyResults read_study(const std::filesystem::path& out_dir) {
    const json study = read_json(out_dir / "study.json");
    StudyResults r;
    try {
        r.mode = parse_study_mode(study.at("mode").get<std::string>());
        r.config = study.at("config");
        r.window_labels = study.at("windows").get<std::vector<std::string>>();
        for (const auto& item : study.at("entries")) {
            StudyEntry e;
            e.spec = parse_spec_name(item.at("spec").get<std::string>());
            e.horizon = item.at("horizon").get<int>();
            e.window = item.at("window").get<std::string>();
            if (item.contains("failure")) {
                e.failure = item.at("failure").get<std::string>();
                r.entries.push_back(std::move(e));
                continue;
            }
            const json doc = read_json(out_dir / item.at("file").get<std::string>());
            e.rows = doc.at("rows").get<std::size_t>();
            e.entities = doc.at("entities").get<std::size_t>();
            for (const auto& x : doc.at("excluded")) {
                e.excluded.push_back({x.at("symbol").get<std::string>(), x.at("reason").get<std::string>()});
            }
            if (doc.contains("fit")) {
                e.panel = fit_from_json(doc.at("fit"));
            } else {
                for (const auto& [sym, f] : doc.at("fits").items()) e.individual.emplace(sym, fit_from_json(f));
            }
            r.entries.push_back(std::move(e));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::InputFormat, out_dir.string() + ": malformed study index: " + e.what());
    }
    return r;
}

}  // namespace volharness
