#include "volharness/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>

#include "csv_util.hpp"
#include "volharness/error.hpp"
#include "volharness/numfmt.hpp"

namespace volharness {

std::optional<double> bipower_skip(std::span<const double> r, int skip, bool scaling) {
    const std::size_t n = r.size();
    const std::size_t q = static_cast<std::size_t>(skip);
    if (skip < 0 || n < q + 2) return std::nullopt;
    double sum = 0.0;
    for (std::size_t i = q + 1; i < n; ++i) sum += std::abs(r[i]) * std::abs(r[i - 1 - q]);
    double value = std::numbers::pi / 2.0 * sum;
    if (scaling) value *= static_cast<double>(n) / static_cast<double>(n - q - 1);
    return value;
}

DailyMeasures daily_measures(std::span<const double> returns, const EstimatorOptions& options) {
    if (returns.empty()) throw Error(ErrorKind::Data, "daily_measures: empty return vector");
    if (options.bv_skips < 0) throw Error(ErrorKind::Usage, "bv_skips must be >= 0");
    if (returns.size() < 2) {
        throw Error(ErrorKind::InsufficientData, "daily_measures: bipower variation needs at least 2 returns");
    }

    DailyMeasures m;
    m.n_obs = returns.size();
    for (double r : returns) {
        const double sq = r * r;
        m.rv += sq;
        if (r > 0.0) m.rv_pos += sq;
        else if (r < 0.0) m.rv_neg += sq;
        m.daily_return += r;
    }

    double bv_sum = 0.0;
    int feasible = 0;
    for (int q = 0; q <= options.bv_skips; ++q) {
        if (auto bq = bipower_skip(returns, q, options.bv_scaling)) {
            bv_sum += *bq;
            ++feasible;
        }
    }
    m.bv = bv_sum / feasible;

    m.sjv = m.rv_pos - m.rv_neg;
    m.sjv_pos = std::max(m.sjv, 0.0);
    m.sjv_neg = std::min(m.sjv, 0.0);
    return m;
}

void validate_series(const MeasureSeries& series) {
    for (std::size_t i = 1; i < series.days.size(); ++i) {
        if (series.days[i].date == series.days[i - 1].date) {
            throw Error(ErrorKind::Data, series.symbol + ": duplicate date " + format_date(series.days[i].date));
        }
        if (series.days[i].date < series.days[i - 1].date) {
            throw Error(ErrorKind::Data, series.symbol + ": dates out of order at " +
                                             format_date(series.days[i].date));
        }
    }
}

BuiltSeries build_series(std::string symbol, AssetClass asset_class, std::vector<DayReturns> days,
                         const EstimatorOptions& options) {
    std::sort(days.begin(), days.end(), [](const DayReturns& a, const DayReturns& b) { return a.date < b.date; });
    for (std::size_t i = 1; i < days.size(); ++i) {
        if (days[i].date == days[i - 1].date) {
            throw Error(ErrorKind::Data, symbol + ": duplicate date " + format_date(days[i].date));
        }
    }
    BuiltSeries out;
    out.series.symbol = std::move(symbol);
    out.series.asset_class = asset_class;
    for (const auto& d : days) {
        if (d.returns.size() < 2) {
            out.excluded.push_back({out.series.symbol, d.date, "bv_undefined", d.returns.size(), 2});
            continue;
        }
        DailyMeasures m = daily_measures(d.returns, options);
        m.date = d.date;
        out.series.days.push_back(m);
    }
    if (out.series.days.empty()) {
        throw Error(ErrorKind::EmptyOutput, out.series.symbol + ": no valid days");
    }
    return out;
}

BuiltSeries build_series(const IntradayReturns& returns, const EstimatorOptions& options) {
    std::vector<DayReturns> days;
    days.reserve(returns.days.size());
    for (const auto& [date, r] : returns.days) days.push_back({date, r});
    return build_series(returns.symbol, returns.asset_class, std::move(days), options);
}

const std::vector<std::string>& measure_names() {
    static const std::vector<std::string> names{"rv",  "bv",      "rv_pos",  "rv_neg",      "sjv",
                                                "sjv_pos", "sjv_neg", "daily_return", "n_obs"};
    return names;
}

double measure_value(const DailyMeasures& m, std::string_view name) {
    if (name == "rv") return m.rv;
    if (name == "bv") return m.bv;
    if (name == "rv_pos") return m.rv_pos;
    if (name == "rv_neg") return m.rv_neg;
    if (name == "sjv") return m.sjv;
    if (name == "sjv_pos") return m.sjv_pos;
    if (name == "sjv_neg") return m.sjv_neg;
    if (name == "daily_return") return m.daily_return;
    if (name == "n_obs") return static_cast<double>(m.n_obs);
    std::string valid;
    for (const auto& n : measure_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw Error(ErrorKind::Usage, "unknown measure '" + std::string(name) + "' (valid: " + valid + ")");
}

namespace {

AssetClass single_asset_class(const std::vector<MeasureSeries>& panel) {
    if (panel.empty()) throw Error(ErrorKind::EmptyInput, "empty panel");
    for (const auto& s : panel) {
        if (s.asset_class != panel.front().asset_class) {
            throw Error(ErrorKind::Usage, "panel mixes asset classes");
        }
    }
    return panel.front().asset_class;
}

std::vector<double> pooled(const std::vector<MeasureSeries>& panel, std::string_view measure) {
    std::vector<double> v;
    for (const auto& s : panel) {
        for (const auto& d : s.days) v.push_back(measure_value(d, measure));
    }
    return v;
}

}  // namespace

double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw Error(ErrorKind::EmptyInput, "quantile of empty sample");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

StatsTable descriptive_stats(const std::vector<MeasureSeries>& panel, const std::vector<std::string>& measures,
                             StdDenominator denominator) {
    StatsTable table;
    table.asset_class = single_asset_class(panel);
    table.denominator = denominator;
    for (const auto& name : measures) {
        std::vector<double> v = pooled(panel, name);
        if (v.empty()) throw Error(ErrorKind::EmptyInput, "no observations for " + name);
        StatsRow row;
        row.measure = name;
        row.count = v.size();
        const double n = static_cast<double>(v.size());
        row.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
        double ss = 0.0;
        for (double x : v) ss += (x - row.mean) * (x - row.mean);
        const double denom = denominator == StdDenominator::Population ? n : n - 1.0;
        row.std_dev = denom > 0.0 ? std::sqrt(ss / denom) : 0.0;
        std::sort(v.begin(), v.end());
        row.q05 = quantile_sorted(v, 0.05);
        row.q25 = quantile_sorted(v, 0.25);
        row.q50 = quantile_sorted(v, 0.50);
        row.q75 = quantile_sorted(v, 0.75);
        row.q95 = quantile_sorted(v, 0.95);
        table.rows.push_back(row);
    }
    return table;
}

CorrMatrix correlation_matrix(const std::vector<MeasureSeries>& panel, const std::vector<std::string>& measures) {
    single_asset_class(panel);
    CorrMatrix corr;
    corr.labels = measures;
    std::vector<std::vector<double>> centered;
    std::vector<double> norms;
    for (const auto& name : measures) {
        std::vector<double> v = pooled(panel, name);
        const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        double ss = 0.0;
        for (double& x : v) {
            x -= mean;
            ss += x * x;
        }
        centered.push_back(std::move(v));
        norms.push_back(std::sqrt(ss));
    }
    corr.observations = centered.empty() ? 0 : centered.front().size();
    if (corr.observations < 2) throw Error(ErrorKind::InsufficientData, "correlation needs >= 2 observations");

    const std::size_t k = measures.size();
    corr.values.assign(k, std::vector<std::optional<double>>(k));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i; j < k; ++j) {
            if (norms[i] == 0.0 || norms[j] == 0.0) continue;
            double value = 1.0;
            if (i != j) {
                double dot = 0.0;
                for (std::size_t t = 0; t < corr.observations; ++t) dot += centered[i][t] * centered[j][t];
                value = std::clamp(dot / (norms[i] * norms[j]), -1.0, 1.0);
            }
            corr.values[i][j] = value;
            corr.values[j][i] = value;
        }
    }
    return corr;
}

void write_measures_csv(const std::filesystem::path& path, const std::vector<MeasureSeries>& panel) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Data, "cannot write " + path.string());
    out << "symbol,date,n_obs,rv,bv,rv_pos,rv_neg,sjv,sjv_pos,sjv_neg,daily_return\n";
    for (const auto& s : panel) {
        for (const auto& d : s.days) {
            out << s.symbol << ',' << format_date(d.date) << ',' << d.n_obs << ',' << format_double(d.rv) << ','
                << format_double(d.bv) << ',' << format_double(d.rv_pos) << ',' << format_double(d.rv_neg) << ','
                << format_double(d.sjv) << ',' << format_double(d.sjv_pos) << ',' << format_double(d.sjv_neg)
                << ',' << format_double(d.daily_return) << '\n';
        }
    }
}

std::vector<MeasureSeries> read_measures_csv(const std::filesystem::path& path, AssetClass asset_class) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::InputFormat, "cannot open " + path.string());
    static const std::vector<std::string_view> header{"symbol", "date",   "n_obs",   "rv",
                                                      "bv",     "rv_pos", "rv_neg",  "sjv",
                                                      "sjv_pos", "sjv_neg", "daily_return"};
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    std::map<std::string, MeasureSeries> by_symbol;
    auto fail = [&](const std::string& what) {
        throw Error(ErrorKind::InputFormat, path.string() + ":" + std::to_string(line_no) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        auto f = detail::split(line);
        if (!have_header) {
            if (f != header) fail("unexpected measures header");
            have_header = true;
            continue;
        }
        if (f.size() != header.size()) fail("expected 11 columns");
        DailyMeasures m;
        auto date = parse_date(f[1]);
        auto n = detail::parse_integer<std::size_t>(f[2]);
        if (!date) fail("bad date");
        if (!n) fail("bad n_obs");
        m.date = *date;
        m.n_obs = *n;
        double* targets[] = {&m.rv, &m.bv, &m.rv_pos, &m.rv_neg, &m.sjv, &m.sjv_pos, &m.sjv_neg, &m.daily_return};
        for (std::size_t i = 0; i < 8; ++i) {
            auto v = detail::parse_double(f[3 + i]);
            if (!v) fail("bad value in column " + std::string(header[3 + i]));
            *targets[i] = *v;
        }
        auto& s = by_symbol[std::string(f[0])];
        s.symbol = std::string(f[0]);
        s.asset_class = asset_class;
        s.days.push_back(m);
    }
    if (by_symbol.empty()) throw Error(ErrorKind::EmptyInput, path.string() + ": no measure rows");
    std::vector<MeasureSeries> panel;
    for (auto& [sym, s] : by_symbol) {
        std::stable_sort(s.days.begin(), s.days.end(),
                         [](const DailyMeasures& a, const DailyMeasures& b) { return a.date < b.date; });
        validate_series(s);
        panel.push_back(std::move(s));
    }
    return panel;
}

void write_stats_csv(const std::filesystem::path& path, const StatsTable& table) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Data, "cannot write " + path.string());
    out << "measure,count,mean,std,q05,q25,q50,q75,q95\n";
    for (const auto& r : table.rows) {
        out << r.measure << ',' << r.count << ',' << format_double(r.mean) << ',' << format_double(r.std_dev) << ','
            << format_double(r.q05) << ',' << format_double(r.q25) << ',' << format_double(r.q50) << ','
            << format_double(r.q75) << ',' << format_double(r.q95) << '\n';
    }
}

void write_correlation_csv(const std::filesystem::path& path, const CorrMatrix& corr) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Data, "cannot write " + path.string());
    out << "measure";
    for (const auto& l : corr.labels) out << ',' << l;
    out << '\n';
    for (std::size_t i = 0; i < corr.labels.size(); ++i) {
        out << corr.labels[i];
        for (const auto& v : corr.values[i]) out << ',' << (v ? format_double(*v) : "undefined");
        out << '\n';
    }
}

}  // namespace volharness
