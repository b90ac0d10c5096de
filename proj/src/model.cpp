#include "volharness/model.hpp"

#include <cmath>

#include "volharness/error.hpp"

namespace volharness {

namespace {

using enum Source;
using enum Transform;

std::vector<ModelSpec> make_specs() {
    const Column rv_weekly{Rv, WeeklyAvg, "rv_weekly"};
    const Column rv_monthly{Rv, MonthlyAvg, "rv_monthly"};
    const Column rv_lev{Rv, NegReturnInteraction, "rv_lev"};
    return {
        {SpecName::HarRv, {{Rv, Lag1, "rv_lag1"}, rv_weekly, rv_monthly}},
        {SpecName::HarSemiRv, {{RvNeg, Lag1, "rv_neg_lag1"}, {RvPos, Lag1, "rv_pos_lag1"}, rv_weekly, rv_monthly}},
        {SpecName::HarSemiRvFull,
         {{RvNeg, Lag1, "rv_neg_lag1"},
          {RvPos, Lag1, "rv_pos_lag1"},
          {RvNeg, WeeklyAvg, "rv_neg_weekly"},
          {RvPos, WeeklyAvg, "rv_pos_weekly"},
          {RvNeg, MonthlyAvg, "rv_neg_monthly"},
          {RvPos, MonthlyAvg, "rv_pos_monthly"}}},
        {SpecName::HarRvLev, {{Rv, Lag1, "rv_lag1"}, rv_weekly, rv_monthly, rv_lev}},
        {SpecName::HarSemiRvLev,
         {{RvNeg, Lag1, "rv_neg_lag1"}, {RvPos, Lag1, "rv_pos_lag1"}, rv_weekly, rv_monthly, rv_lev}},
        {SpecName::HarJv, {{Sjv, Lag1, "sjv_lag1"}, {Bv, Lag1, "bv_lag1"}, rv_weekly, rv_monthly}},
        {SpecName::HarSjv,
         {{SjvNeg, Lag1, "sjv_neg_lag1"}, {SjvPos, Lag1, "sjv_pos_lag1"}, {Bv, Lag1, "bv_lag1"}, rv_weekly,
          rv_monthly}},
        {SpecName::HarBv, {{Bv, Lag1, "bv_lag1"}, rv_weekly, rv_monthly}},
    };
}

double source_value(const DailyMeasures& m, Source s) {
    switch (s) {
        case Rv: return m.rv;
        case RvPos: return m.rv_pos;
        case RvNeg: return m.rv_neg;
        case Bv: return m.bv;
        case Sjv: return m.sjv;
        case SjvPos: return m.sjv_pos;
        case SjvNeg: return m.sjv_neg;
    }
    return 0.0;
}

double window_mean(const std::vector<DailyMeasures>& days, std::size_t t, std::size_t first_lag,
                   std::size_t last_lag, Source s) {
    double sum = 0.0;
    for (std::size_t lag = first_lag; lag <= last_lag; ++lag) sum += source_value(days[t - lag], s);
    return sum / static_cast<double>(last_lag - first_lag + 1);
}

}  // namespace

std::string_view cli_name(SpecName name) {
    switch (name) {
        case SpecName::HarRv: return "har-rv";
        case SpecName::HarSemiRv: return "har-semirv";
        case SpecName::HarSemiRvFull: return "har-semirv-full";
        case SpecName::HarRvLev: return "har-rv-lev";
        case SpecName::HarSemiRvLev: return "har-semirv-lev";
        case SpecName::HarJv: return "har-jv";
        case SpecName::HarSjv: return "har-sjv";
        case SpecName::HarBv: return "har-bv";
    }
    return "?";
}

SpecName parse_spec_name(std::string_view text) {
    std::string valid;
    for (const auto& s : list_specs()) {
        if (cli_name(s.name) == text) return s.name;
        valid += (valid.empty() ? "" : ", ") + std::string(cli_name(s.name));
    }
    throw Error(ErrorKind::Usage, "unknown spec '" + std::string(text) + "' (valid: " + valid + ")");
}

Window window_of(Transform t) {
    switch (t) {
        case WeeklyAvg: return Window::Weekly;
        case MonthlyAvg: return Window::Monthly;
        default: return Window::Daily;
    }
}

std::vector<std::string> ModelSpec::labels() const {
    std::vector<std::string> out{"intercept"};
    for (const auto& c : columns) out.push_back(c.label);
    return out;
}

const std::vector<ModelSpec>& list_specs() {
    static const std::vector<ModelSpec> specs = make_specs();
    return specs;
}

const ModelSpec& spec(SpecName name) {
    return list_specs()[static_cast<std::size_t>(name)];
}

TargetConvention parse_target(std::string_view text) {
    if (text == "average") return TargetConvention::Average;
    if (text == "single") return TargetConvention::Single;
    if (text == "sum") return TargetConvention::Sum;
    throw Error(ErrorKind::Usage, "unknown target convention '" + std::string(text) + "' (valid: single, average, sum)");
}

const char* to_string(TargetConvention t) {
    switch (t) {
        case TargetConvention::Average: return "average";
        case TargetConvention::Single: return "single";
        case TargetConvention::Sum: return "sum";
    }
    return "?";
}

double horizon_target(const MeasureSeries& series, std::size_t t, int h, TargetConvention convention) {
    if (h < 1) throw Error(ErrorKind::Usage, "horizon must be >= 1");
    const auto uh = static_cast<std::size_t>(h);
    if (t + uh >= series.days.size()) {
        throw Error(ErrorKind::InsufficientData, series.symbol + ": no data " + std::to_string(h) +
                                                     " days after index " + std::to_string(t));
    }
    if (convention == TargetConvention::Single) return series.days[t + uh].rv;
    double sum = 0.0;
    for (std::size_t i = 1; i <= uh; ++i) sum += series.days[t + i].rv;
    return convention == TargetConvention::Sum ? sum : sum / static_cast<double>(h);
}

std::size_t required_length(int h) {
    return kMonthlyLastLag + 1 + static_cast<std::size_t>(h);
}

RegressionSample build_design(const MeasureSeries& series, const ModelSpec& spec, int h,
                              TargetConvention convention) {
    if (h < 1) throw Error(ErrorKind::Usage, "horizon must be >= 1");
    const std::size_t len = series.days.size();
    if (len < required_length(h)) {
        throw Error(ErrorKind::InsufficientData, series.symbol + ": series has " + std::to_string(len) +
                                                     " days, need at least " + std::to_string(required_length(h)) +
                                                     " for horizon " + std::to_string(h));
    }
    const std::size_t first = kMonthlyLastLag;
    const std::size_t last = len - 1 - static_cast<std::size_t>(h);
    const std::size_t k = spec.columns.size() + 1;

    RegressionSample out;
    out.labels = spec.labels();
    out.horizon = h;
    std::vector<double> ys;
    std::vector<double> xs;
    std::vector<double> row(k);
    for (std::size_t t = first; t <= last; ++t) {
        const DailyMeasures& day = series.days[t];
        row[0] = 1.0;
        for (std::size_t c = 0; c < spec.columns.size(); ++c) {
            const Column& col = spec.columns[c];
            double v = 0.0;
            switch (col.transform) {
                case Lag1: v = source_value(day, col.source); break;
                case WeeklyAvg: v = window_mean(series.days, t, kWeeklyFirstLag, kWeeklyLastLag, col.source); break;
                case MonthlyAvg:
                    v = window_mean(series.days, t, kMonthlyFirstLag, kMonthlyLastLag, col.source);
                    break;
                case NegReturnInteraction:
                    v = day.daily_return < 0.0 ? source_value(day, col.source) : 0.0;
                    break;
            }
            row[c + 1] = v;
        }
        const double y = horizon_target(series, t, h, convention);
        bool finite = std::isfinite(y);
        for (double v : row) finite = finite && std::isfinite(v);
        if (!finite) {
            ++out.dropped_nonfinite;
            continue;
        }
        ys.push_back(y);
        xs.insert(xs.end(), row.begin(), row.end());
        out.index.push_back({series.symbol, day.date});
    }
    const auto n = static_cast<Eigen::Index>(ys.size());
    out.y = Eigen::Map<const Eigen::VectorXd>(ys.data(), n);
    out.X = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        xs.data(), n, static_cast<Eigen::Index>(k));
    return out;
}

RegressionSample stack_samples(const std::vector<RegressionSample>& samples) {
    if (samples.empty()) throw Error(ErrorKind::EmptyInput, "no samples to stack");
    RegressionSample out;
    out.labels = samples.front().labels;
    out.horizon = samples.front().horizon;
    Eigen::Index rows = 0;
    for (const auto& s : samples) {
        if (s.labels != out.labels || s.horizon != out.horizon) {
            throw Error(ErrorKind::Usage, "cannot stack samples with different layouts");
        }
        rows += s.X.rows();
    }
    const auto k = static_cast<Eigen::Index>(out.labels.size());
    out.X.resize(rows, k);
    out.y.resize(rows);
    Eigen::Index at = 0;
    for (const auto& s : samples) {
        out.X.middleRows(at, s.X.rows()) = s.X;
        out.y.segment(at, s.y.size()) = s.y;
        at += s.X.rows();
        out.index.insert(out.index.end(), s.index.begin(), s.index.end());
        out.dropped_nonfinite += s.dropped_nonfinite;
    }
    return out;
}

}  // namespace volharness
