#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "volharness/cli.hpp"
#include "volharness/error.hpp"
#include "volharness/estimators.hpp"
#include "volharness/model.hpp"
#include "volharness/regress.hpp"
#include "volharness/simlab.hpp"
#include "volharness/study.hpp"

namespace py = pybind11;
using namespace volharness;

namespace {

py::dict measures_dict(const DailyMeasures& m) {
    py::dict d;
    d["rv"] = m.rv;
    d["bv"] = m.bv;
    d["rv_pos"] = m.rv_pos;
    d["rv_neg"] = m.rv_neg;
    d["sjv"] = m.sjv;
    d["sjv_pos"] = m.sjv_pos;
    d["sjv_neg"] = m.sjv_neg;
    d["daily_return"] = m.daily_return;
    d["n_obs"] = m.n_obs;
    return d;
}

py::dict fit_dict(const FitResult& f) {
    py::dict d;
    d["labels"] = f.labels;
    d["coefficients"] = f.coefficients;
    d["covariance"] = f.covariance;
    d["std_errors"] = f.std_errors;
    d["t_stats"] = f.t_stats;
    d["p_values"] = f.p_values;
    d["n_obs"] = f.n_obs;
    d["nw_lag"] = f.nw_lag;
    d["estimator"] = to_string(f.estimator);
    d["converged"] = f.converged;
    d["rank"] = f.rank;
    d["condition_number"] = f.condition_number;
    d["residuals"] = f.residuals;
    if (f.weights_summary) {
        d["weights"] = py::dict(py::arg("min") = f.weights_summary->min, py::arg("median") = f.weights_summary->median,
                                py::arg("max") = f.weights_summary->max, py::arg("floored") = f.weights_summary->floored);
    }
    return d;
}

RegressionSample to_sample(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::vector<std::string> labels,
                           const std::optional<std::vector<std::string>>& groups) {
    RegressionSample s;
    s.X = X;
    s.y = y;
    if (labels.empty()) {
        for (Eigen::Index j = 0; j < X.cols(); ++j) labels.push_back("x" + std::to_string(j));
    }
    if (static_cast<Eigen::Index>(labels.size()) != X.cols()) throw Error(ErrorKind::Usage, "one label per column");
    s.labels = std::move(labels);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        s.index.push_back({groups ? groups->at(static_cast<std::size_t>(i)) : std::string("all"),
                           Date{} + std::chrono::days{i}});
    }
    return s;
}

FitOptions fit_options(std::optional<int> nw_lag, const std::string& weights, double floor) {
    FitOptions o;
    o.nw_lag = nw_lag;
    o.weights = parse_wls_weights(weights);
    o.weight_floor = floor;
    return o;
}

}  // namespace

PYBIND11_MODULE(_volharness, m) {
    m.doc() = "Realized volatility measures and HAR-family regressions";
    py::register_exception<Error>(m, "VolharnessError", PyExc_ValueError);

    m.def(
        "daily_measures",
        [](const std::vector<double>& returns, int bv_skips, bool bv_scaling) {
            return measures_dict(daily_measures(returns, {bv_skips, bv_scaling}));
        },
        py::arg("returns"), py::arg("bv_skips") = 4, py::arg("bv_scaling") = true);

    m.def("list_specs", [] {
        std::vector<std::pair<std::string, std::vector<std::string>>> out;
        for (const auto& s : list_specs()) out.emplace_back(std::string(cli_name(s.name)), s.labels());
        return out;
    });

    m.def(
        "build_design",
        [](const std::vector<double>& rv, const std::vector<double>& rv_pos, const std::vector<double>& rv_neg,
           const std::vector<double>& bv, const std::vector<double>& daily_return, const std::string& spec_name, int h) {
            const std::size_t n = rv.size();
            if (rv_pos.size() != n || rv_neg.size() != n || bv.size() != n || daily_return.size() != n) {
                throw Error(ErrorKind::Usage, "all measure arrays must have the same length");
            }
            MeasureSeries s;
            s.symbol = "X";
            for (std::size_t i = 0; i < n; ++i) {
                DailyMeasures d;
                d.date = Date{std::chrono::year{2000} / 1 / 1} + std::chrono::days{static_cast<int>(i)};
                d.rv = rv[i];
                d.rv_pos = rv_pos[i];
                d.rv_neg = rv_neg[i];
                d.bv = bv[i];
                d.sjv = rv_pos[i] - rv_neg[i];
                d.sjv_pos = std::max(d.sjv, 0.0);
                d.sjv_neg = std::min(d.sjv, 0.0);
                d.daily_return = daily_return[i];
                s.days.push_back(d);
            }
            const RegressionSample x = build_design(s, spec(parse_spec_name(spec_name)), h);
            return py::make_tuple(x.X, x.y, x.labels);
        },
        py::arg("rv"), py::arg("rv_pos"), py::arg("rv_neg"), py::arg("bv"), py::arg("daily_return"), py::arg("spec"),
        py::arg("horizon"));

    m.def(
        "ols",
        [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::vector<std::string> labels, std::optional<int> nw_lag,
           std::optional<std::vector<std::string>> groups) {
            return fit_dict(ols(to_sample(X, y, std::move(labels), groups), fit_options(nw_lag, "fitted", 1e-8)));
        },
        py::arg("X"), py::arg("y"), py::arg("labels") = std::vector<std::string>{}, py::arg("nw_lag") = py::none(),
        py::arg("groups") = py::none());

    m.def(
        "wls_two_stage",
        [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::vector<std::string> labels, std::optional<int> nw_lag,
           std::optional<std::vector<std::string>> groups, const std::string& weights, double weight_floor) {
            return fit_dict(wls_two_stage(to_sample(X, y, std::move(labels), groups),
                                          fit_options(nw_lag, weights, weight_floor)));
        },
        py::arg("X"), py::arg("y"), py::arg("labels") = std::vector<std::string>{}, py::arg("nw_lag") = py::none(),
        py::arg("groups") = py::none(), py::arg("weights") = "fitted", py::arg("weight_floor") = 1e-8);

    m.def(
        "newey_west",
        [](const Eigen::MatrixXd& X, const Eigen::VectorXd& e, int lag, std::optional<std::vector<std::string>> groups) {
            return newey_west(X, e, lag, groups ? &*groups : nullptr).covariance;
        },
        py::arg("X"), py::arg("residuals"), py::arg("lag"), py::arg("groups") = py::none());

    m.def("default_nw_lag", &default_nw_lag, py::arg("T"));
    m.def("significance", &significance, py::arg("p"));

    m.def(
        "simulate_path",
        [](const std::string& params_json) {
            const SimPath p = simulate_path(sim_params_from_json(nlohmann::json::parse(params_json)));
            std::vector<std::int64_t> ts;
            std::vector<double> px;
            for (const auto& pt : p.series.points) {
                ts.push_back(pt.timestamp);
                px.push_back(pt.price);
            }
            py::list days;
            for (const auto& d : p.truth.days) {
                py::dict row;
                row["date"] = format_date(d.date);
                row["returns"] = d.returns;
                row["iv"] = d.iv;
                row["jump_sq"] = d.jump_sq;
                row["jump_sq_pos"] = d.jump_sq_pos;
                row["jump_sq_neg"] = d.jump_sq_neg;
                row["n_jumps"] = d.n_jumps;
                days.append(row);
            }
            return py::make_tuple(ts, px, days);
        },
        py::arg("params_json"));

    m.def(
        "convergence_report",
        [](const std::string& params_json, std::size_t n_paths, int bv_skips, bool bv_scaling) {
            const ConvergenceReport r =
                convergence_report(sim_params_from_json(nlohmann::json::parse(params_json)), n_paths, {bv_skips, bv_scaling});
            py::dict d;
            d["days"] = r.days;
            for (const auto& [name, v] : std::vector<std::pair<const char*, MeanSe>>{
                     {"rv", r.rv}, {"bv", r.bv}, {"iv", r.iv}, {"jump_sq", r.jump_sq}, {"rv_minus_bv", r.rv_minus_bv},
                     {"rv_minus_qv", r.rv_minus_qv}, {"bv_minus_iv", r.bv_minus_iv},
                     {"sjv_minus_signed_jumps", r.sjv_minus_signed_jumps}}) {
                d[name] = py::make_tuple(v.mean, v.se);
            }
            return d;
        },
        py::arg("params_json"), py::arg("n_paths") = 1, py::arg("bv_skips") = 4, py::arg("bv_scaling") = true);

    m.def(
        "fit_panel",
        [](const std::string& measures_csv, const std::vector<std::string>& specs, const std::vector<int>& horizons,
           const std::string& mode) {
            StudyConfig cfg;
            for (const auto& s : specs) cfg.specs.push_back(parse_spec_name(s));
            cfg.horizons = horizons;
            cfg.mode = parse_study_mode(mode);
            const auto res = run_study(read_measures_csv(measures_csv), cfg);
            return render_coeff_table(res, TableFormat::Json);
        },
        py::arg("measures_csv"), py::arg("specs"), py::arg("horizons") = std::vector<int>{1, 5, 22, 66},
        py::arg("mode") = "panel");

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            const int code = run_cli(args, out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"));
}
