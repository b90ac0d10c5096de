#include "volharness/regress.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <boost/math/distributions/students_t.hpp>

#include "volharness/error.hpp"

namespace volharness {

namespace {

struct CoreFit {
    Eigen::VectorXd beta;
    Eigen::MatrixXd bread;  // pinv(X'X)
    std::size_t rank = 0;
    double condition = 0.0;
};

void check_sample(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    if (X.rows() != y.size()) throw Error(ErrorKind::Usage, "design and target row counts differ");
    if (X.rows() < X.cols()) {
        throw Error(ErrorKind::InsufficientData, "underdetermined regression: " + std::to_string(X.rows()) +
                                                     " rows for " + std::to_string(X.cols()) + " coefficients");
    }
    if (!X.allFinite() || !y.allFinite()) throw Error(ErrorKind::Data, "regression input contains non-finite values");
}

CoreFit solve_least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    CoreFit fit;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(X);
    fit.beta = cod.solve(y);
    fit.rank = static_cast<std::size_t>(cod.rank());
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(X);
    const auto& sv = svd.singularValues();
    const double smin = sv.size() ? sv(sv.size() - 1) : 0.0;
    fit.condition = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
    const Eigen::MatrixXd xtx = X.transpose() * X;
    fit.bread = xtx.completeOrthogonalDecomposition().pseudoInverse();
    return fit;
}

// Row indices per group, in first-appearance order, rows kept in sample order.
std::vector<std::vector<Eigen::Index>> group_rows(Eigen::Index n, const std::vector<std::string>* groups) {
    std::vector<std::vector<Eigen::Index>> out;
    if (!groups) {
        out.emplace_back(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) out.front()[static_cast<std::size_t>(i)] = i;
        return out;
    }
    if (static_cast<Eigen::Index>(groups->size()) != n) {
        throw Error(ErrorKind::Usage, "group keys not aligned with rows");
    }
    std::map<std::string_view, std::size_t> slot;
    for (Eigen::Index i = 0; i < n; ++i) {
        auto [it, inserted] = slot.try_emplace((*groups)[static_cast<std::size_t>(i)], out.size());
        if (inserted) out.emplace_back();
        out[it->second].push_back(i);
    }
    return out;
}

std::vector<std::string> entity_groups(const RegressionSample& sample) {
    std::vector<std::string> g;
    g.reserve(sample.index.size());
    for (const auto& key : sample.index) g.push_back(key.symbol);
    return g;
}

std::size_t longest_group(const RegressionSample& sample, bool by_entity) {
    if (!by_entity || sample.index.empty()) return sample.rows();
    std::map<std::string_view, std::size_t> counts;
    for (const auto& key : sample.index) ++counts[key.symbol];
    std::size_t longest = 0;
    for (const auto& [sym, c] : counts) longest = std::max(longest, c);
    return longest;
}

void fill_inference(FitResult& fit, const Eigen::MatrixXd& cov, const FitOptions& options) {
    const auto k = fit.coefficients.size();
    fit.covariance = cov;
    fit.std_errors.resize(k);
    fit.t_stats.resize(k);
    fit.p_values.resize(k);
    fit.pvalue_dist = options.pvalues;
    const double dof = static_cast<double>(fit.n_obs) - static_cast<double>(fit.rank);
    for (Eigen::Index i = 0; i < k; ++i) {
        const double var = cov(i, i);
        const double se = var > 0.0 ? std::sqrt(var) : 0.0;
        fit.std_errors(i) = se;
        const double b = fit.coefficients(i);
        double t = 0.0;
        if (se > 0.0) t = b / se;
        else if (b != 0.0) t = std::copysign(std::numeric_limits<double>::infinity(), b);
        fit.t_stats(i) = t;
        fit.p_values(i) = two_sided_p_value(t, options.pvalues, dof);
    }
}

FitResult fit_rows(const RegressionSample& sample, const Eigen::MatrixXd& Xfit, const Eigen::VectorXd& yfit,
                   const Eigen::VectorXd* sqrt_w, const FitOptions& options) {
    check_sample(Xfit, yfit);
    CoreFit core = solve_least_squares(Xfit, yfit);

    FitResult fit;
    fit.labels = sample.labels;
    fit.coefficients = core.beta;
    fit.n_obs = sample.rows();
    fit.rank = core.rank;
    fit.condition_number = core.condition;
    fit.converged = core.rank == sample.cols() && core.condition <= kConditionLimit;
    fit.residuals = sample.y - sample.X * core.beta;

    const Eigen::VectorXd fit_resid = sqrt_w ? Eigen::VectorXd(fit.residuals.cwiseProduct(*sqrt_w)) : fit.residuals;
    const std::size_t longest = longest_group(sample, options.group_by_entity);
    const int lag = options.nw_lag.value_or(longest >= 2 ? default_nw_lag(longest) : 0);
    std::vector<std::string> groups;
    if (options.group_by_entity) groups = entity_groups(sample);
    HacResult hac = newey_west(Xfit, fit_resid, lag, options.group_by_entity && !groups.empty() ? &groups : nullptr);
    fit.nw_lag = hac.lag;
    fit.nw_lag_truncated = hac.truncated;
    fill_inference(fit, hac.covariance, options);
    return fit;
}

}  // namespace

const char* to_string(Estimator e) {
    return e == Estimator::Ols ? "OLS" : "WLS";
}

const char* to_string(WlsWeights w) {
    return w == WlsWeights::Fitted ? "fitted" : "abs-residual";
}

const char* to_string(PValueDist d) {
    return d == PValueDist::Normal ? "normal" : "student-t";
}

WlsWeights parse_wls_weights(std::string_view text) {
    if (text == "fitted") return WlsWeights::Fitted;
    if (text == "abs-residual") return WlsWeights::AbsResidual;
    throw Error(ErrorKind::Usage, "unknown wls weights '" + std::string(text) + "' (valid: fitted, abs-residual)");
}

std::optional<std::size_t> FitResult::find(std::string_view label) const {
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == label) return i;
    }
    return std::nullopt;
}

double FitResult::coef(std::string_view label) const {
    auto i = find(label);
    if (!i) throw Error(ErrorKind::Usage, "no coefficient '" + std::string(label) + "'");
    return coefficients(static_cast<Eigen::Index>(*i));
}

double FitResult::t_stat(std::string_view label) const {
    auto i = find(label);
    if (!i) throw Error(ErrorKind::Usage, "no coefficient '" + std::string(label) + "'");
    return t_stats(static_cast<Eigen::Index>(*i));
}

double FitResult::p_value(std::string_view label) const {
    auto i = find(label);
    if (!i) throw Error(ErrorKind::Usage, "no coefficient '" + std::string(label) + "'");
    return p_values(static_cast<Eigen::Index>(*i));
}

int default_nw_lag(std::size_t T) {
    if (T < 2) throw Error(ErrorKind::Usage, "default_nw_lag needs T >= 2");
    return static_cast<int>(std::floor(4.0 * std::pow(static_cast<double>(T) / 100.0, 2.0 / 9.0)));
}

HacResult newey_west(const Eigen::MatrixXd& X, const Eigen::VectorXd& residuals, int lag,
                     const std::vector<std::string>* groups) {
    if (lag < 0) throw Error(ErrorKind::Usage, "Newey-West lag must be >= 0");
    if (X.rows() != residuals.size()) throw Error(ErrorKind::Usage, "residuals not aligned with rows");
    const Eigen::Index k = X.cols();
    const Eigen::MatrixXd U = X.array().colwise() * residuals.array();
    const auto blocks = group_rows(X.rows(), groups);

    std::size_t longest = 0;
    for (const auto& b : blocks) longest = std::max(longest, b.size());
    HacResult out;
    out.lag = lag;
    if (longest > 0 && static_cast<std::size_t>(lag) >= longest) {
        out.lag = static_cast<int>(longest) - 1;
        out.truncated = true;
    }

    Eigen::MatrixXd S = U.transpose() * U;
    std::vector<Eigen::MatrixXd> block_u;
    block_u.reserve(blocks.size());
    for (const auto& rows : blocks) {
        Eigen::MatrixXd ub(static_cast<Eigen::Index>(rows.size()), k);
        for (std::size_t j = 0; j < rows.size(); ++j) ub.row(static_cast<Eigen::Index>(j)) = U.row(rows[j]);
        block_u.push_back(std::move(ub));
    }
    for (int l = 1; l <= out.lag; ++l) {
        const double w = 1.0 - static_cast<double>(l) / static_cast<double>(out.lag + 1);
        Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(k, k);
        for (const auto& ub : block_u) {
            const Eigen::Index m = ub.rows() - l;
            if (m <= 0) continue;
            gamma.noalias() += ub.bottomRows(m).transpose() * ub.topRows(m);
        }
        S += w * (gamma + gamma.transpose());
    }

    const Eigen::MatrixXd xtx = X.transpose() * X;
    const Eigen::MatrixXd bread = xtx.completeOrthogonalDecomposition().pseudoInverse();
    Eigen::MatrixXd cov = bread * S * bread;
    out.covariance = 0.5 * (cov + cov.transpose());
    return out;
}

FitResult ols(const RegressionSample& sample, const FitOptions& options) {
    FitResult fit = fit_rows(sample, sample.X, sample.y, nullptr, options);
    fit.estimator = Estimator::Ols;
    return fit;
}

FitResult wls(const RegressionSample& sample, const Eigen::VectorXd& weights, const FitOptions& options) {
    if (weights.size() != static_cast<Eigen::Index>(sample.rows())) {
        throw Error(ErrorKind::Usage, "weights not aligned with rows");
    }
    if (!weights.allFinite() || (weights.array() <= 0.0).any()) {
        throw Error(ErrorKind::Numerical, "weights must be finite and positive");
    }
    const Eigen::VectorXd sw = weights.cwiseSqrt();
    const Eigen::MatrixXd Xw = sample.X.array().colwise() * sw.array();
    const Eigen::VectorXd yw = sample.y.cwiseProduct(sw);
    FitResult fit = fit_rows(sample, Xw, yw, &sw, options);
    fit.estimator = Estimator::Wls;

    std::vector<double> w(weights.data(), weights.data() + weights.size());
    std::sort(w.begin(), w.end());
    WeightsSummary summary;
    summary.min = w.front();
    summary.max = w.back();
    const std::size_t mid = w.size() / 2;
    summary.median = w.size() % 2 ? w[mid] : 0.5 * (w[mid - 1] + w[mid]);
    fit.weights_summary = summary;
    return fit;
}

FitResult wls_two_stage(const RegressionSample& sample, const FitOptions& options) {
    if (!(options.weight_floor > 0.0)) throw Error(ErrorKind::Usage, "weight floor must be positive");
    const FitResult stage1 = ols(sample, options);
    const Eigen::VectorXd basis = options.weights == WlsWeights::Fitted
                                      ? Eigen::VectorXd(sample.X * stage1.coefficients)
                                      : Eigen::VectorXd(stage1.residuals.cwiseAbs());
    Eigen::VectorXd weights(basis.size());
    std::size_t floored = 0;
    for (Eigen::Index i = 0; i < basis.size(); ++i) {
        double b = basis(i);
        if (!(b >= options.weight_floor)) {
            b = options.weight_floor;
            ++floored;
        }
        weights(i) = 1.0 / b;
    }
    FitResult fit = wls(sample, weights, options);
    fit.weights_summary->floored = floored;
    fit.stage1_condition_number = stage1.condition_number;
    fit.converged = fit.converged && stage1.converged;
    return fit;
}

double two_sided_p_value(double t, PValueDist dist, double dof) {
    if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
    const double a = std::abs(t);
    if (std::isinf(a)) return 0.0;
    if (dist == PValueDist::Normal || dof < 1.0) return std::erfc(a / std::sqrt(2.0));
    boost::math::students_t_distribution<double> st(dof);
    return std::clamp(2.0 * boost::math::cdf(boost::math::complement(st, a)), 0.0, 1.0);
}

std::string significance(double p) {
    if (p < 0.01) return "***";
    if (p < 0.05) return "**";
    if (p < 0.1) return "*";
    return "";
}

}  // namespace volharness
