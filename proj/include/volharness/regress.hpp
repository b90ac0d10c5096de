#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "volharness/model.hpp"

namespace volharness {

enum class Estimator { Ols, Wls };
enum class WlsWeights { Fitted, AbsResidual };
enum class PValueDist { Normal, StudentT };

const char* to_string(Estimator e);
const char* to_string(WlsWeights w);
const char* to_string(PValueDist d);
WlsWeights parse_wls_weights(std::string_view text);

constexpr double kConditionLimit = 1e10;

struct FitOptions {
    std::optional<int> nw_lag;  // default_nw_lag when unset
    /// Block HAC over the row keys' symbols; otherwise rows form one sequence.
    bool group_by_entity = true;
    WlsWeights weights = WlsWeights::Fitted;
    double weight_floor = 1e-8;
    PValueDist pvalues = PValueDist::Normal;
};

struct WeightsSummary {
    double min = 0.0;
    double median = 0.0;
    double max = 0.0;
    std::size_t floored = 0;
};

struct FitResult {
    std::vector<std::string> labels;
    Eigen::VectorXd coefficients;
    Eigen::MatrixXd covariance;
    Eigen::VectorXd std_errors;
    Eigen::VectorXd t_stats;
    Eigen::VectorXd p_values;
    std::size_t n_obs = 0;
    int nw_lag = 0;
    bool nw_lag_truncated = false;
    Estimator estimator = Estimator::Ols;
    PValueDist pvalue_dist = PValueDist::Normal;
    std::optional<WeightsSummary> weights_summary;
    bool converged = true;
    std::size_t rank = 0;
    double condition_number = 0.0;
    std::optional<double> stage1_condition_number;
    Eigen::VectorXd residuals;  // unweighted y - X b

    std::optional<std::size_t> find(std::string_view label) const;
    double coef(std::string_view label) const;
    double t_stat(std::string_view label) const;
    double p_value(std::string_view label) const;
};

/// floor(4 (T/100)^(2/9)).
int default_nw_lag(std::size_t T);

struct HacResult {
    Eigen::MatrixXd covariance;
    int lag = 0;
    bool truncated = false;
};

/// Bartlett-kernel sandwich (X'X)^-1 S (X'X)^-1. With `groups`, lagged
/// cross-products pair only rows sharing a group key, in row order.
/// Pass weighted rows (sqrt(w) X, sqrt(w) e) for WLS fits.
HacResult newey_west(const Eigen::MatrixXd& X, const Eigen::VectorXd& residuals, int lag,
                     const std::vector<std::string>* groups = nullptr);

FitResult ols(const RegressionSample& sample, const FitOptions& options = {});

/// OLS, then weights 1/max(fitted, floor) (or 1/max(|residual|, floor)) and
/// a weighted refit. HAC covariance is computed on the weighted rows.
FitResult wls_two_stage(const RegressionSample& sample, const FitOptions& options = {});

/// Weighted fit with caller-supplied weights; used by wls_two_stage.
FitResult wls(const RegressionSample& sample, const Eigen::VectorXd& weights,
              const FitOptions& options = {});

double two_sided_p_value(double t, PValueDist dist, double dof);

/// "***" p<0.01, "**" p<0.05, "*" p<0.1.
std::string significance(double p);

}  // namespace volharness
