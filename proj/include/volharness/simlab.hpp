#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "volharness/calendar.hpp"
#include "volharness/estimators.hpp"
#include "volharness/marketdata.hpp"

namespace volharness {

/// Alternating low/high diffusion level by blocks of days, starting low.
struct RegimeSchedule {
    double sigma_low = 1.0;
    double sigma_high = 2.0;
    int block_days = 20;
};

struct ForcedJump {
    int day = 0;
    int step = 0;
    double size = 0.0;  // percent log price
};

/// Jump-diffusion in percent log price. Time unit is one day, so a constant
/// sigma gives integrated variance sigma^2 per day.
struct SimParams {
    double drift = 0.0;
    double sigma = 1.0;
    std::optional<RegimeSchedule> regime;
    double jump_intensity = 0.0;  // expected jumps per day
    double jump_mean = 0.0;
    double jump_std = 0.0;
    std::vector<ForcedJump> forced_jumps;
    int steps_per_day = 288;
    int days = 1;
    std::uint64_t seed = 0;
    std::string symbol = "SIM";
    AssetClass asset_class = AssetClass::Crypto;
    Date start_date = Date{std::chrono::year{2020} / 1 / 1};
    double initial_price = 100.0;
};

void validate(const SimParams& params);

struct SimDay {
    Date date{};
    std::vector<double> returns;  // step returns, percent
    double sigma = 0.0;
    double iv = 0.0;
    double jump_sq = 0.0;
    double jump_sq_pos = 0.0;
    double jump_sq_neg = 0.0;
    int n_jumps = 0;
};

struct SimTruth {
    std::vector<SimDay> days;
};

struct SimPath {
    PriceSeries series;
    SimTruth truth;
};

/// Euler steps of drift and diffusion; jumps land after the diffusion
/// increment of their step. Prices are stamped at day_start + i*86400/steps,
/// so the last step of each day ends at the next midnight.
SimPath simulate_path(const SimParams& params);

/// Entity i uses seed + i and symbol "<symbol>_<i>" (zero padded).
std::vector<SimPath> simulate_panel(const SimParams& params, std::size_t entities);

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

struct ConvergenceReport {
    std::size_t days = 0;
    MeanSe rv;
    MeanSe bv;
    MeanSe iv;
    MeanSe jump_sq;
    MeanSe rv_minus_bv;
    MeanSe rv_minus_qv;          // rv - (iv + jump_sq)
    MeanSe bv_minus_iv;
    MeanSe sjv_minus_signed_jumps;  // (rv_pos - rv_neg) - (jump_sq_pos - jump_sq_neg)
};

/// Paths use seeds params.seed + i.
ConvergenceReport convergence_report(const SimParams& params, std::size_t n_paths,
                                     const EstimatorOptions& options = {});

/// Synthetic daily RV panel following HAR_RV with Gaussian noise.
struct HarPanelParams {
    double mu = 0.1;
    double phi_d = 0.4;
    double phi_w = 0.3;
    double phi_m = 0.2;
    double noise_sd = 1.0;
    std::size_t entities = 20;
    std::size_t days = 500;
    std::size_t burn_in = 100;
    std::uint64_t seed = 0;
    Date start_date = Date{std::chrono::year{2020} / 1 / 1};
};

std::vector<MeasureSeries> simulate_har_panel(const HarPanelParams& params);

SimParams sim_params_from_json(const nlohmann::json& j);
nlohmann::json sim_params_to_json(const SimParams& params);

// symbol,date,sigma,iv,jump_sq,jump_sq_pos,jump_sq_neg,n_jumps
void write_truth_csv(const std::filesystem::path& path, const std::vector<SimPath>& paths);

}  // namespace volharness
