#include "volharness/simlab.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include "volharness/model.hpp"
#include "volharness/error.hpp"
#include "volharness/numfmt.hpp"
#include "volharness/parallel.hpp"

namespace volharness {

void validate(const SimParams& p) {
    auto fail = [](const std::string& what) { throw Error(ErrorKind::Usage, "invalid simulation parameters: " + what); };
    if (!(p.sigma >= 0.0)) fail("sigma must be >= 0");
    if (!(p.jump_intensity >= 0.0)) fail("jump_intensity must be >= 0");
    if (!(p.jump_std >= 0.0)) fail("jump_std must be >= 0");
    if (p.steps_per_day < 2 || p.steps_per_day > 86400) fail("steps_per_day must be in [2, 86400]");
    if (p.days < 1) fail("days must be >= 1");
    if (!(p.initial_price > 0.0)) fail("initial_price must be > 0");
    if (p.regime) {
        if (!(p.regime->sigma_low >= 0.0) || !(p.regime->sigma_high >= 0.0)) fail("regime sigmas must be >= 0");
        if (p.regime->block_days < 1) fail("regime block_days must be >= 1");
    }
    for (const auto& j : p.forced_jumps) {
        if (j.day < 0 || j.day >= p.days || j.step < 0 || j.step >= p.steps_per_day) fail("forced jump out of range");
    }
}

SimPath simulate_path(const SimParams& params) {
    validate(params);
    std::mt19937_64 rng(params.seed);
    std::normal_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> step_pick(0, params.steps_per_day - 1);

    const int n = params.steps_per_day;
    const double dt = 1.0 / n;
    const double sqrt_dt = std::sqrt(dt);

    std::map<std::pair<int, int>, std::vector<double>> forced;
    for (const auto& j : params.forced_jumps) forced[{j.day, j.step}].push_back(j.size);

    SimPath path;
    path.series.symbol = params.symbol;
    path.series.asset_class = params.asset_class;
    path.series.points.reserve(static_cast<std::size_t>(params.days) * static_cast<std::size_t>(n) + 1);
    path.truth.days.reserve(static_cast<std::size_t>(params.days));

    double log_price = 100.0 * std::log(params.initial_price);
    for (int d = 0; d < params.days; ++d) {
        SimDay day;
        day.date = params.start_date + std::chrono::days{d};
        day.sigma = params.sigma;
        if (params.regime) {
            day.sigma = (d / params.regime->block_days) % 2 == 0 ? params.regime->sigma_low : params.regime->sigma_high;
        }
        day.iv = day.sigma * day.sigma * dt * n;

        std::vector<std::vector<double>> jumps(static_cast<std::size_t>(n));
        if (params.jump_intensity > 0.0) {
            std::poisson_distribution<int> count(params.jump_intensity);
            const int k = count(rng);
            for (int j = 0; j < k; ++j) {
                const int at = step_pick(rng);
                jumps[static_cast<std::size_t>(at)].push_back(params.jump_mean + params.jump_std * unit(rng));
            }
        }
        for (int s = 0; s < n; ++s) {
            auto it = forced.find({d, s});
            if (it != forced.end()) {
                auto& slot = jumps[static_cast<std::size_t>(s)];
                slot.insert(slot.end(), it->second.begin(), it->second.end());
            }
        }

        const EpochSeconds day_start = midnight_of(day.date);
        day.returns.resize(static_cast<std::size_t>(n));
        for (int s = 0; s < n; ++s) {
            const EpochSeconds ts = day_start + static_cast<EpochSeconds>(s) * kSecondsPerDay / n;
            path.series.points.push_back({ts, std::exp(log_price / 100.0)});
            double inc = params.drift * dt + day.sigma * sqrt_dt * unit(rng);
            for (double jump : jumps[static_cast<std::size_t>(s)]) {
                inc += jump;
                const double sq = jump * jump;
                day.jump_sq += sq;
                if (jump > 0.0) day.jump_sq_pos += sq;
                else if (jump < 0.0) day.jump_sq_neg += sq;
                ++day.n_jumps;
            }
            day.returns[static_cast<std::size_t>(s)] = inc;
            log_price += inc;
        }
        path.truth.days.push_back(std::move(day));
    }
    return path;
}

std::vector<SimPath> simulate_panel(const SimParams& params, std::size_t entities) {
    std::vector<SimPath> paths(entities);
    const int width = entities > 1 ? static_cast<int>(std::to_string(entities - 1).size()) : 1;
    parallel_for(entities, [&](std::size_t i) {
        SimParams p = params;
        p.seed = params.seed + i;
        char buf[32];
        std::snprintf(buf, sizeof buf, "_%0*zu", std::max(width, 3), i);
        p.symbol = params.symbol + buf;
        paths[i] = simulate_path(p);
    });
    return paths;
}

namespace {

MeanSe mean_se(const std::vector<double>& v) {
    MeanSe out;
    if (v.empty()) return out;
    const double n = static_cast<double>(v.size());
    double sum = 0.0;
    for (double x : v) sum += x;
    out.mean = sum / n;
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - out.mean) * (x - out.mean);
        out.se = std::sqrt(ss / (n - 1.0) / n);
    }
    return out;
}

}  // namespace

ConvergenceReport convergence_report(const SimParams& params, std::size_t n_paths, const EstimatorOptions& options) {
    if (n_paths < 1) throw Error(ErrorKind::Usage, "n_paths must be >= 1");
    validate(params);
    constexpr std::size_t kFields = 8;
    std::vector<std::array<std::vector<double>, kFields>> per_path(n_paths);
    parallel_for(n_paths, [&](std::size_t i) {
        SimParams p = params;
        p.seed = params.seed + i;
        const SimPath path = simulate_path(p);
        auto& f = per_path[i];
        for (const auto& day : path.truth.days) {
            const DailyMeasures m = daily_measures(day.returns, options);
            f[0].push_back(m.rv);
            f[1].push_back(m.bv);
            f[2].push_back(day.iv);
            f[3].push_back(day.jump_sq);
            f[4].push_back(m.rv - m.bv);
            f[5].push_back(m.rv - (day.iv + day.jump_sq));
            f[6].push_back(m.bv - day.iv);
            f[7].push_back(m.sjv - (day.jump_sq_pos - day.jump_sq_neg));
        }
    });
    std::array<std::vector<double>, kFields> all;
    for (const auto& f : per_path) {
        for (std::size_t j = 0; j < kFields; ++j) all[j].insert(all[j].end(), f[j].begin(), f[j].end());
    }
    ConvergenceReport r;
    r.days = all[0].size();
    r.rv = mean_se(all[0]);
    r.bv = mean_se(all[1]);
    r.iv = mean_se(all[2]);
    r.jump_sq = mean_se(all[3]);
    r.rv_minus_bv = mean_se(all[4]);
    r.rv_minus_qv = mean_se(all[5]);
    r.bv_minus_iv = mean_se(all[6]);
    r.sjv_minus_signed_jumps = mean_se(all[7]);
    return r;
}

std::vector<MeasureSeries> simulate_har_panel(const HarPanelParams& params) {
    if (params.entities < 1 || params.days < 1) throw Error(ErrorKind::Usage, "HAR panel needs entities and days");
    constexpr std::size_t kHistory = kMonthlyLastLag + 1;
    const double persistence = params.phi_d + params.phi_w + params.phi_m;
    const double start_level = persistence < 1.0 ? params.mu / (1.0 - persistence) : params.mu;

    std::vector<MeasureSeries> panel(params.entities);
    parallel_for(params.entities, [&](std::size_t e) {
        std::mt19937_64 rng(params.seed + e);
        std::normal_distribution<double> noise(0.0, params.noise_sd);
        const std::size_t total = kHistory + params.burn_in + params.days;
        std::vector<double> rv(total, start_level);
        for (std::size_t s = kHistory; s < total; ++s) {
            double weekly = 0.0, monthly = 0.0;
            for (std::size_t lag = 2; lag <= 5; ++lag) weekly += rv[s - lag];
            for (std::size_t lag = 6; lag <= 22; ++lag) monthly += rv[s - lag];
            rv[s] = params.mu + params.phi_d * rv[s - 1] + params.phi_w * weekly / 4.0 +
                    params.phi_m * monthly / 17.0 + noise(rng);
        }
        MeasureSeries& series = panel[e];
        char buf[32];
        std::snprintf(buf, sizeof buf, "HAR_%03zu", e);
        series.symbol = buf;
        series.asset_class = AssetClass::Crypto;
        const std::size_t offset = kHistory + params.burn_in;
        for (std::size_t i = 0; i < params.days; ++i) {
            DailyMeasures m;
            m.date = params.start_date + std::chrono::days{static_cast<int>(i)};
            m.rv = rv[offset + i];
            m.rv_pos = m.rv / 2.0;
            m.rv_neg = m.rv / 2.0;
            m.bv = m.rv;
            m.n_obs = 287;
            series.days.push_back(m);
        }
    });
    return panel;
}

SimParams sim_params_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(ErrorKind::Usage, "simulation config must be a JSON object");
    static const std::set<std::string> known{"drift",       "sigma",      "regime",        "jump_intensity",
                                             "jump_mean",   "jump_std",   "forced_jumps",  "steps_per_day",
                                             "days",        "seed",       "symbol",        "asset_class",
                                             "start_date",  "initial_price", "entities"};
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) throw Error(ErrorKind::Usage, "unknown simulation config key '" + key + "'");
    }
    SimParams p;
    try {
        p.drift = j.value("drift", p.drift);
        p.sigma = j.value("sigma", p.sigma);
        p.jump_intensity = j.value("jump_intensity", p.jump_intensity);
        p.jump_mean = j.value("jump_mean", p.jump_mean);
        p.jump_std = j.value("jump_std", p.jump_std);
        p.steps_per_day = j.value("steps_per_day", p.steps_per_day);
        p.days = j.value("days", p.days);
        p.seed = j.value("seed", p.seed);
        p.symbol = j.value("symbol", p.symbol);
        p.initial_price = j.value("initial_price", p.initial_price);
        if (j.contains("asset_class")) p.asset_class = parse_asset_class(j.at("asset_class").get<std::string>());
        if (j.contains("start_date")) {
            auto d = parse_date(j.at("start_date").get<std::string>());
            if (!d) throw Error(ErrorKind::Usage, "bad start_date");
            p.start_date = *d;
        }
        if (j.contains("regime")) {
            const auto& r = j.at("regime");
            RegimeSchedule reg;
            reg.sigma_low = r.value("sigma_low", reg.sigma_low);
            reg.sigma_high = r.value("sigma_high", reg.sigma_high);
            reg.block_days = r.value("block_days", reg.block_days);
            p.regime = reg;
        }
        if (j.contains("forced_jumps")) {
            for (const auto& fj : j.at("forced_jumps")) {
                p.forced_jumps.push_back({fj.at("day").get<int>(), fj.at("step").get<int>(), fj.at("size").get<double>()});
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Usage, std::string("simulation config: ") + e.what());
    }
    validate(p);
    return p;
}

nlohmann::json sim_params_to_json(const SimParams& p) {
    nlohmann::json j{{"drift", p.drift},
                     {"sigma", p.sigma},
                     {"jump_intensity", p.jump_intensity},
                     {"jump_mean", p.jump_mean},
                     {"jump_std", p.jump_std},
                     {"steps_per_day", p.steps_per_day},
                     {"days", p.days},
                     {"seed", p.seed},
                     {"symbol", p.symbol},
                     {"asset_class", to_string(p.asset_class)},
                     {"start_date", format_date(p.start_date)},
                     {"initial_price", p.initial_price}};
    if (p.regime) {
        j["regime"] = {{"sigma_low", p.regime->sigma_low},
                       {"sigma_high", p.regime->sigma_high},
                       {"block_days", p.regime->block_days}};
    }
    if (!p.forced_jumps.empty()) {
        auto& arr = j["forced_jumps"] = nlohmann::json::array();
        for (const auto& fj : p.forced_jumps) arr.push_back({{"day", fj.day}, {"step", fj.step}, {"size", fj.size}});
    }
    return j;
}

void write_truth_csv(const std::filesystem::path& path, const std::vector<SimPath>& paths) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Data, "cannot write " + path.string());
    out << "symbol,date,sigma,iv,jump_sq,jump_sq_pos,jump_sq_neg,n_jumps\n";
    for (const auto& p : paths) {
        for (const auto& d : p.truth.days) {
            out << p.series.symbol << ',' << format_date(d.date) << ',' << format_double(d.sigma) << ','
                << format_double(d.iv) << ',' << format_double(d.jump_sq) << ',' << format_double(d.jump_sq_pos) << ','
                << format_double(d.jump_sq_neg) << ',' << d.n_jumps << '\n';
        }
    }
}

}  // namespace volharness
