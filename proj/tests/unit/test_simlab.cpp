#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"
#include "volharness/error.hpp"
#include "volharness/marketdata.hpp"
#include "volharness/simlab.hpp"

using namespace volharness;
using nlohmann::json;

TEST(Simulate, DegenerateProcessIsFlat) {
    SimParams p;
    p.sigma = 0.0;
    p.days = 3;
    const SimPath path = simulate_path(p);
    for (const auto& pt : path.series.points) EXPECT_DOUBLE_EQ(pt.price, 100.0);
    for (const auto& d : path.truth.days) {
        EXPECT_EQ(d.iv, 0.0);
        EXPECT_EQ(daily_measures(d.returns).rv, 0.0);
    }
}

TEST(Simulate, SingleForcedJump) {
    SimParams p;
    p.sigma = 0.0;
    p.days = 1;
    p.forced_jumps = {{0, 100, 2.0}};
    double prev_bv = 1e9;
    for (int steps : {288, 1152, 4608}) {
        p.steps_per_day = steps;
        const SimPath path = simulate_path(p);
        const auto m = daily_measures(path.truth.days[0].returns);
        EXPECT_NEAR(m.rv, 4.0, 1e-12);
        EXPECT_EQ(path.truth.days[0].jump_sq, 4.0);
        EXPECT_EQ(path.truth.days[0].jump_sq_pos, 4.0);
        EXPECT_EQ(path.truth.days[0].n_jumps, 1);
        EXPECT_LE(m.bv, prev_bv);
        prev_bv = m.bv;
    }
    EXPECT_LT(prev_bv, 0.01);
}

TEST(Simulate, SameSeedBitIdentical) {
    SimParams p;
    p.days = 5;
    p.jump_intensity = 2.0;
    p.jump_std = 0.5;
    p.seed = 99;
    const SimPath a = simulate_path(p);
    const SimPath b = simulate_path(p);
    ASSERT_EQ(a.series.points.size(), b.series.points.size());
    for (std::size_t i = 0; i < a.series.points.size(); ++i) EXPECT_EQ(a.series.points[i].price, b.series.points[i].price);
    p.seed = 100;
    EXPECT_NE(simulate_path(p).series.points[5].price, a.series.points[5].price);
}

TEST(Simulate, MeasuredRvIsSumOfStepSquares) {
    SimParams p;
    p.days = 10;
    p.jump_intensity = 1.0;
    p.jump_std = 0.5;
    p.seed = 4;
    for (const auto& d : simulate_path(p).truth.days) {
        double ss = 0.0;
        for (double r : d.returns) ss += r * r;
        EXPECT_EQ(daily_measures(d.returns).rv, ss);
    }
}

TEST(Simulate, RegimeSchedule) {
    SimParams p;
    p.days = 60;
    p.regime = RegimeSchedule{0.5, 2.0, 20};
    const auto t = simulate_path(p).truth;
    EXPECT_EQ(t.days[0].sigma, 0.5);
    EXPECT_EQ(t.days[25].sigma, 2.0);
    EXPECT_EQ(t.days[45].sigma, 0.5);
    EXPECT_DOUBLE_EQ(t.days[25].iv, 4.0);
}

TEST(Simulate, ValidationErrors) {
    SimParams p;
    p.sigma = -1.0;
    EXPECT_THROW(validate(p), Error);
    p = SimParams{};
    p.steps_per_day = 1;
    EXPECT_THROW(validate(p), Error);
    p = SimParams{};
    p.days = 0;
    EXPECT_THROW(validate(p), Error);
    p = SimParams{};
    p.jump_intensity = -0.1;
    EXPECT_THROW(validate(p), Error);
}

TEST(Simulate, CsvRoundTripThroughIngest) {
    testutil::TempDir dir("sim");
    SimParams p;
    p.days = 4;
    p.seed = 12;
    p.jump_intensity = 0.5;
    p.jump_std = 0.3;
    const auto paths = simulate_panel(p, 2);
    EXPECT_EQ(paths[1].series.symbol, "SIM_001");
    std::vector<PriceSeries> series{paths[0].series, paths[1].series};
    write_price_csv(dir / "prices.csv", series);
    const auto loaded = load_price_panel_csv(dir / "prices.csv", AssetClass::Crypto);
    ASSERT_EQ(loaded.series.size(), 2u);
    EXPECT_EQ(loaded.duplicate_count, 0u);
    for (std::size_t e = 0; e < 2; ++e) {
        ASSERT_EQ(loaded.series[e].points.size(), paths[e].series.points.size());
        for (std::size_t i = 0; i < loaded.series[e].points.size(); ++i) {
            EXPECT_EQ(loaded.series[e].points[i].timestamp, paths[e].series.points[i].timestamp);
            EXPECT_EQ(loaded.series[e].points[i].price, paths[e].series.points[i].price);
        }
        const auto r = to_intraday_returns(loaded.series[e]);
        EXPECT_EQ(r.days.size(), 4u);
        for (const auto& [d, rets] : r.days) EXPECT_EQ(rets.size(), 287u);
    }
}

TEST(Simulate, ConsistencyTrendAcrossStepDoublings) {
    SimParams p;
    p.days = 400;
    p.seed = 5;
    double prev = 1e9;
    for (int steps : {72, 144, 288, 576}) {
        p.steps_per_day = steps;
        const SimPath path = simulate_path(p);
        double ss = 0.0, mean = 0.0;
        std::vector<double> err;
        for (const auto& d : path.truth.days) err.push_back(daily_measures(d.returns).rv - d.iv);
        for (double e : err) mean += e;
        mean /= err.size();
        for (double e : err) ss += (e - mean) * (e - mean);
        const double var = ss / (err.size() - 1);
        // Theory: var(RV - IV) = 2 sigma^4 / n; allow generous MC noise.
        EXPECT_LT(var, prev * 0.75) << steps;
        prev = var;
    }
}

TEST(Simulate, PositiveJumpGivesPositiveSjv) {
    int positive = 0;
    constexpr int reps = 200;
    for (int r = 0; r < reps; ++r) {
        SimParams p;
        p.sigma = 0.1;
        p.days = 1;
        p.seed = static_cast<std::uint64_t>(r);
        p.forced_jumps = {{0, 10 + r, 1.0}};
        const auto m = daily_measures(simulate_path(p).truth.days[0].returns);
        if (m.sjv > 0.0) ++positive;
    }
    EXPECT_GE(positive, static_cast<int>(0.95 * reps));
}

TEST(Simulate, JsonConfig) {
    const json j = json::parse(R"({"drift":0.01,"sigma":1.5,"jump_intensity":1,"jump_mean":0,"jump_std":0.5,
        "days":10,"seed":3,"regime":{"sigma_low":1,"sigma_high":2,"block_days":5},
        "forced_jumps":[{"day":1,"step":2,"size":3}],"start_date":"2021-06-01","entities":4})");
    const SimParams p = sim_params_from_json(j);
    EXPECT_EQ(p.sigma, 1.5);
    EXPECT_EQ(p.days, 10);
    ASSERT_TRUE(p.regime);
    EXPECT_EQ(p.regime->block_days, 5);
    ASSERT_EQ(p.forced_jumps.size(), 1u);
    EXPECT_EQ(p.start_date, testutil::day(2021, 6, 1));
    const SimParams q = sim_params_from_json(sim_params_to_json(p));
    EXPECT_EQ(sim_params_to_json(q), sim_params_to_json(p));
    EXPECT_THROW(sim_params_from_json(json::parse(R"({"sigmaa":1})")), Error);
}

TEST(ConvergenceReport, NoJumpsSmallSample) {
    SimParams p;
    p.days = 200;
    p.seed = 1;
    const auto r = convergence_report(p, 2);
    EXPECT_EQ(r.days, 400u);
    EXPECT_NEAR(r.iv.mean, 1.0, 1e-12);
    EXPECT_NEAR(r.rv.mean, 1.0, 5 * r.rv.se + 0.01);
    EXPECT_EQ(r.jump_sq.mean, 0.0);
}

TEST(HarPanel, Shape) {
    HarPanelParams hp;
    hp.entities = 3;
    hp.days = 50;
    const auto panel = simulate_har_panel(hp);
    ASSERT_EQ(panel.size(), 3u);
    EXPECT_EQ(panel[0].symbol, "HAR_000");
    EXPECT_EQ(panel[2].days.size(), 50u);
    EXPECT_EQ(panel[0].days[0].date, hp.start_date);
    EXPECT_NE(panel[0].days[10].rv, panel[1].days[10].rv);
    const auto again = simulate_har_panel(hp);
    EXPECT_EQ(again[1].days[30].rv, panel[1].days[30].rv);
}
