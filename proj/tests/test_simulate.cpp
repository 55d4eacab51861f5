// SPDX-License-Identifier: Apache-2.0
#include "dliq/simulate.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace dliq;

namespace {
const ModelParams kPaper{};
}

TEST_CASE("exact diffusion step") {
    SECTION("degenerate coefficients freeze the price") {
        SplitMix64 rng(1);
        double x = 2.0, w = 0.0;
        for (int i = 0; i < 100; ++i) {
            const StepResult r = step_exact(x, w, 1e-2, 0.0, 0.0, 0.0, rng);
            CHECK(r.x == Catch::Approx(2.0));
            x = r.x;
            w = r.w;
        }
        CHECK(w != 0.0); // the index still diffuses
    }
    SECTION("rho = 1 ties the drivers pathwise") {
        SplitMix64 rng(2);
        double w = 0.0;
        for (int i = 0; i < 50; ++i) {
            const StepResult r = step_exact(1.0, w, 1e-2, 0.1, 0.3, 1.0, rng);
            CHECK(r.b_increment == Catch::Approx(r.w - w).margin(1e-15));
            w = r.w;
        }
    }
    SECTION("terminal moment matches the log-normal mean") {
        const double T = 1.0;
        double sum = 0.0, sumsq = 0.0;
        const int n = 100000;
        for (int i = 0; i < n; ++i) {
            SplitMix64 rng = SplitMix64::substream(123, i);
            const StepResult r = step_exact(1.0, 0.0, T, kPaper.mu, kPaper.sigma, 0.0, rng);
            sum += r.x;
            sumsq += r.x * r.x;
        }
        const double mean = sum / n;
        const double se = std::sqrt((sumsq - n * mean * mean) / (n - 1.0) / n);
        CHECK(std::abs(mean - std::exp(kPaper.mu * T)) <= 3.0 * se);
    }
}

TEST_CASE("sale gain") {
    CHECK(sale_gain(3.0, 0.0, 0.5, 0.3) == 0.0);
    CHECK(sale_gain(10.0, 1.0, 0.5, 0.3) ==
          Catch::Approx(20.0 * (1.0 - std::exp(-0.5)) - 0.3).margin(1e-12));
    CHECK_THROWS_AS(sale_gain(1.0, -0.1, 0.5, 0.3), Error);
    SECTION("impact strictly reduces proceeds") {
        SplitMix64 rng(3);
        for (int i = 0; i < 100; ++i) {
            const double x = 0.1 + 10.0 * rng.next_uniform();
            const double d = 0.01 + 3.0 * rng.next_uniform();
            REQUIRE(sale_gain(x, d, 0.5, 0.0) < x * d);
        }
    }
}

TEST_CASE("optimal action") {
    const ValueContext ctx(kPaper);
    CHECK(optimal_action(State{0.5, 1.0, 1.0}, ctx) == 0.0);  // WaitAbove
    CHECK(optimal_action(State{0.2, 1.0, -1.0}, ctx) == 0.0); // WaitBelow
    CHECK(optimal_action(State{1.5, 1.0, 1.0}, ctx) ==
          Catch::Approx(0.6362).margin(1e-3)); // partial sale to F0
    CHECK(optimal_action(State{10.0, 1.0, 1.0}, ctx) == 1.0);  // sell everything
    CHECK(optimal_action(State{10.0, 1.0, -1.0}, ctx) == 1.0); // sell everything

    SECTION("below-barrier partial sale lands on the boundary") {
        for (double y : {1.0, 3.0}) {
            for (double frac : {0.2, 0.6, 0.9}) {
                const auto e = branch_edges(y, false, ctx);
                const double x = e[0] * std::exp(frac * std::log(e[1] / e[0]));
                const double d = optimal_action(State{x, y, -1.0}, ctx);
                REQUIRE(d > 0.0);
                REQUIRE(d < y);
                const double landed = x * std::exp(-kPaper.gamma * d);
                REQUIRE(landed ==
                        Catch::Approx(g_lambda(y - d, kPaper, ctx.bounds)).epsilon(1e-9));
            }
        }
    }
    SECTION("post-action state sits in the waiting-region closure") {
        SplitMix64 rng(17);
        for (int i = 0; i < 60; ++i) {
            const double x = 0.05 + 5.0 * rng.next_uniform();
            const double y = 0.2 + 5.0 * rng.next_uniform();
            const double w = rng.next_uniform() < 0.5 ? 1.0 : -1.0;
            const double d = optimal_action(State{x, y, w}, ctx);
            const double x2 = x * std::exp(-kPaper.gamma * d);
            const double y2 = y - d;
            if (y2 <= 1e-12)
                continue; // liquidated
            const RegionLabel r = classify(State{x2, y2, w}, ctx);
            const bool waiting = r == RegionLabel::WaitAbove || r == RegionLabel::WaitBelow;
            const double lower =
                w >= kPaper.barrier ? ctx.bounds.f0 : g_lambda(y2, kPaper, ctx.bounds);
            REQUIRE((waiting || std::abs(x2 - lower) <= 1e-9 * lower));
        }
    }
}

TEST_CASE("single paths") {
    const ValueContext ctx(kPaper);
    SECTION("zero intensity never defaults under the sampled estimator") {
        ModelParams p = kPaper;
        p.default_rate = 0.0;
        const ValueContext c0(p);
        SimConfig cfg;
        cfg.dt = 1e-2;
        cfg.t_max = 5.0;
        cfg.estimator = Estimator::SampledDefault;
        for (int i = 0; i < 50; ++i) {
            SplitMix64 rng = SplitMix64::substream(4, i);
            const PathRecord r = run_path(State{0.5, 1.0, -1.0}, c0, cfg, rng);
            REQUIRE_FALSE(r.defaulted);
        }
    }
    SECTION("immediate liquidation is the closed form, pathwise") {
        SimConfig cfg;
        cfg.policy = Policy::immediate();
        const double expect = sale_gain(1.5, 2.0, kPaper.gamma, kPaper.cost_sell);
        for (int i = 0; i < 10; ++i) {
            SplitMix64 rng = SplitMix64::substream(5, i);
            const PathRecord r = run_path(State{1.5, 2.0, 0.5}, ctx, cfg, rng);
            REQUIRE(r.discounted_gain == expect);
            REQUIRE(r.final_inventory == 0.0);
            REQUIRE(r.shares_sold_total == 2.0);
        }
    }
    SECTION("sold plus held equals the initial inventory") {
        SimConfig cfg;
        cfg.dt = 1e-2;
        cfg.t_max = 3.0;
        cfg.estimator = Estimator::SampledDefault;
        for (int i = 0; i < 30; ++i) {
            SplitMix64 rng = SplitMix64::substream(6, i);
            const PathRecord r = run_path(State{0.4, 2.0, -0.5}, ctx, cfg, rng);
            REQUIRE(r.shares_sold_total + r.final_inventory == Catch::Approx(2.0).margin(1e-12));
        }
    }
}

TEST_CASE("estimates") {
    const ValueContext ctx(kPaper);
    SECTION("deterministic given seed and config, independent of threads") {
        SimConfig cfg;
        cfg.n_paths = 4000;
        cfg.dt = 5e-3;
        cfg.t_max = 8.0;
        cfg.seed = 31;
        cfg.threads = 1;
        const McEstimate a = estimate(State{1.5, 1.5, 1.0}, ctx, cfg);
        cfg.threads = 2;
        const McEstimate b = estimate(State{1.5, 1.5, 1.0}, ctx, cfg);
        CHECK(a.mean == b.mean);
        CHECK(a.std_error == b.std_error);
    }
    SECTION("immediate liquidation has zero standard error") {
        SimConfig cfg;
        cfg.n_paths = 500;
        cfg.policy = Policy::immediate();
        const McEstimate e = estimate(State{1.5, 1.5, 1.0}, ctx, cfg);
        CHECK(e.std_error == 0.0);
        CHECK(e.mean ==
              Catch::Approx(sale_gain(1.5, 1.5, kPaper.gamma, kPaper.cost_sell)).margin(1e-13));
    }
    SECTION("optimal beats the comparison policies") {
        SimConfig cfg;
        cfg.n_paths = 4000;
        cfg.dt = 5e-3;
        cfg.t_max = 8.0;
        cfg.seed = 32;
        cfg.threads = 2;
        const McEstimate opt = estimate(State{1.5, 1.5, 1.0}, ctx, cfg);
        SimConfig imm = cfg;
        imm.policy = Policy::immediate();
        const McEstimate ei = estimate(State{1.5, 1.5, 1.0}, ctx, imm);
        SimConfig sat = cfg;
        sat.policy = Policy::sell_at(1.0);
        const McEstimate es = estimate(State{1.5, 1.5, 1.0}, ctx, sat);
        const double se_i = std::hypot(opt.std_error, ei.std_error);
        const double se_s = std::hypot(opt.std_error, es.std_error);
        CHECK(ei.mean <= opt.mean + 3.0 * se_i);
        CHECK(es.mean <= opt.mean + 3.0 * se_s);
    }
    SECTION("hold stays below the analytic value") {
        SimConfig cfg;
        cfg.n_paths = 2000;
        cfg.dt = 5e-3;
        cfg.t_max = 8.0;
        cfg.policy = Policy::hold();
        const State s{0.4, 2.0, -1.0};
        const McEstimate e = estimate(s, ctx, cfg);
        CHECK(e.mean <= value(s, ctx) + 3.0 * e.std_error);
    }
    SECTION("the two estimators agree away from the barrier") {
        // a barrier far below makes the hazard vanish along every path
        ModelParams p = kPaper;
        p.barrier = -1e6;
        const ValueContext cfar(p);
        SimConfig cfg;
        cfg.n_paths = 4000;
        cfg.dt = 5e-3;
        cfg.t_max = 8.0;
        cfg.seed = 33;
        const McEstimate ew = estimate(State{1.5, 1.5, 0.0}, cfar, cfg);
        SimConfig cs = cfg;
        cs.estimator = Estimator::SampledDefault;
        const McEstimate es = estimate(State{1.5, 1.5, 0.0}, cfar, cs);
        const double se = std::hypot(ew.std_error, es.std_error);
        CHECK(std::abs(ew.mean - es.mean) <= 3.0 * se);
        for (int i = 0; i < 20; ++i) {
            SplitMix64 rng = SplitMix64::substream(cs.seed, i);
            REQUIRE_FALSE(run_path(State{1.5, 1.5, 0.0}, cfar, cs, rng).defaulted);
        }
    }
}
