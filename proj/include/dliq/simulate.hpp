// SPDX-License-Identifier: Apache-2.0
//
// Monte-Carlo simulation of the controlled system under the barrier-
// tracking liquidation policy and comparison policies. Two estimators of
// the same payoff: SurvivalWeighted integrates against the survival weight
// e^{-h(t)} (conditional Monte Carlo, never samples the default time);
// SampledDefault draws tau via an Exp(1) threshold on the accumulated
// intensity integral.
#pragma once

#include "dliq/rng.hpp"
#include "dliq/value.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <thread>
#include <vector>

namespace dliq {

enum class Estimator { SurvivalWeighted, SampledDefault };

struct Policy {
    enum class Kind { Optimal, ImmediateLiquidation, SellAtTime, Hold };
    Kind kind = Kind::Optimal;
    double t0 = 1.0; // SellAtTime only

    static Policy optimal() { return {Kind::Optimal, 0.0}; }
    static Policy immediate() { return {Kind::ImmediateLiquidation, 0.0}; }
    static Policy sell_at(double t) { return {Kind::SellAtTime, t}; }
    static Policy hold() { return {Kind::Hold, 0.0}; }
};

inline const char* to_string(Policy::Kind k) {
    switch (k) {
    case Policy::Kind::Optimal: return "optimal";
    case Policy::Kind::ImmediateLiquidation: return "immediate";
    case Policy::Kind::SellAtTime: return "sell-at";
    case Policy::Kind::Hold: return "hold";
    }
    return "?";
}

inline const char* to_string(Estimator e) {
    return e == Estimator::SurvivalWeighted ? "survival" : "sampled";
}

struct SimConfig {
    double dt = 1e-3;
    double t_max = 15.0;
    std::int64_t n_paths = 10000;
    std::uint64_t seed = 1;
    Estimator estimator = Estimator::SurvivalWeighted;
    Policy policy = Policy::optimal();
    int threads = 0; // 0 = hardware concurrency
};

inline void validate_sim(const SimConfig& c) {
    if (!(c.dt > 0.0))
        throw Error(ErrorCode::ConfigError, "dt must be > 0");
    if (!(c.t_max >= c.dt))
        throw Error(ErrorCode::ConfigError, "t_max must be >= dt");
    if (c.n_paths < 1)
        throw Error(ErrorCode::ConfigError, "n_paths must be >= 1");
}

struct PathRecord {
    double discounted_gain = 0.0;
    bool defaulted = false;
    double default_time = std::numeric_limits<double>::quiet_NaN();
    double final_inventory = 0.0;
    double shares_sold_total = 0.0;
};

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::int64_t n_paths = 0;
    double dt = 0.0;
    double t_max = 0.0;
    Estimator estimator = Estimator::SurvivalWeighted;
    Policy policy = Policy::optimal();
};

/// One exact log-normal diffusion step for (X, W^1) with correlated
/// drivers: W^1 += sqrt(dt) Z1, B-increment = sqrt(dt)(rho Z1 +
/// sqrt(1-rho^2) Z2), X *= exp((mu - sigma^2/2) dt + sigma dB).
struct StepResult {
    double x;
    double w;
    double b_increment;
};

inline StepResult step_exact(double x, double w, double dt, double mu, double sigma, double rho,
                             SplitMix64& rng) {
    double z1, z2;
    rng.next_normal_pair(z1, z2);
    const double sq = std::sqrt(dt);
    const double db = sq * (rho * z1 + std::sqrt(1.0 - rho * rho) * z2);
    StepResult r;
    r.w = w + sq * z1;
    r.x = x * std::exp((mu - 0.5 * sigma * sigma) * dt + sigma * db);
    r.b_increment = db;
    return r;
}

/// Block-sale gain (x/gamma)(1 - e^{-gamma delta}) - C^s delta. The
/// post-sale price is x e^{-gamma delta}.
inline double sale_gain(double x, double delta, double gamma, double cost_sell) {
    if (delta < 0.0)
        throw Error(ErrorCode::NegativeSale, "sale size must be >= 0");
    return x / gamma * (1.0 - std::exp(-gamma * delta)) - cost_sell * delta;
}

/// Shares the barrier-tracking policy sells now: zero in the waiting
/// regions, otherwise the unique root of x e^{-gamma d} = boundary(y - d)
/// (bisection to 1e-12), capped at y when no root exists in [0, y].
inline double optimal_action(const State& s, const ValueContext& ctx) {
    check_state(s);
    if (s.y <= 0.0)
        return 0.0;
    const ModelParams& p = ctx.params;
    const bool above = s.w >= p.barrier || p.default_rate == 0.0;
    if (above) {
        if (s.x <= ctx.bounds.f0)
            return 0.0;
        return std::min(s.y, sale_map(s.x, ctx.bounds.f0, p.gamma));
    }
    const double gy = g_lambda(s.y, p, ctx.bounds);
    if (s.x <= gy)
        return 0.0;
    const double g0 = g_lambda(0.0, p, ctx.bounds);
    if (s.x * std::exp(-p.gamma * s.y) >= g0)
        return s.y; // even full liquidation stays at or above the boundary
    // Root of f(d) = ln x - gamma d - ln G(y - d); f(0) > 0 > f(y).
    double lo = 0.0;
    double hi = std::min(s.y, sale_map(s.x, gy, p.gamma));
    const double lx = std::log(s.x);
    auto f = [&](double d) {
        return lx - p.gamma * d - std::log(g_lambda(s.y - d, p, ctx.bounds));
    };
    if (!(f(lo) >= 0.0))
        throw Error(ErrorCode::RootBracketFailure, "sale projection lost its bracket");
    if (f(hi) > 0.0)
        hi = s.y; // defensive; the cap above should make hi valid
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) >= 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

/// Simulates one path: at each step apply the policy action, accrue the
/// running penalty / hazard with the left-endpoint rule, then diffuse.
inline PathRecord run_path(const State& initial, const ValueContext& ctx, const SimConfig& cfg,
                           SplitMix64& rng) {
    const ModelParams& p = ctx.params;
    const double lambda = p.default_rate;
    const double K = p.default_penalty;
    const std::int64_t n_steps = static_cast<std::int64_t>(std::llround(cfg.t_max / cfg.dt));
    const bool sampled = cfg.estimator == Estimator::SampledDefault;
    const double exp_threshold = sampled ? rng.next_exponential() : 0.0;

    double x = initial.x, y = initial.y, w = initial.w;
    const double y0 = y;
    double gain = 0.0;
    double hazard = 0.0; // lambda * int_0^t 1_{w<b} ds
    PathRecord rec;

    for (std::int64_t k = 0; k < n_steps && y > 0.0; ++k) {
        const double t = static_cast<double>(k) * cfg.dt;
        const double weight = sampled ? std::exp(-p.delta * t) : std::exp(-p.delta * t - hazard);

        double action = 0.0;
        switch (cfg.policy.kind) {
        case Policy::Kind::Optimal:
            action = optimal_action(State{x, y, w}, ctx);
            break;
        case Policy::Kind::ImmediateLiquidation:
            action = (k == 0) ? y : 0.0;
            break;
        case Policy::Kind::SellAtTime:
            action = (t >= cfg.policy.t0) ? y : 0.0;
            break;
        case Policy::Kind::Hold:
            action = 0.0;
            break;
        }
        if (action > 0.0) {
            gain += weight * sale_gain(x, action, p.gamma, p.cost_sell);
            x *= std::exp(-p.gamma * action);
            y = (action >= y) ? 0.0 : y - action;
        }

        const bool below = w < p.barrier;
        if (!sampled && below && y > 0.0)
            gain -= weight * lambda * K * x * y * cfg.dt;
        if (below)
            hazard += lambda * cfg.dt;
        if (y <= 0.0)
            break;

        const StepResult st = step_exact(x, w, cfg.dt, p.mu, p.sigma, p.rho, rng);
        x = st.x;
        w = st.w;

        if (sampled && hazard > exp_threshold) {
            const double tau = static_cast<double>(k + 1) * cfg.dt;
            gain -= std::exp(-p.delta * tau) * K * x * y;
            rec.defaulted = true;
            rec.default_time = tau;
            break;
        }
    }

    rec.discounted_gain = gain;
    rec.final_inventory = y; // held at the end (wiped out at default, but not sold)
    rec.shares_sold_total = y0 - y;
    return rec;
}

/// Mean and standard error over n_paths independent paths. Path i uses
/// substream (seed, i); partial sums are accumulated per fixed-size block
/// and combined in block order, so the estimate is bit-reproducible for a
/// given config independent of the thread count.
inline McEstimate estimate(const State& initial, const ValueContext& ctx, const SimConfig& cfg) {
    validate_sim(cfg);
    check_state(initial);
    const std::int64_t n = cfg.n_paths;
    constexpr std::int64_t kBlock = 1024;
    const std::int64_t n_blocks = (n + kBlock - 1) / kBlock;
    std::vector<double> block_sum(n_blocks, 0.0), block_sumsq(n_blocks, 0.0);

    unsigned hw = std::thread::hardware_concurrency();
    int n_threads = cfg.threads > 0 ? cfg.threads : (hw ? static_cast<int>(hw) : 1);
    n_threads = static_cast<int>(std::min<std::int64_t>(n_threads, n_blocks));

    std::atomic<std::int64_t> next_block{0};
    auto worker = [&]() {
        for (;;) {
            const std::int64_t blk = next_block.fetch_add(1);
            if (blk >= n_blocks)
                return;
            const std::int64_t lo = blk * kBlock;
            const std::int64_t hi = std::min(n, lo + kBlock);
            double s = 0.0, sq = 0.0;
            for (std::int64_t i = lo; i < hi; ++i) {
                SplitMix64 rng = SplitMix64::substream(cfg.seed, static_cast<std::uint64_t>(i));
                const PathRecord r = run_path(initial, ctx, cfg, rng);
                s += r.discounted_gain;
                sq += r.discounted_gain * r.discounted_gain;
            }
            block_sum[blk] = s;
            block_sumsq[blk] = sq;
        }
    };
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (int t = 0; t < n_threads; ++t)
            pool.emplace_back(worker);
        for (auto& th : pool)
            th.join();
    }

    // Pairwise combination in block order (deterministic).
    std::vector<double> sums = block_sum, sqs = block_sumsq;
    while (sums.size() > 1) {
        std::size_t half = (sums.size() + 1) / 2;
        for (std::size_t i = 0; i + half < sums.size(); ++i) {
            sums[i] += sums[i + half];
            sqs[i] += sqs[i + half];
        }
        sums.resize(half);
        sqs.resize(half);
    }

    McEstimate est;
    est.n_paths = n;
    est.dt = cfg.dt;
    est.t_max = cfg.t_max;
    est.estimator = cfg.estimator;
    est.policy = cfg.policy;
    est.mean = sums[0] / static_cast<double>(n);
    if (n > 1) {
        const double var =
            std::max(0.0, (sqs[0] - static_cast<double>(n) * est.mean * est.mean) /
                              static_cast<double>(n - 1));
        est.std_error = std::sqrt(var / static_cast<double>(n));
    }
    return est;
}

} // namespace dliq
