// SPDX-License-Identifier: Apache-2.0
//
// The candidate value function of the liquidation problem, its analytic
// partial derivatives, the sale map, and region classification.
//
// Above the barrier (w >= b) the free boundary F0 is constant and the
// selling-region value is the classical three-branch formula. Below the
// barrier the boundary G_lambda(y) moves with inventory, so the partial-
// liquidation value is anchored at the characteristic's landing point on
// the boundary: ln G_lambda(yhat) - gamma yhat = ln x - gamma y. With
// m = ln x - gamma y held fixed by sales, the value there takes the form
// v = Phi(m) + x/gamma - C^s y, which satisfies the gradient constraint
// -gamma x v_x - v_y + x - C^s = 0 identically.
#pragma once

#include "dliq/boundaries.hpp"
#include "dliq/interp.hpp"
#include "dliq/model.hpp"

#include <cmath>
#include <memory>
#include <optional>
#include <vector>

namespace dliq {

/// Relative tolerance used to detect states sitting on a branch edge.
inline constexpr double kEdgeTol = 1e-12;

struct ValueContext {
    ModelParams params;
    BoundarySet bounds;

    // Optional memoized S(y) = G^{n1} B(y) on a y-grid (figures only).
    std::shared_ptr<const PchipCurve> s_cache;

    ValueContext(const ModelParams& p, double quadrature_tol = 1e-10)
        : params(validate(p)), bounds(make_boundary_set(params, quadrature_tol)) {}
};

/// Enables the monotone-cubic cache for S(y) on [0, y_max] and asserts the
/// cache agrees with the exact quadrature to rel_check on a subsample.
inline void enable_s_cache(ValueContext& ctx, double y_max, std::size_t n_nodes = 4096,
                           double rel_check = 1e-8) {
    std::vector<double> ys(n_nodes), ss(n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i) {
        ys[i] = y_max * static_cast<double>(i) / static_cast<double>(n_nodes - 1);
        ss[i] = scaled_b(ys[i], ctx.params, ctx.bounds);
    }
    auto curve = std::make_shared<PchipCurve>(std::move(ys), std::move(ss));
    for (int k = 1; k < 64; ++k) {
        const double y = y_max * (k + 0.37) / 64.5;
        const double exact = scaled_b(y, ctx.params, ctx.bounds);
        const double cached = (*curve)(y);
        if (std::abs(cached - exact) > rel_check * std::max(1e-30, std::abs(exact)))
            throw Error(ErrorCode::QuadratureFailure,
                        "S(y) cache disagrees with exact quadrature beyond tolerance");
    }
    ctx.s_cache = std::move(curve);
}

inline double s_of(const ValueContext& ctx, double y) {
    if (ctx.s_cache && y <= ctx.s_cache->x_max())
        return (*ctx.s_cache)(y);
    return scaled_b(y, ctx.params, ctx.bounds);
}

/// Y(x,z) = (1/gamma) ln(x/z): shares to sell so the price x is impacted
/// down to z. Additive along characteristics.
inline double sale_map(double x, double z, double gamma) {
    if (!(x > 0.0) || !(z > 0.0))
        throw Error(ErrorCode::NonPositivePrice, "sale_map requires positive prices");
    return std::log(x / z) / gamma;
}

inline RegionLabel classify(const State& s, const ValueContext& ctx) {
    check_state(s);
    if (s.y == 0.0)
        return RegionLabel::Liquidated;
    const ModelParams& p = ctx.params;
    const bool above = s.w >= p.barrier; // w = b uses the w >= b branch
    const double lower = above ? ctx.bounds.f0 : g_lambda(s.y, p, ctx.bounds);
    const double upper = lower * std::exp(p.gamma * s.y);
    // On-edge states go to the selling branch.
    if (s.x < lower * (1.0 - kEdgeTol))
        return above ? RegionLabel::WaitAbove : RegionLabel::WaitBelow;
    if (s.x <= upper * (1.0 + kEdgeTol))
        return above ? RegionLabel::Sell2Above : RegionLabel::Sell2Below;
    return above ? RegionLabel::Sell1Above : RegionLabel::Sell1Below;
}

namespace detail {

// Solves phi(yhat) = m for yhat in [0, y], phi(t) = ln G(t) - gamma t
// (strictly decreasing). Bisected to the last representable double so the
// root is a (piecewise-constant-free) smooth function of m under finite
// differencing.
inline double landing_inventory(double m, double y, const ModelParams& p, const BoundarySet& b) {
    double lo = 0.0, hi = y;
    // phi(lo) >= m >= phi(hi) must hold when called.
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi)
            break;
        if (boundary_log_coord(mid, p, b) >= m)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

struct Derivs {
    double v;
    double vx;
    double vxx;
    double vy;
};

// v^(0) branches (w >= b). A and F0 live in BoundarySet.
inline Derivs v_above_eval(double x, double y, const ModelParams& p, const BoundarySet& b) {
    Derivs d{};
    if (y <= 0.0)
        return d; // v(., 0) = 0

    const double f0 = b.f0, n0 = b.n0, A = b.coef_a;
    const double upper = f0 * std::exp(p.gamma * y);
    if (x <= f0) {
        const double E = std::exp(-p.gamma * n0 * y);
        const double xn = std::pow(x, n0);
        d.v = A * xn * (1.0 - E);
        d.vx = A * n0 * xn / x * (1.0 - E);
        d.vxx = A * n0 * (n0 - 1.0) * xn / (x * x) * (1.0 - E);
        d.vy = A * p.gamma * n0 * xn * E;
    } else if (x <= upper) {
        const double E = std::exp(-p.gamma * n0 * y);
        const double xn = std::pow(x, n0);
        const double af0 = A * std::pow(f0, n0); // = C^s/(gamma n0 (n0-1))
        d.v = af0 - A * E * xn + (x - f0) / p.gamma - p.cost_sell / p.gamma * std::log(x / f0);
        d.vx = -A * n0 * E * xn / x + 1.0 / p.gamma - p.cost_sell / (p.gamma * x);
        d.vxx = -A * n0 * (n0 - 1.0) * E * xn / (x * x) + p.cost_sell / (p.gamma * x * x);
        d.vy = A * p.gamma * n0 * E * xn;
    } else {
        const double E = std::exp(-p.gamma * y);
        d.v = x / p.gamma * (1.0 - E) - p.cost_sell * y;
        d.vx = (1.0 - E) / p.gamma;
        d.vxx = 0.0;
        d.vy = x * E - p.cost_sell;
    }
    return d;
}

// v^(lambda) branches (w < b). Branch boundaries: G(y) and e^{gamma y} G(0)
// (the price beyond which even full liquidation cannot reach the boundary).
inline Derivs v_below_eval(double x, double y, const ValueContext& ctx) {
    const ModelParams& p = ctx.params;
    const BoundarySet& b = ctx.bounds;
    if (p.default_rate == 0.0)
        return v_above_eval(x, y, p, b); // degenerate model: regimes coincide
    Derivs d{};
    if (y <= 0.0)
        return d; // v(., 0) = 0
    const double g_y = g_lambda(y, p, b);
    const double kap = b.kappa;
    if (x <= g_y) {
        // x^{n1} B(y) - kappa x y, in the scaled form (x/G)^{n1} S(y).
        const double S = s_of(ctx, y);
        const double P = std::exp(b.n1 * std::log(x / g_y));
        const double T = scaled_b_deriv(S, p, b);
        d.v = P * S - kap * x * y;
        d.vx = b.n1 * P * S / x - kap * y;
        d.vxx = b.n1 * (b.n1 - 1.0) * P * S / (x * x);
        d.vy = P * T - kap * x;
        return d;
    }
    const double m = std::log(x) - p.gamma * y;
    const double phi0 = std::log(g_lambda(0.0, p, b)); // phi(0)
    if (m >= phi0) {
        // Full liquidation: no landing point in (0, y].
        const double E = std::exp(-p.gamma * y);
        d.v = x / p.gamma * (1.0 - E) - p.cost_sell * y;
        d.vx = (1.0 - E) / p.gamma;
        d.vxx = 0.0;
        d.vy = x * E - p.cost_sell;
        return d;
    }
    // Partial liquidation: anchor at the landing point (G(yhat), yhat).
    const double yhat = landing_inventory(m, y, p, b);
    const double G = g_lambda(yhat, p, b);
    const double Gp = g_lambda_deriv(yhat, p, b);
    const double S = s_of(ctx, yhat);
    const double T = scaled_b_deriv(S, p, b);
    const double vi = S - kap * G * yhat; // value at the landing point
    const double W = b.n1 * S / G - kap * yhat - 1.0 / p.gamma; // v_i,x - 1/gamma
    const double phi_prime = G * W;                             // Phi'(m)
    // First-order completion of the rounded root: with v = Phi(m) + x/gamma
    // - C^s y and the formula evaluating Phi at phi(yhat) = m - resid, adding
    // Phi' * resid removes the last-ulp sawtooth of the bisected yhat (which
    // finite differences of v would otherwise amplify).
    const double resid = m - boundary_log_coord(yhat, p, b);
    d.v = vi + (x - G) / p.gamma - p.cost_sell * (y - yhat) + phi_prime * resid;
    d.vx = 1.0 / p.gamma + phi_prime / x;
    d.vy = -p.gamma * phi_prime - p.cost_sell;
    const double Wp = b.n1 * (b.n1 - 1.0) * Gp * S / (G * G) + b.n1 * T / G - kap;
    const double phi_second = (Gp * W + G * Wp) * G / (Gp - p.gamma * G);
    d.vxx = (phi_second - phi_prime) / (x * x);
    return d;
}

inline Derivs value_eval(const State& s, const ValueContext& ctx) {
    check_state(s);
    if (s.w >= ctx.params.barrier)
        return v_above_eval(s.x, s.y, ctx.params, ctx.bounds);
    return v_below_eval(s.x, s.y, ctx);
}

} // namespace detail

inline double v_above(double x, double y, const ValueContext& ctx) {
    return detail::v_above_eval(x, y, ctx.params, ctx.bounds).v;
}

inline double v_below(double x, double y, const ValueContext& ctx) {
    return detail::v_below_eval(x, y, ctx).v;
}

/// v = v^(0) 1_{w>=b} + v^(lambda) 1_{w<b}.
inline double value(const State& s, const ValueContext& ctx) {
    return detail::value_eval(s, ctx).v;
}

struct ValueDerivatives {
    double v;
    double v_x;
    double v_xx;
    double v_y;
};

/// Locations of the kinks of x -> v(x, y, .) in the given regime.
inline std::vector<double> branch_edges(double y, bool above_barrier, const ValueContext& ctx) {
    const ModelParams& p = ctx.params;
    if (above_barrier || p.default_rate == 0.0) {
        const double f0 = ctx.bounds.f0;
        return {f0, f0 * std::exp(p.gamma * y)};
    }
    return {g_lambda(y, p, ctx.bounds),
            g_lambda(0.0, p, ctx.bounds) * std::exp(p.gamma * y)};
}

/// Analytic partials per branch. Throws OnBranchEdge when x sits within
/// kEdgeTol (relative) of a kink; the caller picks a side.
inline ValueDerivatives value_derivatives(const State& s, const ValueContext& ctx) {
    check_state(s);
    const bool above = s.w >= ctx.params.barrier;
    if (s.y > 0.0) {
        for (double e : branch_edges(s.y, above, ctx)) {
            if (std::abs(s.x - e) <= kEdgeTol * std::max(1.0, e))
                throw Error(ErrorCode::OnBranchEdge,
                            "state lies on a branch edge; evaluate one-sided");
        }
    }
    const detail::Derivs d = detail::value_eval(s, ctx);
    return ValueDerivatives{d.v, d.vx, d.vxx, d.vy};
}

} // namespace dliq
