// SPDX-License-Identifier: Apache-2.0
//
// Datasets behind the four numerical-experiment figures, emitted as CSV.
// Every number is a direct value-function / boundary evaluation; the only
// extra machinery here is the S(y) interpolation cache for the lambda
// sweep and the static sell-then-default optimizer behind v_inf.
#pragma once

#include "dliq/hjb.hpp"
#include "dliq/value.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

namespace dliq {

/// 400 log-spaced prices on [0.01, 10].
inline std::vector<double> default_x_grid(int n = 400, double x_min = 0.01, double x_max = 10.0) {
    std::vector<double> xs(n);
    for (int i = 0; i < n; ++i)
        xs[i] = x_min * std::exp(std::log(x_max / x_min) * i / static_cast<double>(n - 1));
    return xs;
}

/// Fifty inventory levels evenly spaced on [0.1, 7].
inline std::vector<double> default_y_grid(int n = 50, double y_min = 0.1, double y_max = 7.0) {
    std::vector<double> ys(n);
    for (int i = 0; i < n; ++i)
        ys[i] = y_min + (y_max - y_min) * i / static_cast<double>(n - 1);
    return ys;
}

/// lambda = 2^{-N}, N in [-20, 8] with step 0.5 (the boundary-sweep set).
inline std::vector<double> f3_lambda_sweep() {
    std::vector<double> ls;
    for (double n = -20.0; n <= 8.0 + 1e-9; n += 0.5)
        ls.push_back(std::exp2(-n));
    return ls;
}

/// lambda = 2^{N}, N in [-20, 8] with step 0.5 (the value-sweep set).
inline std::vector<double> f4_lambda_sweep() {
    std::vector<double> ls;
    for (double n = -20.0; n <= 8.0 + 1e-9; n += 0.5)
        ls.push_back(std::exp2(n));
    return ls;
}

/// Static sell-then-default value
///   v_inf(x,y) = sup_{d in [0,y]} (x/gamma)(1-e^{-gamma d}) - C^s d
///                 - K x e^{-gamma d}(y - d).
/// The first-order condition is x e^{-gamma d} = G_inf(y - d); the
/// optimizer is found by bisection on the monotone FOC.
inline double v_infinity(double x, double y, const ModelParams& p) {
    if (y <= 0.0)
        return 0.0;
    const double K = p.default_penalty;
    auto objective = [&](double d) {
        const double e = std::exp(-p.gamma * d);
        return x / p.gamma * (1.0 - e) - p.cost_sell * d - K * x * e * (y - d);
    };
    // FOC derivative g(d) = x e^{-gamma d} (1 + K(gamma(y-d)+1)) - C^s, decreasing.
    auto foc = [&](double d) {
        return x * std::exp(-p.gamma * d) * (1.0 + K * (p.gamma * (y - d) + 1.0)) - p.cost_sell;
    };
    if (foc(0.0) <= 0.0)
        return objective(0.0); // no sale: -K x y
    if (foc(y) >= 0.0)
        return objective(y); // full sale
    double lo = 0.0, hi = y;
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (foc(mid) >= 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return objective(0.5 * (lo + hi));
}

struct CurveRow {
    double y, x, v;
};
struct MarkerRow {
    double y, x_marker, v_marker;
    const char* kind; // "circle" (lower boundary) or "triangle" (upper)
};
struct F1Dataset {
    std::vector<CurveRow> curves;
    std::vector<MarkerRow> markers;
};

/// Figure 1: x -> v^(0)(x, y) for each y, with boundary markers at F0 and
/// F0 e^{gamma y}.
inline F1Dataset dataset_f1(const ValueContext& ctx, const std::vector<double>& xs,
                            const std::vector<double>& ys) {
    F1Dataset out;
    out.curves.reserve(xs.size() * ys.size());
    for (double y : ys) {
        for (double x : xs)
            out.curves.push_back({y, x, v_above(x, y, ctx)});
        const double f0 = ctx.bounds.f0;
        const double xu = f0 * std::exp(ctx.params.gamma * y);
        out.markers.push_back({y, f0, v_above(f0, y, ctx), "circle"});
        out.markers.push_back({y, xu, v_above(xu, y, ctx), "triangle"});
    }
    return out;
}

/// Figure 2: same as f1 for v^(lambda), markers at G_lambda(y) and
/// e^{gamma y} G_lambda(y).
inline F1Dataset dataset_f2(const ValueContext& ctx, const std::vector<double>& xs,
                            const std::vector<double>& ys) {
    F1Dataset out;
    out.curves.reserve(xs.size() * ys.size());
    for (double y : ys) {
        for (double x : xs)
            out.curves.push_back({y, x, v_below(x, y, ctx)});
        const double g = g_lambda(y, ctx.params, ctx.bounds);
        const double xu = g * std::exp(ctx.params.gamma * y);
        out.markers.push_back({y, g, v_below(g, y, ctx), "circle"});
        out.markers.push_back({y, xu, v_below(xu, y, ctx), "triangle"});
    }
    return out;
}

struct F3Row {
    double lambda; // 0 encodes the F0 line, +inf the G_inf limit curve
    double y;
    double x_lower; // G_lambda(y)  (or F0 / G_inf(y))
    double x_upper; // e^{gamma y} x_lower's curve mate
};

/// Figure 3: waiting/full-liquidation boundary pairs across the lambda
/// sweep, plus the F0 and G_inf limit rows.
inline std::vector<F3Row> dataset_f3(const ModelParams& params, const std::vector<double>& ys,
                                     const std::vector<double>& lambdas) {
    std::vector<F3Row> rows;
    rows.reserve((lambdas.size() + 2) * ys.size());
    for (double lam : lambdas) {
        ModelParams p = params;
        p.default_rate = lam;
        const ValueContext ctx(p);
        for (double y : ys) {
            const double g = g_lambda(y, p, ctx.bounds);
            rows.push_back({lam, y, g, g * std::exp(p.gamma * y)});
        }
    }
    const ValueContext ctx0(params);
    for (double y : ys) {
        const double f0 = ctx0.bounds.f0;
        rows.push_back({0.0, y, f0, f0 * std::exp(params.gamma * y)});
    }
    for (double y : ys) {
        const double gi = g_infinity(y, params);
        rows.push_back({std::numeric_limits<double>::infinity(), y, gi,
                        gi * std::exp(params.gamma * y)});
    }
    return rows;
}

struct F4Row {
    double lambda; // 0 for the v^(0) curve, +inf for v_inf
    double x;
    double v;
    const char* kind;
};

/// Figure 4: x -> v^(0), v^(lambda) per sweep lambda, and v_inf, all at
/// y = 1.5, with the moving and fixed boundary markers.
inline std::vector<F4Row> dataset_f4(const ModelParams& params, const std::vector<double>& xs,
                                     double y, const std::vector<double>& lambdas) {
    std::vector<F4Row> rows;
    const ValueContext ctx0(params);
    for (double x : xs)
        rows.push_back({0.0, x, v_above(x, y, ctx0), "v0"});
    const double inf = std::numeric_limits<double>::infinity();
    for (double x : xs)
        rows.push_back({inf, x, v_infinity(x, y, params), "vinf"});
    for (double lam : lambdas) {
        ModelParams p = params;
        p.default_rate = lam;
        ValueContext ctx(p);
        enable_s_cache(ctx, y); // lambda sweep: memoized S with exactness check
        for (double x : xs)
            rows.push_back({lam, x, v_below(x, y, ctx), "vlambda"});
        const double g = g_lambda(y, p, ctx.bounds);
        const double xu = g * std::exp(p.gamma * y);
        rows.push_back({lam, g, v_below(g, y, ctx), "marker_circle"});
        rows.push_back({lam, xu, v_below(xu, y, ctx), "marker_triangle"});
    }
    const double f0 = ctx0.bounds.f0;
    rows.push_back({0.0, f0, v_above(f0, y, ctx0), "marker_circle_0"});
    rows.push_back({0.0, f0 * std::exp(params.gamma * y),
                    v_above(f0 * std::exp(params.gamma * y), y, ctx0), "marker_triangle_0"});
    const double gi = g_infinity(y, params);
    rows.push_back({inf, gi, v_infinity(gi, y, params), "marker_circle_inf"});
    rows.push_back({inf, gi * std::exp(params.gamma * y),
                    v_infinity(gi * std::exp(params.gamma * y), y, params),
                    "marker_triangle_inf"});
    return rows;
}

// --- CSV emission (one-line header, 17 significant digits) ---

inline void write_f1_csv(const F1Dataset& d, const std::string& curves_path,
                         const std::string& markers_path) {
    using detail::fmt17;
    std::ofstream c(curves_path);
    if (!c)
        throw Error(ErrorCode::ConfigError, "cannot open " + curves_path);
    c << "y,x,v\n";
    for (const auto& r : d.curves)
        c << fmt17(r.y) << ',' << fmt17(r.x) << ',' << fmt17(r.v) << '\n';
    std::ofstream m(markers_path);
    if (!m)
        throw Error(ErrorCode::ConfigError, "cannot open " + markers_path);
    m << "y,x_marker,v_marker,kind\n";
    for (const auto& r : d.markers)
        m << fmt17(r.y) << ',' << fmt17(r.x_marker) << ',' << fmt17(r.v_marker) << ',' << r.kind
          << '\n';
}

inline void write_f3_csv(const std::vector<F3Row>& rows, const std::string& path) {
    using detail::fmt17;
    std::ofstream f(path);
    if (!f)
        throw Error(ErrorCode::ConfigError, "cannot open " + path);
    f << "lambda,y,x_lower,x_upper\n";
    for (const auto& r : rows)
        f << fmt17(r.lambda) << ',' << fmt17(r.y) << ',' << fmt17(r.x_lower) << ','
          << fmt17(r.x_upper) << '\n';
}

inline void write_f4_csv(const std::vector<F4Row>& rows, const std::string& path) {
    using detail::fmt17;
    std::ofstream f(path);
    if (!f)
        throw Error(ErrorCode::ConfigError, "cannot open " + path);
    f << "lambda,x,v,kind\n";
    for (const auto& r : rows)
        f << fmt17(r.lambda) << ',' << fmt17(r.x) << ',' << fmt17(r.v) << ',' << r.kind << '\n';
}

} // namespace dliq
