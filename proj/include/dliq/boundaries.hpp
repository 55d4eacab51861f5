// SPDX-License-Identifier: Apache-2.0
//
// Derived analytic structure: the exponents n0/n1, the free boundaries
// F0, G_lambda(y), G_inf(y), and the coefficient B(y) by adaptive
// quadrature. Internally B is handled in the scaled form
// S(y) = G_lambda(y)^{n1} B(y), which stays O(1) for any intensity.
#pragma once

#include "dliq/model.hpp"
#include "dliq/quadrature.hpp"

#include <cmath>

namespace dliq {

/// Positive root of (1/2) sigma^2 l (l-1) + mu l - rhs = 0. Uses the
/// conjugate-product form when the "+" branch would cancel.
inline double solve_exponent(double half_sigma_sq, double mu, double rhs) {
    const double a = half_sigma_sq;       // > 0
    const double b = mu - half_sigma_sq;  // linear coefficient
    const double disc = b * b + 4.0 * a * rhs;
    if (!(disc > 0.0))
        throw Error(ErrorCode::NonPositiveDiscriminant,
                    "exponent equation has no positive root (discriminant <= 0)");
    const double sq = std::sqrt(disc);
    double root;
    if (b <= 0.0) {
        root = (-b + sq) / (2.0 * a);
    } else {
        // l+ * l- = -rhs/a; the "-" root is computed without cancellation.
        const double lminus = (-b - sq) / (2.0 * a);
        root = -rhs / (a * lminus);
    }
    return root;
}

/// Residual of the defining quadratic at l.
inline double exponent_residual(double half_sigma_sq, double mu, double rhs, double l) {
    return half_sigma_sq * l * (l - 1.0) + mu * l - rhs;
}

struct BoundarySet {
    double n0 = 0.0;              // positive root for rhs = delta, > 1
    double n1 = 0.0;              // positive root for rhs = delta + lambda, >= n0
    double f0 = 0.0;              // n0 C^s / (n0 - 1)
    double kappa = 0.0;           // lambda K / (delta + lambda - mu)
    double coef_a = 0.0;          // (1/(gamma n0^2)) ((n0-1)/(n0 C^s))^{n0-1}
    double quadrature_tol = 1e-10;
    int quadrature_max_depth = 60;
    double b_scale = 1.0;         // test hook: scales B(y); 1.0 in normal use
    // When set, S(y) uses composite Simpson with this many fixed panels
    // instead of the adaptive rule. The fixed rule's error varies smoothly
    // with y, which finite-difference probes across branch edges need;
    // 0 keeps the adaptive default.
    int fixed_panels = 0;
};

inline BoundarySet make_boundary_set(const ModelParams& p, double quadrature_tol = 1e-10) {
    BoundarySet b;
    const double hs = 0.5 * p.sigma * p.sigma;
    b.n0 = solve_exponent(hs, p.mu, p.delta);
    b.n1 = solve_exponent(hs, p.mu, p.delta + p.default_rate);
    b.f0 = b.n0 * p.cost_sell / (b.n0 - 1.0);
    b.kappa = p.default_rate * p.default_penalty / (p.delta + p.default_rate - p.mu);
    b.coef_a = 1.0 / (p.gamma * b.n0 * b.n0) *
               std::pow((b.n0 - 1.0) / (b.n0 * p.cost_sell), b.n0 - 1.0);
    b.quadrature_tol = quadrature_tol;
    return b;
}

/// G_lambda(y) = n1 C^s / ((n1-1)(1 + kappa(gamma y + 1))). Strictly
/// decreasing in y for lambda > 0; identically F0 at lambda = 0.
inline double g_lambda(double y, const ModelParams& p, const BoundarySet& b) {
    return b.n1 * p.cost_sell / ((b.n1 - 1.0) * (1.0 + b.kappa * (p.gamma * y + 1.0)));
}

/// Closed form of G_lambda'(y) (relation ser_G):
/// G' = G^2 (n1-1)/(n1 C^s) * (lambda K/(mu-delta-lambda)) * gamma = -gamma kappa G^2 (n1-1)/(n1 C^s).
inline double g_lambda_deriv(double y, const ModelParams& p, const BoundarySet& b) {
    const double g = g_lambda(y, p, b);
    return -p.gamma * b.kappa * g * g * (b.n1 - 1.0) / (b.n1 * p.cost_sell);
}

/// Large-intensity limit boundary G_inf(y) = C^s / (1 + K(gamma y + 1)).
inline double g_infinity(double y, const ModelParams& p) {
    return p.cost_sell / (1.0 + p.default_penalty * (p.gamma * y + 1.0));
}

/// phi(t) = ln G_lambda(t) - gamma t; strictly decreasing. Characteristic
/// coordinate of the boundary curve: a sale moves (ln x - gamma y) nowhere.
inline double boundary_log_coord(double t, const ModelParams& p, const BoundarySet& b) {
    return std::log(g_lambda(t, p, b)) - p.gamma * t;
}

/// S(y) = G_lambda(y)^{n1} B(y) =
///   (C^s/(n1-1)) \int_0^y exp(n1 (phi(y) - phi(u))) du,
/// with phi as above. The integrand lies in (0, 1], so S is well scaled
/// for any lambda. Honors the b_scale test hook.
inline double scaled_b(double y, const ModelParams& p, const BoundarySet& b) {
    if (y <= 0.0)
        return 0.0;
    const double phiy = boundary_log_coord(y, p, b);
    auto integrand = [&](double u) { return std::exp(b.n1 * (phiy - boundary_log_coord(u, p, b))); };
    double integral;
    if (b.fixed_panels > 0) {
        const int n = b.fixed_panels;
        const double h = y / (2 * n);
        double odd = 0.0, even = 0.0;
        for (int i = 1; i < 2 * n; i += 2)
            odd += integrand(i * h);
        for (int i = 2; i < 2 * n; i += 2)
            even += integrand(i * h);
        integral = h / 3.0 * (integrand(0.0) + 4.0 * odd + 2.0 * even + integrand(y));
    } else {
        integral = integrate_adaptive_simpson(integrand, 0.0, y, b.quadrature_tol,
                                              b.quadrature_max_depth);
    }
    return b.b_scale * p.cost_sell / (b.n1 - 1.0) * integral;
}

/// B(y) per eq10.1, computed as S(y) / G_lambda(y)^{n1}. B(0) = 0 and
/// B(y) > 0 for y > 0.
inline double b_coeff(double y, const ModelParams& p, const BoundarySet& b) {
    if (y <= 0.0)
        return 0.0;
    const double g = g_lambda(y, p, b);
    return scaled_b(y, p, b) * std::exp(-b.n1 * std::log(g));
}

/// T(y) = G_lambda(y)^{n1} B'(y), from B' = -gamma n1 B + C^s/((n1-1) G^{n1}).
/// The inhomogeneous term is exact and deliberately not touched by b_scale.
inline double scaled_b_deriv(double s_value, const ModelParams& p, const BoundarySet& b) {
    return -p.gamma * b.n1 * s_value + p.cost_sell / (b.n1 - 1.0);
}

} // namespace dliq
