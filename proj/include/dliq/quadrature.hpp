// SPDX-License-Identifier: Apache-2.0
//
// Adaptive Simpson quadrature with a relative-tolerance stopping rule.
#pragma once

#include "dliq/model.hpp"

#include <cmath>
#include <string>

namespace dliq {

namespace detail {

template <typename F>
double simpson_rec(const F& f, double a, double b, double fa, double fm, double fb, double whole,
                   double tol_abs, int depth, int max_depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double err = left + right - whole;
    if (std::abs(err) <= 15.0 * tol_abs)
        return left + right + err / 15.0;
    if (depth >= max_depth)
        throw Error(ErrorCode::QuadratureFailure,
                    "adaptive Simpson: tolerance not met at max depth " + std::to_string(max_depth));
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol_abs, depth + 1, max_depth) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol_abs, depth + 1, max_depth);
}

} // namespace detail

/// Integrates f over [a,b] to relative tolerance rel_tol. The absolute
/// target is rel_tol * (coarse |integral| estimate), floored to avoid a
/// zero target on vanishing integrals.
template <typename F>
double integrate_adaptive_simpson(const F& f, double a, double b, double rel_tol,
                                  int max_depth = 60) {
    if (a == b)
        return 0.0;
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double scale = std::max(std::abs(whole), 1e-300);
    return detail::simpson_rec(f, a, b, fa, fm, fb, whole, rel_tol * scale, 0, max_depth);
}

} // namespace dliq
