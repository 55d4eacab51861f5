// SPDX-License-Identifier: Apache-2.0
//
// Monotone cubic (Fritsch-Carlson) interpolation on a fixed grid.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace dliq {

class PchipCurve {
public:
    PchipCurve() = default;

    PchipCurve(std::vector<double> xs, std::vector<double> ys)
        : x_(std::move(xs)), y_(std::move(ys)) {
        const size_t n = x_.size();
        if (n < 2 || y_.size() != n)
            throw std::invalid_argument("PchipCurve: need >= 2 nodes and matching sizes");
        d_.assign(n, 0.0);
        std::vector<double> h(n - 1), s(n - 1);
        for (size_t i = 0; i + 1 < n; ++i) {
            h[i] = x_[i + 1] - x_[i];
            s[i] = (y_[i + 1] - y_[i]) / h[i];
        }
        if (n == 2) {
            d_[0] = d_[1] = s[0];
            return;
        }
        for (size_t i = 1; i + 1 < n; ++i) {
            if (s[i - 1] * s[i] <= 0.0) {
                d_[i] = 0.0;
            } else {
                const double w1 = 2.0 * h[i] + h[i - 1];
                const double w2 = h[i] + 2.0 * h[i - 1];
                d_[i] = (w1 + w2) / (w1 / s[i - 1] + w2 / s[i]);
            }
        }
        d_[0] = edge_slope(h[0], h[1], s[0], s[1]);
        d_[n - 1] = edge_slope(h[n - 2], h[n - 3], s[n - 2], s[n - 3]);
    }

    double operator()(double x) const {
        const size_t n = x_.size();
        size_t i;
        if (x <= x_.front())
            i = 0;
        else if (x >= x_[n - 2])
            i = n - 2;
        else
            i = static_cast<size_t>(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin()) - 1;
        const double h = x_[i + 1] - x_[i];
        const double t = (x - x_[i]) / h;
        const double t2 = t * t, t3 = t2 * t;
        const double h00 = 2 * t3 - 3 * t2 + 1;
        const double h10 = t3 - 2 * t2 + t;
        const double h01 = -2 * t3 + 3 * t2;
        const double h11 = t3 - t2;
        return h00 * y_[i] + h * h10 * d_[i] + h01 * y_[i + 1] + h * h11 * d_[i + 1];
    }

    double x_min() const { return x_.front(); }
    double x_max() const { return x_.back(); }

private:
    // Three-point one-sided slope, clamped to preserve monotone shape.
    static double edge_slope(double h0, double h1, double s0, double s1) {
        double d = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
        if (d * s0 <= 0.0)
            d = 0.0;
        else if (s0 * s1 <= 0.0 && std::abs(d) > 3.0 * std::abs(s0))
            d = 3.0 * s0;
        return d;
    }

    std::vector<double> x_, y_, d_;
};

} // namespace dliq
