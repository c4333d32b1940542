#pragma once

// Internal: natural cubic spline interpolation shared by the envelope and
// index stages. Not part of the public API.

#include <cstddef>
#include <vector>

namespace stvsi::detail {

/// Evaluate the natural cubic spline through (xs, ys) at each query point.
/// xs must be strictly increasing. One knot -> constant; two knots -> the
/// straight line through them. Queries beyond the end knots extrapolate
/// linearly with the spline's end slope.
inline std::vector<double> natural_spline(const std::vector<double>& xs,
                                          const std::vector<double>& ys,
                                          const std::vector<double>& xq) {
    const std::size_t n = xs.size();
    std::vector<double> out(xq.size());
    if (n == 1) {
        for (std::size_t q = 0; q < xq.size(); ++q) out[q] = ys[0];
        return out;
    }
    if (n == 2) {
        const double slope = (ys[1] - ys[0]) / (xs[1] - xs[0]);
        for (std::size_t q = 0; q < xq.size(); ++q) out[q] = ys[0] + slope * (xq[q] - xs[0]);
        return out;
    }

    std::vector<double> h(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) h[i] = xs[i + 1] - xs[i];

    // Thomas solve for interior second derivatives m[1..n-2]; natural ends m0 = mN = 0.
    std::vector<double> m(n, 0.0), cp(n, 0.0), dp(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double a = h[i - 1] / 6.0;
        const double b = (h[i - 1] + h[i]) / 3.0;
        const double c = h[i] / 6.0;
        const double d = (ys[i + 1] - ys[i]) / h[i] - (ys[i] - ys[i - 1]) / h[i - 1];
        const double denom = b - a * cp[i - 1];
        cp[i] = c / denom;
        dp[i] = (d - a * dp[i - 1]) / denom;
    }
    for (std::size_t i = n - 2; i >= 1; --i) m[i] = dp[i] - cp[i] * m[i + 1];

    std::size_t k = 0;  // queries are evaluated in ascending order
    for (std::size_t q = 0; q < xq.size(); ++q) {
        const double x = xq[q];
        if (x <= xs[0]) {
            const double slope = (ys[1] - ys[0]) / h[0] - h[0] * m[1] / 6.0;
            out[q] = ys[0] + slope * (x - xs[0]);
            continue;
        }
        if (x >= xs[n - 1]) {
            const double slope = (ys[n - 1] - ys[n - 2]) / h[n - 2] + h[n - 2] * m[n - 2] / 6.0;
            out[q] = ys[n - 1] + slope * (x - xs[n - 1]);
            continue;
        }
        if (x < xs[k]) k = 0;  // non-monotone query fallback
        while (k + 2 < n && xs[k + 1] < x) ++k;
        const double t = xs[k + 1] - x;
        const double u = x - xs[k];
        const double hk = h[k];
        out[q] = (m[k] * t * t * t + m[k + 1] * u * u * u) / (6.0 * hk) +
                 (ys[k] - m[k] * hk * hk / 6.0) * t / hk +
                 (ys[k + 1] - m[k + 1] * hk * hk / 6.0) * u / hk;
    }
    return out;
}

}  // namespace stvsi::detail
