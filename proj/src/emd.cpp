#include "stvsi/emd.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <utility>

#include "spline.hpp"
#include "stvsi/errors.hpp"

namespace stvsi {

Extrema find_extrema(const std::vector<double>& v) {
    const std::size_t n = v.size();
    if (n < 3) throw TooShort("extremum search needs >= 3 samples, got " + std::to_string(n));
    Extrema e;
    std::size_t i = 1;
    while (i + 1 < n) {
        std::size_t j = i;  // end of the plateau starting at i
        while (j + 1 < n && v[j + 1] == v[i]) ++j;
        if (j == n - 1) break;  // plateau runs into the endpoint
        if (v[i - 1] < v[i] && v[j + 1] < v[j]) {
            e.maxima.push_back((i + j) / 2);
        } else if (v[i - 1] > v[i] && v[j + 1] > v[j]) {
            e.minima.push_back((i + j) / 2);
        }
        i = j + 1;
    }
    return e;
}

std::vector<double> envelope(const std::vector<double>& v,
                             const std::vector<std::size_t>& extrema_indices, bool upper) {
    const std::size_t n = v.size();
    if (extrema_indices.size() < 2)
        throw InsufficientExtrema("envelope needs >= 2 extrema, got " +
                                  std::to_string(extrema_indices.size()));

    std::vector<double> xs, ys;
    xs.reserve(extrema_indices.size() + 6);
    ys.reserve(extrema_indices.size() + 6);
    for (std::size_t idx : extrema_indices) {
        xs.push_back(static_cast<double>(idx));
        ys.push_back(v[idx]);
    }

    // Containment guard: a window endpoint beyond the nearest extremum value
    // (above it for the upper envelope, below for the lower) becomes a knot,
    // so the spline cannot undershoot a decaying amplitude at the edge.
    if ((upper && v[0] > ys.front()) || (!upper && v[0] < ys.front())) {
        xs.insert(xs.begin(), 0.0);
        ys.insert(ys.begin(), v[0]);
    }
    if ((upper && v[n - 1] > ys.back()) || (!upper && v[n - 1] < ys.back())) {
        xs.push_back(static_cast<double>(n - 1));
        ys.push_back(v[n - 1]);
    }

    // Mirror the two knots nearest each edge across it. A ghost that does not
    // land strictly beyond the current knot span is dropped (an edge knot
    // mirrors onto itself), keeping the knot sequence strictly ascending for
    // the spline solve.
    const double right = static_cast<double>(n - 1);
    std::vector<std::pair<double, double>> pts;
    pts.reserve(xs.size() + 4);
    const std::size_t ng = std::min<std::size_t>(2, xs.size());
    for (std::size_t j = ng; j-- > 0;) {  // farthest ghost first keeps x ascending
        const double gx = -xs[j];
        if (gx < xs.front() - 1e-9) pts.emplace_back(gx, ys[j]);
    }
    for (std::size_t j = 0; j < xs.size(); ++j) pts.emplace_back(xs[j], ys[j]);
    for (std::size_t j = 0; j < ng; ++j) {
        const double gx = 2.0 * right - xs[xs.size() - 1 - j];
        if (gx > xs.back() + 1e-9) pts.emplace_back(gx, ys[ys.size() - 1 - j]);
    }

    std::vector<double> kx(pts.size()), ky(pts.size());
    for (std::size_t j = 0; j < pts.size(); ++j) {
        kx[j] = pts[j].first;
        ky[j] = pts[j].second;
    }
    std::vector<double> xq(n);
    for (std::size_t j = 0; j < n; ++j) xq[j] = static_cast<double>(j);
    return detail::natural_spline(kx, ky, xq);
}

bool imf_property_ok(const std::vector<double>& values) {
    const Extrema e = find_extrema(values);
    std::size_t zc = 0;
    int prev = values[0] >= 0.0 ? 1 : -1;
    for (std::size_t i = 1; i < values.size(); ++i) {
        const int s = values[i] >= 0.0 ? 1 : -1;
        if (s != prev) ++zc;
        prev = s;
    }
    const auto ext = e.maxima.size() + e.minima.size();
    return (ext > zc ? ext - zc : zc - ext) <= 1;
}

namespace {

double rms(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc / static_cast<double>(v.size()));
}

}  // namespace

Imf sift(const std::vector<double>& signal, const EmdConfig& config) {
    if (!(config.sd_tol > 0.0) || config.max_sift_iters < 1)
        throw InvalidSpec("sift needs sd_tol > 0 and max_sift_iters >= 1");
    {
        const Extrema e = find_extrema(signal);
        if (e.maxima.size() < 2 || e.minima.size() < 2)
            throw InsufficientExtrema("sift needs >= 2 maxima and >= 2 minima");
    }
    Imf mode;
    mode.values = signal;
    std::vector<double>& h = mode.values;
    for (int it = 0; it < config.max_sift_iters; ++it) {
        const Extrema e = find_extrema(h);
        if (e.maxima.size() < 2 || e.minima.size() < 2) {
            mode.sift_iterations = it;
            return mode;
        }
        const std::vector<double> up = envelope(h, e.maxima, true);
        const std::vector<double> lo = envelope(h, e.minima, false);
        double sum_m2 = 0.0, sum_h2 = 0.0;
        for (std::size_t i = 0; i < h.size(); ++i) {
            const double m = 0.5 * (up[i] + lo[i]);
            sum_m2 += m * m;
            sum_h2 += h[i] * h[i];
            h[i] -= m;
        }
        mode.sift_iterations = it + 1;
        const double sd = sum_m2 / std::max(sum_h2, 1e-300);
        const double menv_rms = std::sqrt(sum_m2 / static_cast<double>(h.size()));
        if (sd < config.sd_tol && menv_rms <= config.mean_env_tol * rms(h) &&
            imf_property_ok(h)) {
            return mode;
        }
    }
    return mode;  // iteration cap: emit the candidate as-is
}

Decomposition decompose(const AnalysisWindow& window, const EmdConfig& config) {
    if (window.size() < 16)
        throw TooShort("decomposition needs >= 16 samples, window has " +
                       std::to_string(window.size()));
    if (!(config.sd_tol > 0.0) || config.max_sift_iters < 1 || config.max_imfs < 1)
        throw InvalidSpec("invalid decomposition config");

    Decomposition d;
    d.t0 = window.t0;
    d.dt = window.dt;
    d.config_echo = config;
    d.residual = window.values;

    while (static_cast<int>(d.imfs.size()) < config.max_imfs) {
        const Extrema e = find_extrema(d.residual);
        if (e.maxima.size() < 2 || e.minima.size() < 2) break;
        Imf mode = sift(d.residual, config);
        for (std::size_t i = 0; i < d.residual.size(); ++i) d.residual[i] -= mode.values[i];
        mode.index = static_cast<int>(d.imfs.size()) + 1;
        d.imfs.push_back(std::move(mode));
    }
    return d;
}

std::vector<double> oscillatory_component(const Decomposition& d) {
    std::vector<double> out(d.residual.size(), 0.0);
    for (const Imf& mode : d.imfs)
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += mode.values[i];
    return out;
}

void decomposition_csv(const Decomposition& d, std::ostream& out) {
    out << "t,v";
    for (std::size_t k = 1; k <= d.imfs.size(); ++k) out << ",imf" << k;
    out << ",residual\n";
    char buf[64];
    for (std::size_t i = 0; i < d.residual.size(); ++i) {
        double v = d.residual[i];
        for (const Imf& mode : d.imfs) v += mode.values[i];
        std::snprintf(buf, sizeof buf, "%.17g", d.t0 + d.dt * static_cast<double>(i));
        out << buf;
        std::snprintf(buf, sizeof buf, ",%.17g", v);
        out << buf;
        for (const Imf& mode : d.imfs) {
            std::snprintf(buf, sizeof buf, ",%.17g", mode.values[i]);
            out << buf;
        }
        std::snprintf(buf, sizeof buf, ",%.17g\n", d.residual[i]);
        out << buf;
    }
}

}  // namespace stvsi
