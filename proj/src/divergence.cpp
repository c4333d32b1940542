#include "stvsi/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "spline.hpp"
#include "stvsi/emd.hpp"
#include "stvsi/errors.hpp"

namespace stvsi {

EmpiricalDistribution empirical_distribution(const std::vector<double>& samples, int bin_count) {
    if (samples.empty()) throw TooShort("distribution needs >= 1 sample");
    if (bin_count < 1) throw InvalidSpec("bin_count must be >= 1");

    const auto bins = static_cast<std::size_t>(bin_count);
    const double hi = std::max(2.0, *std::max_element(samples.begin(), samples.end()));
    const double width = hi / static_cast<double>(bins);

    EmpiricalDistribution d;
    d.edges.resize(bins + 1);
    for (std::size_t b = 0; b <= bins; ++b)
        d.edges[b] = hi * static_cast<double>(b) / static_cast<double>(bins);
    d.mass.assign(bins, 0.0);
    d.representative.resize(bins);
    std::vector<double> sum(bins, 0.0);
    std::vector<std::size_t> count(bins, 0);

    for (double x : samples) {
        auto b = static_cast<std::size_t>(x / width);
        b = std::min(b, bins - 1);
        ++count[b];
        sum[b] += x;
    }
    for (std::size_t b = 0; b < bins; ++b) {
        d.mass[b] = static_cast<double>(count[b]) / static_cast<double>(samples.size());
        d.representative[b] = count[b] > 0 ? sum[b] / static_cast<double>(count[b])
                                           : 0.5 * (d.edges[b] + d.edges[b + 1]);
    }
    return d;
}

EmpiricalDistribution empirical_distribution(const LESampleSet& set, int bin_count) {
    return empirical_distribution(set.samples, bin_count);
}

double gompertz_pdf(const GompertzReference& ref, double x) {
    if (!(ref.gamma > 0.0) || !(ref.shift > 0.0))
        throw InvalidSpec("reference needs gamma > 0 and shift > 0");
    return std::exp(-std::exp(ref.gamma * (x - ref.shift)));
}

double kl_divergence(const std::vector<double>& p_mass, const std::vector<double>& q_mass) {
    if (p_mass.size() != q_mass.size())
        throw GridMismatch("distributions have " + std::to_string(p_mass.size()) + " vs " +
                           std::to_string(q_mass.size()) + " bins");
    std::vector<double> q(q_mass.size());
    double qsum = 0.0, psum = 0.0;
    for (std::size_t i = 0; i < q_mass.size(); ++i) {
        q[i] = std::max(q_mass[i], 1e-12);
        qsum += q[i];
        psum += std::max(p_mass[i], 0.0);
    }
    // Normalize the two sides through the same expression shape so comparing
    // a distribution against itself divides bitwise-equal values and lands on
    // log(1.0) == 0 exactly.
    double acc = 0.0;
    for (std::size_t i = 0; i < p_mass.size(); ++i) {
        if (p_mass[i] > 0.0) {
            const double ph = p_mass[i] / psum;
            const double qh = q[i] / qsum;
            acc += ph * std::log(ph / qh);
        }
    }
    return acc;
}

double kl_divergence(const EmpiricalDistribution& p, const EmpiricalDistribution& q) {
    if (p.edges.size() != q.edges.size() || !std::equal(p.edges.begin(), p.edges.end(), q.edges.begin()))
        throw GridMismatch("bin grids differ");
    return kl_divergence(p.mass, q.mass);
}

IndexValue step1_index(const EmpiricalDistribution& dist, const GompertzReference& ref) {
    if (!(ref.gamma > 0.0) || !(ref.shift > 0.0))
        throw InvalidSpec("reference needs gamma > 0 and shift > 0");
    IndexValue out;
    for (std::size_t b = 0; b < dist.mass.size(); ++b) {
        const double m = dist.mass[b];
        if (m <= 0.0) continue;
        out.entropy_term += m * std::log(m);
        out.cross_term += m * std::exp(ref.gamma * (dist.representative[b] - ref.shift));
    }
    out.value = std::max(0.0, out.entropy_term + out.cross_term);
    return out;
}

namespace {

/// The series handed to the exponent stage for one decomposition component:
/// the spline envelope of |comp'| through its interior maxima when oscillatory
/// structure is present (>= 2 maxima spanning >= 25% of the window), else the
/// raw |comp'|. Ratios of an oscillatory derivative swing through zero and
/// scatter the exponent samples; its peak envelope carries the amplitude trend
/// those ratios are meant to measure.
std::vector<double> exponent_stage_input(const std::vector<double>& component, double dt,
                                         double floor, DerivativeMethod method) {
    std::vector<double> d = derivative_values(component, dt, method);
    for (double& x : d) x = std::abs(x);

    const Extrema e = find_extrema(d);
    const auto& mx = e.maxima;
    if (mx.size() >= 2 &&
        static_cast<double>(mx.back() - mx.front()) >= 0.25 * static_cast<double>(d.size())) {
        std::vector<double> kx(mx.size()), ky(mx.size());
        for (std::size_t i = 0; i < mx.size(); ++i) {
            kx[i] = static_cast<double>(mx[i]);
            ky[i] = d[mx[i]];
        }
        std::vector<double> xq(mx.back() - mx.front() + 1);
        for (std::size_t i = 0; i < xq.size(); ++i)
            xq[i] = static_cast<double>(mx.front() + i);
        std::vector<double> env = detail::natural_spline(kx, ky, xq);
        for (double& x : env) x = std::max(x, floor);
        return env;
    }
    for (double& x : d) x = std::max(x, floor);
    return d;
}

}  // namespace

RecoveryDistribution recovery_distribution(const std::vector<double>& residual, double dt,
                                           const IndexOptions& options) {
    if (residual.size() < 5) throw TooShort("recovery index needs >= 5 residual samples");
    const double r0 = residual.front();
    if (!(r0 > 0.0 && r0 <= 1.5))
        throw InvalidSpec("residual anchor " + std::to_string(r0) + " outside (0, 1.5]");

    RecoveryDistribution rd;
    rd.depth_weight = std::abs(std::log(r0));

    const std::vector<double> d = derivative_values(residual, dt, options.deriv_method);
    double dmax = 0.0;
    for (double x : d) dmax = std::max(dmax, std::abs(x));
    if (dmax <= options.le_floor) {
        rd.degenerate = true;  // flat residual: no recovery dynamics to score
        return rd;
    }

    const std::vector<double> y =
        exponent_stage_input(residual, dt, options.le_floor, options.deriv_method);
    const LESeries lam = le_series(y, dt, options.le_floor);
    const LESampleSet x = le_samples(lam, ComponentTag::residual);
    rd.dist = empirical_distribution(x, options.bin_count);
    return rd;
}

IndexValue recovery_index(const std::vector<double>& residual, double dt, double gamma1,
                          const IndexOptions& options) {
    const RecoveryDistribution rd = recovery_distribution(residual, dt, options);

    IndexValue out;
    out.tag = ComponentTag::residual;
    out.depth_weight = rd.depth_weight;
    if (rd.degenerate) {
        out.degenerate = true;
        return out;
    }

    const IndexValue s = step1_index(rd.dist, GompertzReference{gamma1, 0.5});
    out.entropy_term = s.entropy_term;
    out.cross_term = s.cross_term;
    out.value = out.depth_weight * s.value;
    return out;
}

IndexValue oscillation_index(const std::vector<double>& oscillatory, double dt, double gamma2,
                             const IndexOptions& options) {
    IndexValue out;
    out.tag = ComponentTag::oscillatory;

    double amax = 0.0;
    for (double x : oscillatory) amax = std::max(amax, std::abs(x));
    if (oscillatory.size() < 5 || amax <= 1e-9) {
        out.degenerate = true;  // no oscillatory content: perfectly damped
        return out;
    }

    const std::vector<double> y =
        exponent_stage_input(oscillatory, dt, options.le_floor, options.deriv_method);
    const LESeries lam = le_series(y, dt, options.le_floor);
    const LESampleSet x = le_samples(lam, ComponentTag::oscillatory);
    const EmpiricalDistribution dist = empirical_distribution(x, options.bin_count);
    const IndexValue s = step1_index(dist, GompertzReference{gamma2, 1.0});

    out.entropy_term = s.entropy_term;
    out.cross_term = s.cross_term;
    out.value = s.value;
    return out;
}

void distribution_csv(const EmpiricalDistribution& dist, const GompertzReference& ref,
                      std::ostream& out) {
    out << "bin_center,mass,reference_density\n";
    char buf[96];
    for (std::size_t b = 0; b < dist.mass.size(); ++b) {
        const double center = 0.5 * (dist.edges[b] + dist.edges[b + 1]);
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", center, dist.mass[b],
                      gompertz_pdf(ref, center));
        out << buf;
    }
}

}  // namespace stvsi
