#include "stvsi/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "stvsi/errors.hpp"

namespace stvsi {

LESeries le_series(const std::vector<double>& deriv_values, double dt, double floor) {
    if (deriv_values.size() < 2)
        throw TooShort("exponent series needs >= 2 derivative samples, got " +
                       std::to_string(deriv_values.size()));
    if (!(floor > 0.0)) throw InvalidSpec("derivative floor must be positive");
    if (!(dt > 0.0)) throw InvalidSpec("sampling interval must be positive");

    LESeries s;
    s.dt = dt;
    s.ref_deriv = std::max(std::abs(deriv_values[0]), floor);
    s.lambdas.resize(deriv_values.size() - 1);
    for (std::size_t k = 1; k < deriv_values.size(); ++k) {
        const double num = std::max(std::abs(deriv_values[k]), floor);
        s.lambdas[k - 1] = std::log(num / s.ref_deriv) / (static_cast<double>(k) * dt);
    }
    return s;
}

LESeries le_series(const DerivativeSeries& deriv, double floor) {
    return le_series(deriv.values, deriv.dt, floor);
}

LESampleSet le_samples(const LESeries& series, ComponentTag tag) {
    LESampleSet set;
    set.tag = tag;
    set.samples.resize(series.lambdas.size());
    for (std::size_t i = 0; i < series.lambdas.size(); ++i)
        set.samples[i] = std::clamp(std::exp(series.lambdas[i]), 1e-12, 50.0);
    return set;
}

ClassicVerdict classic_le_verdict(const LESeries& series, double tail_fraction) {
    if (!(tail_fraction > 0.0 && tail_fraction <= 1.0))
        throw InvalidSpec("tail_fraction must lie in (0,1]");
    const std::size_t n = series.lambdas.size();
    const auto tail_len = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(tail_fraction * static_cast<double>(n))));
    const std::size_t start = n - tail_len;

    ClassicVerdict v;
    double acc = 0.0;
    for (std::size_t i = start; i < n; ++i) acc += series.lambdas[i];
    v.tail_mean = acc / static_cast<double>(tail_len);
    v.stable = v.tail_mean < 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        if ((series.lambdas[i] >= 0.0) != (series.lambdas[i - 1] >= 0.0)) {
            v.sign_flips = true;
            break;
        }
    }
    return v;
}

void le_series_csv(const LESeries& series, std::ostream& out) {
    out << "k,t,lambda,exp_lambda\n";
    char buf[96];
    for (std::size_t i = 0; i < series.lambdas.size(); ++i) {
        const auto k = static_cast<double>(i + 1);
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", i + 1, k * series.dt,
                      series.lambdas[i], std::exp(series.lambdas[i]));
        out << buf;
    }
}

}  // namespace stvsi
