#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "stvsi/trajectory.hpp"

namespace stvsi {

/// Which decomposition component a sample set was computed from.
enum class ComponentTag { residual, oscillatory };

/// Finite-window exponent series: lambda(k) for sample offsets k = 1..K-1.
struct LESeries {
    std::vector<double> lambdas;  ///< 1/seconds, length = window length - 1
    double dt = 0.0;              ///< seconds
    double ref_deriv = 0.0;       ///< |v'| at the window anchor (floored), per-unit/second
};

/// Exponentiated exponent samples e^{lambda(k)}, the raw material the
/// empirical distributions are built from.
struct LESampleSet {
    std::vector<double> samples;  ///< dimensionless, clamped to [1e-12, 50]
    ComponentTag tag = ComponentTag::residual;
};

/// Conventional finite-window verdict: sign of the trailing-mean exponent.
struct ClassicVerdict {
    double tail_mean = 0.0;   ///< mean lambda over the trailing fraction
    bool stable = false;      ///< tail_mean < 0
    bool sign_flips = false;  ///< lambda changes sign anywhere across k
};

/// lambda(k) = ln(max(|v'_k|, floor) / max(|v'_0|, floor)) / (k*dt), k >= 1.
LESeries le_series(const DerivativeSeries& deriv, double floor = 1e-9);

/// le_series on a bare derivative vector.
LESeries le_series(const std::vector<double>& deriv_values, double dt, double floor = 1e-9);

/// Exponentiate the series into positive, finite samples.
LESampleSet le_samples(const LESeries& series, ComponentTag tag);

/// The conventional stable/unstable call this pipeline replaces; kept as a
/// comparator for the oscillation false-positive regression.
ClassicVerdict classic_le_verdict(const LESeries& series, double tail_fraction = 0.5);

/// Write `k, t, lambda, exp_lambda` rows.
void le_series_csv(const LESeries& series, std::ostream& out);

}  // namespace stvsi
