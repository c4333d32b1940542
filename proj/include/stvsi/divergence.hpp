#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "stvsi/lyapunov.hpp"
#include "stvsi/trajectory.hpp"

namespace stvsi {

/// Binned probability mass over the exponent-sample support [0, max(2, max sample)].
/// Each bin also records a representative point: the mean of the samples that
/// landed in it (bin center when empty), so index evaluation is not quantized
/// to the bin grid.
struct EmpiricalDistribution {
    std::vector<double> edges;           ///< bin_count + 1 ascending edges
    std::vector<double> mass;            ///< probability per bin, sums to 1
    std::vector<double> representative;  ///< within-bin sample mean, center if empty
};

/// Reference density e^{-e^{gamma*(x-shift)}} (unnormalized).
struct GompertzReference {
    double gamma = 1.0;  ///< sensitivity
    double shift = 0.5;  ///< 0.5 for the recovery index, 1.0 for the oscillation index
};

/// One stability-index evaluation with its diagnostic terms.
struct IndexValue {
    double value = 0.0;
    ComponentTag tag = ComponentTag::residual;
    double depth_weight = 1.0;  ///< |ln R(t0)| for the recovery index, 1 otherwise
    double entropy_term = 0.0;  ///< sum of m*ln(m) over occupied bins (<= 0)
    double cross_term = 0.0;    ///< sum of m*e^{gamma*(x-shift)} (>= 0)
    bool degenerate = false;    ///< flat residual / zero oscillatory component
};

/// Knobs shared by the two index computations.
struct IndexOptions {
    int bin_count = 33;       ///< odd by default so x = 1.0 is a bin center
    double le_floor = 1e-9;   ///< derivative magnitude floor, per-unit/second
    DerivativeMethod deriv_method = DerivativeMethod::local_polynomial;
};

/// Bin samples into a uniform grid over [0, max(2, max sample)].
EmpiricalDistribution empirical_distribution(const std::vector<double>& samples,
                                             int bin_count = 33);
EmpiricalDistribution empirical_distribution(const LESampleSet& set, int bin_count = 33);

/// Evaluate the reference density at x >= 0.
double gompertz_pdf(const GompertzReference& ref, double x);

/// Relative entropy sum p_i * ln(p_i / q_i) over a shared bin grid.
/// q is floored at 1e-12 and renormalized; bins with p_i = 0 contribute 0.
double kl_divergence(const EmpiricalDistribution& p, const EmpiricalDistribution& q);
double kl_divergence(const std::vector<double>& p_mass, const std::vector<double>& q_mass);

/// Unnormalized cross-entropy score of a distribution against the reference:
/// sum m*ln(m) + sum m*e^{gamma*(x-shift)} over occupied bins, evaluated at
/// the bins' representative points and clamped at 0 from below (a divergence
/// surrogate never reads negative; the entropy/cross terms stay unclamped as
/// diagnostics). A point mass at x = shift scores exactly 1.
IndexValue step1_index(const EmpiricalDistribution& dist, const GompertzReference& ref);

/// Gamma-independent part of the recovery index: the dip-depth weight and the
/// binned exponent-sample distribution of a residual. recovery_index equals
/// depth_weight * step1_index(dist, {gamma1, 0.5}).value when not degenerate,
/// so a calibration sweep can bin once and rescore at many gamma values.
struct RecoveryDistribution {
    double depth_weight = 0.0;
    EmpiricalDistribution dist;
    bool degenerate = false;  ///< flat residual: no distribution computed
};
RecoveryDistribution recovery_distribution(const std::vector<double>& residual, double dt,
                                           const IndexOptions& options = {});

/// Recovery stability index: the step1 score of the residual's exponent-sample
/// distribution (shift 0.5), weighted by the dip depth |ln R(t0)|.
/// A flat residual yields value 0 with the degenerate flag set.
IndexValue recovery_index(const std::vector<double>& residual, double dt, double gamma1,
                          const IndexOptions& options = {});

/// Oscillation stability index: the step1 score of the oscillatory component's
/// exponent-sample distribution (shift 1.0).
/// A zero component yields value 0 with the degenerate flag set.
IndexValue oscillation_index(const std::vector<double>& oscillatory, double dt,
                             double gamma2 = 1.0, const IndexOptions& options = {});

/// Write `bin_center, mass, reference_density` rows.
void distribution_csv(const EmpiricalDistribution& dist, const GompertzReference& ref,
                      std::ostream& out);

}  // namespace stvsi
