#pragma once

#include <optional>

#include "stvsi/trajectory.hpp"

namespace stvsi {

/// Analytic trajectory families with known ground truth.
enum class ScenarioKind {
    damped_osc,    ///< e^{-alpha*t} * (1 + A*cos(omega*t))
    fixed_osc,     ///< 1 + A*cos(omega*t)
    growing_osc,   ///< 1 + A*e^{growth*t}*cos(omega*t)
    exp_recovery,  ///< plateau at r0 between t_fault and t_clear, then 1-(1-r0)*e^{-alpha*(t-t_clear)}
    composite,     ///< exp_recovery * (1 + A*e^{-osc_decay*t}*cos(omega*t))
};

/// Parameters for gen(). Fields not used by a kind are ignored.
struct ScenarioSpec {
    ScenarioKind kind = ScenarioKind::fixed_osc;
    double dt = 1e-3;          ///< s
    double duration = 6.0;     ///< s, trace covers [0, duration]
    double alpha = 0.5;        ///< damping / recovery rate, 1/s
    double amp = 0.1;          ///< oscillation amplitude, pu
    double omega = 2.0 * 3.14159265358979323846 * 1.5;  ///< rad/s
    double growth = 0.5;       ///< growing_osc envelope rate, 1/s
    double r0 = 0.7;           ///< post-fault dip depth, pu
    double t_fault = 0.5;      ///< fault inception (plateau start), s
    double t_clear = 1.0;      ///< fault clearing (recovery start), s
    double noise_sigma = 0.0;  ///< additive Gaussian noise, pu
    double osc_decay = 1.0;    ///< composite oscillation damping, 1/s
    unsigned long long seed = 0;
};

/// Critical boundary recoveries used to calibrate the recovery threshold:
/// s1 the slowest shallow recovery, s2 the fastest deep one that still count
/// as critical. Known window anchors travel with the pair because the shallow
/// signal's dip may sit above the slope detector's dip threshold.
struct BoundaryPair {
    VoltageTrajectory s1;
    VoltageTrajectory s2;
    std::optional<double> t0_s1;  ///< known clearing time of s1
    std::optional<double> t0_s2;  ///< known clearing time of s2
};

/// Deterministic trajectory synthesis (seeded noise); values clamped at 0 pu.
VoltageTrajectory gen(const ScenarioSpec& spec);

/// Two exp_recovery trajectories bracketing the critical boundary:
/// s1 dips to y1 recovering at alpha1 (shallow, slow), s2 dips to y2 at
/// alpha2 (deep, fast). Requires 0 < y2 < y1 < 1 and alpha1 < alpha2.
BoundaryPair gen_boundary_pair(double y1, double alpha1, double y2, double alpha2,
                               double dt = 1e-3, double duration = 6.0);

}  // namespace stvsi
