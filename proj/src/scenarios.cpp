#include "stvsi/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "stvsi/errors.hpp"

namespace stvsi {

namespace {

const char* kind_name(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::damped_osc: return "damped_osc";
        case ScenarioKind::fixed_osc: return "fixed_osc";
        case ScenarioKind::growing_osc: return "growing_osc";
        case ScenarioKind::exp_recovery: return "exp_recovery";
        case ScenarioKind::composite: return "composite";
    }
    return "unknown";
}

double recovery_value(const ScenarioSpec& s, double t) {
    if (t < s.t_fault) return 1.0;
    if (t < s.t_clear) return s.r0;
    return 1.0 - (1.0 - s.r0) * std::exp(-s.alpha * (t - s.t_clear));
}

void validate(const ScenarioSpec& s) {
    if (!(s.dt > 0.0)) throw InvalidSpec("scenario dt must be positive");
    if (!(s.duration >= 16.0 * s.dt))
        throw InvalidSpec("scenario duration must cover at least 16 samples");
    if (!(s.amp >= 0.0)) throw InvalidSpec("scenario amplitude must be non-negative");
    if (!(s.noise_sigma >= 0.0)) throw InvalidSpec("noise sigma must be non-negative");
    switch (s.kind) {
        case ScenarioKind::damped_osc:
            if (!(s.alpha > 0.0)) throw InvalidSpec("damped_osc requires alpha > 0");
            break;
        case ScenarioKind::fixed_osc:
            break;
        case ScenarioKind::growing_osc:
            if (!(s.growth >= 0.0)) throw InvalidSpec("growing_osc requires growth >= 0");
            break;
        case ScenarioKind::exp_recovery:
        case ScenarioKind::composite:
            if (!(s.r0 > 0.0 && s.r0 < 1.0))
                throw InvalidSpec("recovery depth r0 must lie in (0, 1)");
            if (!(s.alpha > 0.0)) throw InvalidSpec("recovery rate alpha must be positive");
            if (!(s.t_fault >= 0.0 && s.t_fault < s.t_clear))
                throw InvalidSpec("fault time must precede clearing time");
            if (!(s.t_clear < s.duration))
                throw InvalidSpec("clearing time must lie inside the trace");
            if (s.kind == ScenarioKind::composite && !(s.osc_decay >= 0.0))
                throw InvalidSpec("composite oscillation decay must be non-negative");
            break;
    }
}

}  // namespace

VoltageTrajectory gen(const ScenarioSpec& spec) {
    validate(spec);
    const auto n = static_cast<std::size_t>(std::llround(spec.duration / spec.dt)) + 1;
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * spec.dt;
        double x = 0.0;
        switch (spec.kind) {
            case ScenarioKind::damped_osc:
                x = std::exp(-spec.alpha * t) * (1.0 + spec.amp * std::cos(spec.omega * t));
                break;
            case ScenarioKind::fixed_osc:
                x = 1.0 + spec.amp * std::cos(spec.omega * t);
                break;
            case ScenarioKind::growing_osc:
                x = 1.0 + spec.amp * std::exp(spec.growth * t) * std::cos(spec.omega * t);
                break;
            case ScenarioKind::exp_recovery:
                x = recovery_value(spec, t);
                break;
            case ScenarioKind::composite:
                x = recovery_value(spec, t) *
                    (1.0 + spec.amp * std::exp(-spec.osc_decay * t) * std::cos(spec.omega * t));
                break;
        }
        v[i] = x;
    }
    if (spec.noise_sigma > 0.0) {
        std::mt19937_64 rng(spec.seed);
        std::normal_distribution<double> gauss(0.0, spec.noise_sigma);
        for (auto& x : v) x += gauss(rng);
    }
    for (auto& x : v) x = std::max(x, 0.0);
    std::string meta = std::string(kind_name(spec.kind)) + " alpha=" + std::to_string(spec.alpha) +
                       " amp=" + std::to_string(spec.amp) + " r0=" + std::to_string(spec.r0);
    return VoltageTrajectory::make(0.0, spec.dt, std::move(v), std::move(meta));
}

BoundaryPair gen_boundary_pair(double y1, double alpha1, double y2, double alpha2,
                               double dt, double duration) {
    if (!(y2 > 0.0 && y2 < y1 && y1 < 1.0))
        throw InvalidSpec("boundary pair requires 0 < y2 < y1 < 1");
    if (!(alpha1 < alpha2))
        throw InvalidSpec("boundary pair requires alpha1 < alpha2");
    ScenarioSpec base;
    base.kind = ScenarioKind::exp_recovery;
    base.dt = dt;
    base.duration = duration;
    base.t_fault = 0.5;
    base.t_clear = 1.0;

    ScenarioSpec a = base;
    a.r0 = y1;
    a.alpha = alpha1;
    ScenarioSpec b = base;
    b.r0 = y2;
    b.alpha = alpha2;

    BoundaryPair pair;
    pair.s1 = gen(a);
    pair.s2 = gen(b);
    pair.t0_s1 = base.t_clear;
    pair.t0_s2 = base.t_clear;
    return pair;
}

}  // namespace stvsi
