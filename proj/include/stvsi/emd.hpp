#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "stvsi/trajectory.hpp"

namespace stvsi {

/// Sifting / decomposition parameters.
struct EmdConfig {
    double sd_tol = 0.2;        ///< Cauchy stop: sum(mean^2)/sum(h^2) below this
    int max_sift_iters = 50;    ///< hard cap per extracted mode
    int max_imfs = 8;           ///< decomposition stops after this many modes
    double mean_env_tol = 0.05; ///< mean-envelope RMS budget, relative to mode RMS
};

/// Interior extrema of a sample sequence (plateaus report their midpoint).
struct Extrema {
    std::vector<std::size_t> maxima;
    std::vector<std::size_t> minima;
};

/// One intrinsic mode: oscillatory samples whose extrema and zero-crossing
/// counts differ by at most one.
struct Imf {
    std::vector<double> values;
    int index = 0;            ///< 1-based extraction order (highest frequency first)
    int sift_iterations = 0;  ///< how many sifting passes produced it
};

/// Ordered modes plus the final trend remainder for one window.
struct Decomposition {
    std::vector<Imf> imfs;
    std::vector<double> residual;
    double t0 = 0.0;
    double dt = 0.0;
    EmdConfig config_echo;
};

/// Strict interior extrema with plateau-midpoint tie-breaking; endpoints excluded.
Extrema find_extrema(const std::vector<double>& values);

/// Natural cubic spline through the given extrema, with the two knots nearest
/// each edge mirrored across it before fitting, evaluated at every sample.
/// A window endpoint lying beyond the nearest extremum value (above for the
/// upper envelope, below for the lower) is anchored as an extra knot.
std::vector<double> envelope(const std::vector<double>& values,
                             const std::vector<std::size_t>& extrema_indices,
                             bool upper);

/// One mode extraction: repeat h <- h - mean(upper, lower envelope) until the
/// Cauchy criterion, the mean-envelope budget, and the mode property all hold,
/// or max_sift_iters is reached.
Imf sift(const std::vector<double>& signal, const EmdConfig& config = {});

/// Full decomposition of a window: extract modes until the remainder has
/// fewer than 2 maxima or fewer than 2 minima, or max_imfs is reached.
Decomposition decompose(const AnalysisWindow& window, const EmdConfig& config = {});

/// Element-wise sum of all modes (window minus residual); zeros when no modes.
std::vector<double> oscillatory_component(const Decomposition& d);

/// True when extrema and zero-crossing counts differ by at most one.
bool imf_property_ok(const std::vector<double>& values);

/// Write `t, v, imf1..imfK, residual` rows.
void decomposition_csv(const Decomposition& d, std::ostream& out);

}  // namespace stvsi
