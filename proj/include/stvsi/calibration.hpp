#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "stvsi/divergence.hpp"
#include "stvsi/emd.hpp"
#include "stvsi/lyapunov.hpp"
#include "stvsi/scenarios.hpp"

namespace stvsi {

/// Stability band of an index value against a threshold.
enum class Band { stable, critical, unstable };

/// Classification outcome; margin = threshold - value (positive means
/// headroom below the threshold).
struct Verdict {
    Band band = Band::critical;
    double margin = 0.0;
    ComponentTag tag = ComponentTag::residual;
};

/// Half-open critical band of width epsilon centred on the threshold:
/// value < threshold - epsilon/2 is stable, value > threshold + epsilon/2 is
/// unstable, anything else is critical.
Verdict classify(double value, double threshold, double epsilon, ComponentTag tag);

/// Normalised stability headroom 1 - value/threshold, capped at 1 for
/// negative index values. Requires threshold > 0.
double degree_of_stability(double value, double threshold);

const char* band_name(Band band);

/// Options for tune_gamma1.
struct CalibrationOptions {
    double epsilon = 0.02;         ///< feasibility width |d_s1 - d_s2| < epsilon
    double gamma_lo = 0.01;        ///< search range lower edge
    double gamma_hi = 10.0;        ///< search range upper edge
    int grid_points = 400;         ///< log-spaced coarse scan size
    double window_duration = 3.0;  ///< s
    IndexOptions index;            ///< binning / derivative controls
    EmdConfig emd;                 ///< decomposition controls
    double dip_threshold = 0.7;    ///< fault detector: dip level, pu
    double clear_slope = 0.02;     ///< fault detector: recovery slope, pu/s
};

/// Result of the recovery-exponent calibration.
struct CalibrationResult {
    std::string schema_version = "stvsi.calibration/1";
    double gamma1 = 0.0;         ///< largest feasible recovery exponent
    double d_critical_r = 0.0;   ///< recovery threshold: midpoint of d_s1, d_s2
    double d_s1 = 0.0;           ///< recovery index of s1 at gamma1
    double d_s2 = 0.0;           ///< recovery index of s2 at gamma1
    double epsilon = 0.0;        ///< feasibility width used
    /// Coarse scan trace: (gamma, |d_s1 - d_s2|) pairs in ascending gamma.
    std::vector<std::pair<double, double>> search_trace;
};

/// Finds the largest gamma in [gamma_lo, gamma_hi] for which the two boundary
/// recoveries score within epsilon of each other, and returns the midpoint of
/// their index values as the recovery threshold. Throws NoFeasibleGamma when
/// no gamma in range satisfies the feasibility condition.
CalibrationResult tune_gamma1(const BoundaryPair& pair, const CalibrationOptions& opt = {});

/// JSON round-trip of a calibration result.
void save_calibration(const CalibrationResult& result, std::ostream& out);
CalibrationResult load_calibration(std::istream& in);
void save_calibration_file(const CalibrationResult& result, const std::string& path);
CalibrationResult load_calibration_file(const std::string& path);

}  // namespace stvsi
