#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace stvsi {

/// How estimate_derivative computes v'.
enum class DerivativeMethod {
    central_difference,  ///< (v[i+1]-v[i-1])/(2dt) interior, one-sided at the ends
    local_polynomial,    ///< least-squares quadratic over a 7-sample sliding stencil
};

/// Uniformly sampled per-unit voltage time series.
struct VoltageTrajectory {
    double start_time = 0.0;      ///< time of the first sample, seconds
    double dt = 0.0;              ///< sampling interval, seconds
    std::vector<double> values;   ///< per-unit voltage magnitudes
    std::string meta;             ///< source label

    /// Validating constructor: dt > 0, length >= 8, all values finite and >= 0.
    static VoltageTrajectory make(double start_time, double dt,
                                  std::vector<double> values, std::string meta = "");

    std::size_t size() const { return values.size(); }
    double time_at(std::size_t i) const { return start_time + dt * static_cast<double>(i); }
    double end_time() const { return time_at(values.empty() ? 0 : values.size() - 1); }
};

/// Contiguous slice of a trajectory anchored at the first sample at or after
/// the requested start time. Carries up to three parent samples beyond each
/// edge so derivative stencils near the edges can stay centered.
struct AnalysisWindow {
    double t0 = 0.0;                   ///< time of the first window sample, seconds
    double dt = 0.0;                   ///< sampling interval, seconds
    std::vector<double> values;        ///< window samples
    std::vector<double> lead_context;  ///< parent samples immediately before the window
    std::vector<double> tail_context;  ///< parent samples immediately after the window

    /// Bare window with no parent context (tests, synthetic inputs).
    static AnalysisWindow from_samples(double t0, double dt, std::vector<double> values);

    std::size_t size() const { return values.size(); }
    double duration() const { return dt * static_cast<double>(values.size()); }
};

/// Per-sample voltage derivative over one window.
struct DerivativeSeries {
    DerivativeMethod method = DerivativeMethod::local_polynomial;
    double dt = 0.0;
    std::vector<double> values;  ///< per-unit/second, same length as the window
};

/// Parse a two-column CSV (header `t,v`) into a trajectory.
/// dt is the median of successive time deltas; relative jitter above 1e-6 is rejected.
VoltageTrajectory ingest_csv(std::istream& in, std::string meta = "");

/// ingest_csv on a file path (MalformedCsv if the file cannot be opened).
VoltageTrajectory ingest_csv_file(const std::string& path);

/// Write the standard CSV form (header `t,v`, 17 significant digits).
void emit_csv(const VoltageTrajectory& traj, std::ostream& out);

/// Locate the window anchor: the first time at or after the deepest
/// sub-threshold excursion where the recovery slope reaches clear_slope.
double detect_fault_clearing(const VoltageTrajectory& traj,
                             double dip_threshold = 0.7,
                             double clear_slope = 0.02);

/// Slice [first sample with time >= t0, +duration) out of the trajectory.
AnalysisWindow extract_window(const VoltageTrajectory& traj, double t0,
                              double duration = 3.0);

/// Estimate v' at every window sample. The local-polynomial method uses the
/// window's parent context (when present) to keep end stencils centered.
DerivativeSeries estimate_derivative(const AnalysisWindow& window,
                                     DerivativeMethod method = DerivativeMethod::local_polynomial);

/// Derivative of a bare sample vector (no parent context).
std::vector<double> derivative_values(const std::vector<double>& values, double dt,
                                      DerivativeMethod method = DerivativeMethod::local_polynomial);

}  // namespace stvsi
