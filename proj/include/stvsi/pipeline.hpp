#pragma once

#include <cstddef>
#include <deque>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stvsi/calibration.hpp"
#include "stvsi/divergence.hpp"
#include "stvsi/emd.hpp"
#include "stvsi/trajectory.hpp"

namespace stvsi {

/// End-to-end assessment controls. recovery_threshold must be set (from a
/// calibration run) before assess() will produce verdicts.
struct AssessConfig {
    double window_duration = 3.0;        ///< s of post-clearing signal analysed
    double gamma1 = 1.0;                 ///< recovery reference exponent
    double gamma2 = 1.0;                 ///< oscillation reference exponent
    double recovery_threshold = 0.0;     ///< calibrated D_critical for the residual
    double oscillation_threshold = 1.0;  ///< fixed-magnitude oscillation scores exactly 1
    double epsilon = 0.02;               ///< recovery critical-band width
    double oscillation_epsilon = 0.02;   ///< oscillation critical-band width
    double dip_threshold = 0.7;          ///< fault detector: dip level, pu
    double clear_slope = 0.02;           ///< fault detector: recovery slope, pu/s
    std::optional<double> t0_override;   ///< skip detection and anchor here
    IndexOptions index;                  ///< binning / derivative controls
    EmdConfig emd;                       ///< decomposition controls

    /// Copy gamma1 and the recovery threshold out of a calibration result.
    static AssessConfig from_calibration(const CalibrationResult& cal);
};

/// One stability assessment: both indices, verdicts, and window provenance.
struct StabilityReport {
    std::string schema_version = "stvsi.report/1";
    std::string source;          ///< trajectory label (file path, scenario, "stream")
    double t0 = 0.0;             ///< analysis window anchor, s
    double dt = 0.0;             ///< sampling interval, s
    std::size_t window_samples = 0;
    std::size_t imf_count = 0;
    double residual_at_t0 = 0.0;
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double recovery_threshold = 0.0;
    double oscillation_threshold = 0.0;
    double epsilon = 0.0;
    double oscillation_epsilon = 0.0;
    IndexValue d_kl_r;
    IndexValue d_kl_imf;
    Verdict verdict_r;
    Verdict verdict_imf;
    double degree_r = 0.0;
    double degree_imf = 0.0;
    double elapsed_seconds = 0.0;  ///< wall time; excluded from equality
};

/// Run the full pipeline on one trajectory: locate (or accept) the clearing
/// time, extract the analysis window, decompose, score both components, and
/// classify against the configured thresholds.
StabilityReport assess(const VoltageTrajectory& traj, const AssessConfig& cfg);

/// Field-wise equality excluding wall time and the source label.
bool reports_equal(const StabilityReport& a, const StabilityReport& b);

/// Serialize one report (JSON object / one CSV row with header).
std::string report_to_json(const StabilityReport& rep, bool pretty = true);
std::string report_csv_header();
std::string report_csv_row(const StabilityReport& rep);

/// One batch entry: either a report or the error that stopped it.
struct BatchItem {
    std::string input;
    std::optional<StabilityReport> report;
    std::string error;  ///< empty on success
};

/// Assess many inputs concurrently; results keep input order and each item
/// carries its own failure without aborting the rest. Throws EmptyBatch when
/// there is nothing to do.
std::vector<BatchItem> assess_batch(const std::vector<VoltageTrajectory>& trajectories,
                                    const AssessConfig& cfg);
std::vector<BatchItem> assess_batch_files(const std::vector<std::string>& paths,
                                          const AssessConfig& cfg);

/// Incremental feed events.
struct StreamEvent {
    enum class Kind { heartbeat, gap, report };
    Kind kind = Kind::heartbeat;
    double t = 0.0;                        ///< time of the sample that triggered the event
    std::size_t samples_seen = 0;          ///< total pushes so far
    double gap_seconds = 0.0;              ///< observed spacing for gap events
    std::optional<StabilityReport> report; ///< set for report events
};

/// Sample-at-a-time assessment. Buffers twice the analysis window, watches
/// for a fault clearing, and emits a report at the first sample that
/// completes the window; the buffer then resets so a later fault re-arms the
/// detector. A spacing jump beyond 3x the nominal interval raises a gap event
/// and resets the buffer. Heartbeats are emitted every heartbeat_every pushes.
class StreamAssessor {
public:
    explicit StreamAssessor(AssessConfig cfg, std::size_t heartbeat_every = 1000);

    /// Feed one sample; timestamps must be strictly increasing.
    std::vector<StreamEvent> push(double t, double v);

    std::size_t samples_seen() const { return seen_; }
    std::size_t buffered() const { return buf_.size(); }

private:
    VoltageTrajectory materialize() const;

    AssessConfig cfg_;
    std::size_t heartbeat_every_;
    std::deque<std::pair<double, double>> buf_;
    double dt_ = 0.0;
    bool have_last_ = false;
    double last_t_ = 0.0;
    std::size_t seen_ = 0;
    std::optional<double> pending_t0_;
};

}  // namespace stvsi
