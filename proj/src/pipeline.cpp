#include "stvsi/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <future>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "stvsi/errors.hpp"

namespace stvsi {

AssessConfig AssessConfig::from_calibration(const CalibrationResult& cal) {
    AssessConfig cfg;
    cfg.gamma1 = cal.gamma1;
    cfg.recovery_threshold = cal.d_critical_r;
    return cfg;
}

StabilityReport assess(const VoltageTrajectory& traj, const AssessConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    if (!(cfg.recovery_threshold > 0.0))
        throw InvalidSpec("assessment requires a calibrated recovery threshold");
    if (!(cfg.window_duration > 0.0)) throw InvalidSpec("window duration must be positive");
    if (!(cfg.gamma1 > 0.0) || !(cfg.gamma2 > 0.0))
        throw InvalidSpec("reference exponents must be positive");

    const double t0 = cfg.t0_override
                          ? *cfg.t0_override
                          : detect_fault_clearing(traj, cfg.dip_threshold, cfg.clear_slope);
    const AnalysisWindow window = extract_window(traj, t0, cfg.window_duration);
    const Decomposition decomp = decompose(window, cfg.emd);
    const std::vector<double> osc = oscillatory_component(decomp);

    StabilityReport rep;
    rep.source = traj.meta;
    rep.t0 = window.t0;
    rep.dt = window.dt;
    rep.window_samples = window.size();
    rep.imf_count = decomp.imfs.size();
    rep.residual_at_t0 = decomp.residual.front();
    rep.gamma1 = cfg.gamma1;
    rep.gamma2 = cfg.gamma2;
    rep.recovery_threshold = cfg.recovery_threshold;
    rep.oscillation_threshold = cfg.oscillation_threshold;
    rep.epsilon = cfg.epsilon;
    rep.oscillation_epsilon = cfg.oscillation_epsilon;

    rep.d_kl_r = recovery_index(decomp.residual, window.dt, cfg.gamma1, cfg.index);
    rep.d_kl_imf = oscillation_index(osc, window.dt, cfg.gamma2, cfg.index);
    rep.verdict_r =
        classify(rep.d_kl_r.value, cfg.recovery_threshold, cfg.epsilon, ComponentTag::residual);
    rep.verdict_imf = classify(rep.d_kl_imf.value, cfg.oscillation_threshold,
                               cfg.oscillation_epsilon, ComponentTag::oscillatory);
    rep.degree_r = degree_of_stability(rep.d_kl_r.value, cfg.recovery_threshold);
    rep.degree_imf = degree_of_stability(rep.d_kl_imf.value, cfg.oscillation_threshold);

    rep.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

namespace {

bool index_values_equal(const IndexValue& a, const IndexValue& b) {
    return a.value == b.value && a.tag == b.tag && a.depth_weight == b.depth_weight &&
           a.entropy_term == b.entropy_term && a.cross_term == b.cross_term &&
           a.degenerate == b.degenerate;
}

bool verdicts_equal(const Verdict& a, const Verdict& b) {
    return a.band == b.band && a.margin == b.margin && a.tag == b.tag;
}

}  // namespace

bool reports_equal(const StabilityReport& a, const StabilityReport& b) {
    // t0 gets a sub-sample tolerance: a streamed buffer anchors its time axis
    // at the buffer head, so the detected clearing time can differ by one ulp
    // of accumulated offset while every analysed sample stays identical.
    return a.schema_version == b.schema_version && std::abs(a.t0 - b.t0) <= 1e-9 &&
           a.dt == b.dt && a.window_samples == b.window_samples && a.imf_count == b.imf_count &&
           a.residual_at_t0 == b.residual_at_t0 && a.gamma1 == b.gamma1 && a.gamma2 == b.gamma2 &&
           a.recovery_threshold == b.recovery_threshold &&
           a.oscillation_threshold == b.oscillation_threshold && a.epsilon == b.epsilon &&
           a.oscillation_epsilon == b.oscillation_epsilon &&
           index_values_equal(a.d_kl_r, b.d_kl_r) && index_values_equal(a.d_kl_imf, b.d_kl_imf) &&
           verdicts_equal(a.verdict_r, b.verdict_r) && verdicts_equal(a.verdict_imf, b.verdict_imf) &&
           a.degree_r == b.degree_r && a.degree_imf == b.degree_imf;
}

namespace {

nlohmann::json index_json(const IndexValue& v) {
    return {{"value", v.value},
            {"depth_weight", v.depth_weight},
            {"entropy_term", v.entropy_term},
            {"cross_term", v.cross_term},
            {"degenerate", v.degenerate}};
}

}  // namespace

std::string report_to_json(const StabilityReport& rep, bool pretty) {
    nlohmann::json j;
    j["schema_version"] = rep.schema_version;
    j["source"] = rep.source;
    j["t0"] = rep.t0;
    j["dt"] = rep.dt;
    j["window_samples"] = rep.window_samples;
    j["imf_count"] = rep.imf_count;
    j["residual_at_t0"] = rep.residual_at_t0;
    j["recovery"] = index_json(rep.d_kl_r);
    j["recovery"]["gamma"] = rep.gamma1;
    j["recovery"]["threshold"] = rep.recovery_threshold;
    j["recovery"]["epsilon"] = rep.epsilon;
    j["recovery"]["band"] = band_name(rep.verdict_r.band);
    j["recovery"]["margin"] = rep.verdict_r.margin;
    j["recovery"]["degree"] = rep.degree_r;
    j["oscillation"] = index_json(rep.d_kl_imf);
    j["oscillation"]["gamma"] = rep.gamma2;
    j["oscillation"]["threshold"] = rep.oscillation_threshold;
    j["oscillation"]["epsilon"] = rep.oscillation_epsilon;
    j["oscillation"]["band"] = band_name(rep.verdict_imf.band);
    j["oscillation"]["margin"] = rep.verdict_imf.margin;
    j["oscillation"]["degree"] = rep.degree_imf;
    j["elapsed_seconds"] = rep.elapsed_seconds;
    return pretty ? j.dump(2) : j.dump();
}

std::string report_csv_header() {
    return "source,t0,dt,window_samples,imf_count,residual_at_t0,"
           "d_kl_r,band_r,margin_r,degree_r,"
           "d_kl_imf,band_imf,margin_imf,degree_imf";
}

std::string report_csv_row(const StabilityReport& rep) {
    std::string source = rep.source;
    std::replace(source.begin(), source.end(), ',', ';');
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "%s,%.17g,%.17g,%zu,%zu,%.17g,%.17g,%s,%.17g,%.17g,%.17g,%s,%.17g,%.17g",
                  source.c_str(), rep.t0, rep.dt, rep.window_samples, rep.imf_count,
                  rep.residual_at_t0, rep.d_kl_r.value, band_name(rep.verdict_r.band),
                  rep.verdict_r.margin, rep.degree_r, rep.d_kl_imf.value,
                  band_name(rep.verdict_imf.band), rep.verdict_imf.margin, rep.degree_imf);
    return buf;
}

namespace {

template <typename Work>
void run_indexed(std::size_t n, Work&& work) {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t workers = std::min<std::size_t>(hw, n);
    std::atomic<std::size_t> next{0};
    std::vector<std::future<void>> fs;
    fs.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        fs.push_back(std::async(std::launch::async, [&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) work(i);
        }));
    }
    for (auto& f : fs) f.get();
}

}  // namespace

std::vector<BatchItem> assess_batch(const std::vector<VoltageTrajectory>& trajectories,
                                    const AssessConfig& cfg) {
    if (trajectories.empty()) throw EmptyBatch("batch holds no trajectories");
    std::vector<BatchItem> out(trajectories.size());
    run_indexed(trajectories.size(), [&](std::size_t i) {
        out[i].input = trajectories[i].meta;
        try {
            out[i].report = assess(trajectories[i], cfg);
        } catch (const std::exception& e) {
            out[i].error = e.what();
        }
    });
    return out;
}

std::vector<BatchItem> assess_batch_files(const std::vector<std::string>& paths,
                                          const AssessConfig& cfg) {
    if (paths.empty()) throw EmptyBatch("batch holds no inputs");
    std::vector<BatchItem> out(paths.size());
    run_indexed(paths.size(), [&](std::size_t i) {
        out[i].input = paths[i];
        try {
            out[i].report = assess(ingest_csv_file(paths[i]), cfg);
        } catch (const std::exception& e) {
            out[i].error = e.what();
        }
    });
    return out;
}

StreamAssessor::StreamAssessor(AssessConfig cfg, std::size_t heartbeat_every)
    : cfg_(std::move(cfg)), heartbeat_every_(heartbeat_every) {
    if (!(cfg_.recovery_threshold > 0.0))
        throw InvalidSpec("streaming assessment requires a calibrated recovery threshold");
}

VoltageTrajectory StreamAssessor::materialize() const {
    std::vector<double> v(buf_.size());
    for (std::size_t i = 0; i < buf_.size(); ++i) v[i] = buf_[i].second;
    return VoltageTrajectory::make(buf_.front().first, dt_, std::move(v), "stream");
}

std::vector<StreamEvent> StreamAssessor::push(double t, double v) {
    std::vector<StreamEvent> events;
    if (have_last_) {
        const double delta = t - last_t_;
        if (!(delta > 0.0)) throw InvalidSpec("stream timestamps must be strictly increasing");
        if (dt_ == 0.0) {
            dt_ = delta;
        } else if (delta > 3.0 * dt_ + 1e-12) {
            StreamEvent gap;
            gap.kind = StreamEvent::Kind::gap;
            gap.t = t;
            gap.gap_seconds = delta;
            gap.samples_seen = seen_;
            events.push_back(gap);
            buf_.clear();
            pending_t0_.reset();
        }
    }
    last_t_ = t;
    have_last_ = true;
    buf_.emplace_back(t, v);
    ++seen_;

    const double keep = 2.0 * cfg_.window_duration;
    while (!buf_.empty() && t - buf_.front().first > keep + 1e-12) buf_.pop_front();

    if (dt_ > 0.0 && buf_.size() >= 16) {
        if (!pending_t0_) {
            double lo = buf_.front().second;
            for (const auto& [bt, bv] : buf_) lo = std::min(lo, bv);
            if (lo < cfg_.dip_threshold) {
                try {
                    pending_t0_ =
                        detect_fault_clearing(materialize(), cfg_.dip_threshold, cfg_.clear_slope);
                } catch (const NoFaultDetected&) {
                    // recovery slope not visible yet; keep buffering
                }
            }
        }
        if (pending_t0_ && t >= *pending_t0_ + cfg_.window_duration - 1e-12) {
            try {
                StreamEvent ev;
                ev.kind = StreamEvent::Kind::report;
                ev.t = t;
                ev.samples_seen = seen_;
                ev.report = assess(materialize(), cfg_);
                events.push_back(ev);
                buf_.clear();  // re-arm for the next fault
                pending_t0_.reset();
            } catch (const Error&) {
                // window not extractable from the buffered span; keep feeding
            }
        }
    }

    if (heartbeat_every_ > 0 && seen_ % heartbeat_every_ == 0) {
        StreamEvent hb;
        hb.kind = StreamEvent::Kind::heartbeat;
        hb.t = t;
        hb.samples_seen = seen_;
        events.push_back(hb);
    }
    return events;
}

}  // namespace stvsi
