#include <glob.h>

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stvsi/calibration.hpp"
#include "stvsi/errors.hpp"
#include "stvsi/pipeline.hpp"
#include "stvsi/scenarios.hpp"
#include "stvsi/trajectory.hpp"

namespace {

std::vector<std::string> expand_glob(const std::string& pattern) {
    glob_t g{};
    std::vector<std::string> paths;
    const int rc = glob(pattern.c_str(), GLOB_TILDE, nullptr, &g);
    if (rc == 0) {
        for (std::size_t i = 0; i < g.gl_pathc; ++i) paths.emplace_back(g.gl_pathv[i]);
    }
    globfree(&g);
    if (rc != 0 && rc != GLOB_NOMATCH)
        throw stvsi::MalformedCsv("glob expansion failed for pattern: " + pattern);
    return paths;
}

void write_text(const std::string& out_path, const std::string& text) {
    if (out_path.empty() || out_path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw stvsi::MalformedCsv("cannot open output file: " + out_path);
    out << text;
}

stvsi::ScenarioKind parse_kind(const std::string& name) {
    static const std::map<std::string, stvsi::ScenarioKind> kinds = {
        {"damped_osc", stvsi::ScenarioKind::damped_osc},
        {"fixed_osc", stvsi::ScenarioKind::fixed_osc},
        {"growing_osc", stvsi::ScenarioKind::growing_osc},
        {"exp_recovery", stvsi::ScenarioKind::exp_recovery},
        {"composite", stvsi::ScenarioKind::composite},
    };
    const auto it = kinds.find(name);
    if (it == kinds.end()) throw stvsi::InvalidSpec("unknown scenario kind: " + name);
    return it->second;
}

nlohmann::json event_json(const stvsi::StreamEvent& ev) {
    nlohmann::json j;
    switch (ev.kind) {
        case stvsi::StreamEvent::Kind::heartbeat:
            j["event"] = "heartbeat";
            j["samples_seen"] = ev.samples_seen;
            break;
        case stvsi::StreamEvent::Kind::gap:
            j["event"] = "gap";
            j["gap_seconds"] = ev.gap_seconds;
            break;
        case stvsi::StreamEvent::Kind::report:
            j["event"] = "report";
            j["report"] = nlohmann::json::parse(stvsi::report_to_json(*ev.report, false));
            break;
    }
    j["t"] = ev.t;
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"short-term voltage stability assessment"};
    app.require_subcommand(1);

    // --- gen ---------------------------------------------------------------
    auto* gen_cmd = app.add_subcommand("gen", "synthesize a trajectory CSV");
    std::string gen_kind;
    stvsi::ScenarioSpec spec;
    double gen_freq = 1.5;
    std::string gen_out;
    gen_cmd->add_option("kind", gen_kind,
                        "damped_osc|fixed_osc|growing_osc|exp_recovery|composite")
        ->required();
    gen_cmd->add_option("--dt", spec.dt, "sampling interval, s");
    gen_cmd->add_option("--duration", spec.duration, "trace length, s");
    gen_cmd->add_option("--alpha", spec.alpha, "damping / recovery rate, 1/s");
    gen_cmd->add_option("--amp", spec.amp, "oscillation amplitude, pu");
    gen_cmd->add_option("--freq", gen_freq, "oscillation frequency, Hz");
    gen_cmd->add_option("--growth", spec.growth, "growing envelope rate, 1/s");
    gen_cmd->add_option("--r0", spec.r0, "post-fault dip depth, pu");
    gen_cmd->add_option("--t-fault", spec.t_fault, "fault inception, s");
    gen_cmd->add_option("--t-clear", spec.t_clear, "fault clearing, s");
    gen_cmd->add_option("--osc-decay", spec.osc_decay, "composite oscillation damping, 1/s");
    gen_cmd->add_option("--noise", spec.noise_sigma, "Gaussian noise sigma, pu");
    gen_cmd->add_option("--seed", spec.seed, "noise RNG seed");
    gen_cmd->add_option("--out", gen_out, "output CSV path (stdout when omitted)");

    // --- assess ------------------------------------------------------------
    auto* assess_cmd = app.add_subcommand("assess", "score one trajectory CSV");
    std::string assess_input, assess_cal, assess_format = "json", assess_out;
    double assess_t0 = 0.0, assess_window = 3.0, assess_gamma2 = 1.0, assess_eps = 0.02;
    assess_cmd->add_option("--input", assess_input, "trajectory CSV")->required();
    assess_cmd->add_option("--calibration", assess_cal, "calibration JSON")->required();
    assess_cmd->add_option("--t0", assess_t0, "window anchor override, s");
    assess_cmd->add_option("--window", assess_window, "window length, s");
    assess_cmd->add_option("--gamma2", assess_gamma2, "oscillation reference exponent");
    assess_cmd->add_option("--epsilon", assess_eps, "recovery critical-band width");
    assess_cmd->add_option("--format", assess_format, "json|csv")
        ->check(CLI::IsMember({"json", "csv"}));
    assess_cmd->add_option("--out", assess_out, "output path (stdout when omitted)");

    // --- calibrate ---------------------------------------------------------
    auto* cal_cmd = app.add_subcommand("calibrate", "tune the recovery threshold");
    std::string cal_s1, cal_s2, cal_out;
    double cal_eps = 0.02, cal_t0_s1 = 0.0, cal_t0_s2 = 0.0;
    cal_cmd->add_option("--s1", cal_s1, "shallow/slow boundary trajectory CSV")->required();
    cal_cmd->add_option("--s2", cal_s2, "deep/fast boundary trajectory CSV")->required();
    cal_cmd->add_option("--epsilon", cal_eps, "feasibility width");
    cal_cmd->add_option("--t0-s1", cal_t0_s1, "known clearing time of s1, s");
    cal_cmd->add_option("--t0-s2", cal_t0_s2, "known clearing time of s2, s");
    cal_cmd->add_option("--out", cal_out, "calibration JSON path (stdout when omitted)");

    // --- batch -------------------------------------------------------------
    auto* batch_cmd = app.add_subcommand("batch", "score many trajectory CSVs");
    std::string batch_glob, batch_cal, batch_out;
    batch_cmd->add_option("--glob", batch_glob, "input path pattern")->required();
    batch_cmd->add_option("--calibration", batch_cal, "calibration JSON")->required();
    batch_cmd->add_option("--out", batch_out, "JSONL output path (stdout when omitted)");

    // --- stream ------------------------------------------------------------
    auto* stream_cmd = app.add_subcommand("stream", "score a live t,v feed");
    std::string stream_cal;
    std::size_t stream_hb = 1000;
    bool stream_stdin = false;
    stream_cmd->add_flag("--stdin", stream_stdin, "read t,v lines from standard input")
        ->required();
    stream_cmd->add_option("--calibration", stream_cal, "calibration JSON")->required();
    stream_cmd->add_option("--heartbeat", stream_hb, "samples between heartbeats (0 disables)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (gen_cmd->parsed()) {
            spec.kind = parse_kind(gen_kind);
            spec.omega = 2.0 * 3.14159265358979323846 * gen_freq;
            const stvsi::VoltageTrajectory traj = stvsi::gen(spec);
            std::ostringstream body;
            stvsi::emit_csv(traj, body);
            write_text(gen_out, body.str());
        } else if (assess_cmd->parsed()) {
            const stvsi::VoltageTrajectory traj = stvsi::ingest_csv_file(assess_input);
            stvsi::AssessConfig cfg =
                stvsi::AssessConfig::from_calibration(stvsi::load_calibration_file(assess_cal));
            cfg.window_duration = assess_window;
            cfg.gamma2 = assess_gamma2;
            cfg.epsilon = assess_eps;
            if (assess_cmd->count("--t0") > 0) cfg.t0_override = assess_t0;
            const stvsi::StabilityReport rep = stvsi::assess(traj, cfg);
            if (assess_format == "csv")
                write_text(assess_out,
                           stvsi::report_csv_header() + "\n" + stvsi::report_csv_row(rep) + "\n");
            else
                write_text(assess_out, stvsi::report_to_json(rep, true) + "\n");
        } else if (cal_cmd->parsed()) {
            stvsi::BoundaryPair pair;
            pair.s1 = stvsi::ingest_csv_file(cal_s1);
            pair.s2 = stvsi::ingest_csv_file(cal_s2);
            if (cal_cmd->count("--t0-s1") > 0) pair.t0_s1 = cal_t0_s1;
            if (cal_cmd->count("--t0-s2") > 0) pair.t0_s2 = cal_t0_s2;
            stvsi::CalibrationOptions opt;
            opt.epsilon = cal_eps;
            const stvsi::CalibrationResult res = stvsi::tune_gamma1(pair, opt);
            std::ostringstream body;
            stvsi::save_calibration(res, body);
            write_text(cal_out, body.str());
            std::cerr << "gamma1 = " << res.gamma1 << ", threshold = " << res.d_critical_r
                      << "\n";
        } else if (batch_cmd->parsed()) {
            const std::vector<std::string> paths = expand_glob(batch_glob);
            const stvsi::AssessConfig cfg =
                stvsi::AssessConfig::from_calibration(stvsi::load_calibration_file(batch_cal));
            const std::vector<stvsi::BatchItem> items = stvsi::assess_batch_files(paths, cfg);
            std::ostringstream body;
            std::size_t failures = 0;
            for (const auto& item : items) {
                nlohmann::json j;
                j["input"] = item.input;
                if (item.report) {
                    j["report"] = nlohmann::json::parse(stvsi::report_to_json(*item.report, false));
                } else {
                    j["error"] = item.error;
                    ++failures;
                }
                body << j.dump() << "\n";
            }
            write_text(batch_out, body.str());
            std::cerr << items.size() - failures << "/" << items.size() << " inputs scored\n";
        } else if (stream_cmd->parsed()) {
            stvsi::AssessConfig cfg =
                stvsi::AssessConfig::from_calibration(stvsi::load_calibration_file(stream_cal));
            stvsi::StreamAssessor assessor(cfg, stream_hb);
            std::string line;
            while (std::getline(std::cin, line)) {
                if (line.empty()) continue;
                const auto comma = line.find(',');
                if (comma == std::string::npos)
                    throw stvsi::MalformedCsv("stream line lacks a comma: " + line);
                double t, v;
                try {
                    t = std::stod(line.substr(0, comma));
                    v = std::stod(line.substr(comma + 1));
                } catch (const std::exception&) {
                    if (line.find_first_not_of(" \t") != std::string::npos &&
                        (line[0] == 't' || line[0] == 'T'))
                        continue;  // header row
                    throw stvsi::MalformedCsv("stream line is not t,v: " + line);
                }
                for (const auto& ev : assessor.push(t, v))
                    std::cout << event_json(ev).dump() << "\n" << std::flush;
            }
        }
        return 0;
    } catch (const stvsi::NoFaultDetected& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const stvsi::NoFeasibleGamma& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const stvsi::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
