#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "stvsi/errors.hpp"
#include "stvsi/pipeline.hpp"
#include "stvsi/scenarios.hpp"

using namespace stvsi;

namespace {

AssessConfig calibrated_config() {
    static const CalibrationResult cal = [] {
        CalibrationOptions copt;
        copt.epsilon = 1e-3;
        return tune_gamma1(gen_boundary_pair(0.85, 0.3, 0.55, 1.2), copt);
    }();
    return AssessConfig::from_calibration(cal);
}

ScenarioSpec recovery_spec(double r0, double alpha) {
    ScenarioSpec s;
    s.kind = ScenarioKind::exp_recovery;
    s.r0 = r0;
    s.alpha = alpha;
    return s;
}

double closed_form_recovery(double r0, double alpha, double gamma1) {
    return std::abs(std::log(r0)) * std::exp(gamma1 * (std::exp(-alpha) - 0.5));
}

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("stvsi_test_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("assessment scores a clean exponential recovery") {
    AssessConfig cfg = calibrated_config();
    cfg.t0_override = 1.0;
    const auto traj = gen(recovery_spec(0.7, 1.2));
    const auto rep = assess(traj, cfg);

    const double expected = closed_form_recovery(0.7, 1.2, cfg.gamma1);
    CHECK(rep.d_kl_r.value == doctest::Approx(expected).epsilon(0.02));
    CHECK(rep.d_kl_r.depth_weight == doctest::Approx(std::abs(std::log(0.7))).epsilon(1e-6));
    CHECK(rep.verdict_r.band == classify(rep.d_kl_r.value, cfg.recovery_threshold,
                                         cfg.epsilon, ComponentTag::residual).band);
    CHECK(rep.degree_r == doctest::Approx(1.0 - rep.d_kl_r.value / cfg.recovery_threshold)
                              .epsilon(1e-12));
    CHECK(rep.t0 == 1.0);
    CHECK(rep.gamma1 == cfg.gamma1);
    CHECK(rep.recovery_threshold == cfg.recovery_threshold);
    CHECK(rep.window_samples == 3000);
    CHECK(rep.residual_at_t0 > 0.0);
    CHECK(rep.schema_version == "stvsi.report/1");
    CHECK(rep.elapsed_seconds >= 0.0);

    SUBCASE("detection finds the same anchor on its own") {
        // Needs a plateau strictly below the dip threshold to be visible.
        const auto deep = gen(recovery_spec(0.6, 1.2));
        AssessConfig det = cfg;
        det.t0_override.reset();
        const auto by_detection = assess(deep, det);
        const auto by_anchor = assess(deep, cfg);
        CHECK(by_detection.t0 == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(reports_equal(by_detection, by_anchor));
    }
}

TEST_CASE("config wiring is validated") {
    const auto traj = gen(recovery_spec(0.7, 1.2));
    SUBCASE("an uncalibrated config is rejected") {
        AssessConfig cfg;  // recovery_threshold still 0
        CHECK_THROWS_AS(assess(traj, cfg), InvalidSpec);
    }
    SUBCASE("non-positive exponents are rejected") {
        AssessConfig cfg = calibrated_config();
        cfg.gamma2 = 0.0;
        CHECK_THROWS_AS(assess(traj, cfg), InvalidSpec);
    }
    SUBCASE("non-positive window is rejected") {
        AssessConfig cfg = calibrated_config();
        cfg.window_duration = 0.0;
        CHECK_THROWS_AS(assess(traj, cfg), InvalidSpec);
    }
    SUBCASE("from_calibration copies the tuned values") {
        CalibrationResult cal;
        cal.gamma1 = 2.5;
        cal.d_critical_r = 0.31;
        const auto cfg = AssessConfig::from_calibration(cal);
        CHECK(cfg.gamma1 == 2.5);
        CHECK(cfg.recovery_threshold == 0.31);
        CHECK(cfg.gamma2 == 1.0);  // oscillation side keeps its defaults
        CHECK(cfg.oscillation_threshold == 1.0);
    }
}

TEST_CASE("a fixed-magnitude oscillation sits on the oscillation threshold") {
    AssessConfig cfg = calibrated_config();
    cfg.t0_override = 0.0;
    ScenarioSpec s;
    s.kind = ScenarioKind::fixed_osc;
    const auto rep = assess(gen(s), cfg);
    CHECK(rep.d_kl_imf.value == doctest::Approx(1.0).epsilon(0.01));
    CHECK(rep.verdict_imf.band == Band::critical);
    CHECK(rep.imf_count >= 1);
}

TEST_CASE("oscillation index orders damping against growth") {
    AssessConfig cfg = calibrated_config();
    cfg.t0_override = 0.0;
    ScenarioSpec damped;
    damped.kind = ScenarioKind::damped_osc;
    ScenarioSpec growing;
    growing.kind = ScenarioKind::growing_osc;
    const auto rd = assess(gen(damped), cfg);
    const auto rg = assess(gen(growing), cfg);
    CHECK(rd.d_kl_imf.value < 1.0);
    CHECK(rg.d_kl_imf.value > 1.0);
    CHECK(rd.verdict_imf.band == Band::stable);
    CHECK(rg.verdict_imf.band == Band::unstable);
}

TEST_CASE("a composite fault scores both components sensibly") {
    AssessConfig cfg = calibrated_config();
    cfg.t0_override = 1.0;
    ScenarioSpec s;
    s.kind = ScenarioKind::composite;
    s.r0 = 0.75;
    s.alpha = 2.0;
    s.amp = 0.05;
    s.omega = 2.0 * 3.14159265358979323846 * 1.5;
    s.osc_decay = 1.0;
    const auto rep = assess(gen(s), cfg);

    // Oscillation leakage spreads the residual's exponent samples across
    // bins, so the entropy term drags the recovery score well below the
    // pure-recovery closed form (the score floors at zero); the verdict side
    // is what must hold: clearly stable on both components.
    CHECK(rep.d_kl_r.value >= 0.0);
    CHECK(rep.d_kl_r.value < cfg.recovery_threshold - 0.5 * cfg.epsilon);
    CHECK(rep.d_kl_r.entropy_term < 0.0);
    CHECK(rep.d_kl_r.cross_term > 0.0);
    CHECK(rep.verdict_r.band == Band::stable);
    CHECK(rep.d_kl_imf.value < 1.0);
    CHECK(rep.verdict_imf.band == Band::stable);
    CHECK(rep.degree_r > 0.0);
    CHECK(rep.degree_r <= 1.0);
    CHECK(rep.imf_count >= 1);
}

TEST_CASE("report serialization round-trips the numbers") {
    AssessConfig cfg = calibrated_config();
    cfg.t0_override = 1.0;
    const auto rep = assess(gen(recovery_spec(0.7, 1.2)), cfg);

    SUBCASE("JSON carries both component blocks") {
        const auto j = nlohmann::json::parse(report_to_json(rep));
        CHECK(j.at("schema_version").get<std::string>() == "stvsi.report/1");
        CHECK(j.at("t0").get<double>() == rep.t0);
        CHECK(j.at("recovery").at("value").get<double>() == rep.d_kl_r.value);
        CHECK(j.at("recovery").at("band").get<std::string>() ==
              band_name(rep.verdict_r.band));
        CHECK(j.at("recovery").at("degree").get<double>() == rep.degree_r);
        CHECK(j.at("oscillation").at("value").get<double>() == rep.d_kl_imf.value);
        CHECK(j.at("oscillation").at("threshold").get<double>() == 1.0);
        CHECK(j.at("window_samples").get<std::size_t>() == rep.window_samples);
        const auto compact = report_to_json(rep, false);
        CHECK(compact.find('\n') == std::string::npos);
        CHECK(nlohmann::json::parse(compact) == j);
    }
    SUBCASE("CSV header and row stay in column lockstep") {
        const std::string header = report_csv_header();
        const std::string row = report_csv_row(rep);
        const auto commas = [](const std::string& s) {
            return std::count(s.begin(), s.end(), ',');
        };
        CHECK(commas(header) == commas(row));
        CHECK(row.find(band_name(rep.verdict_r.band)) != std::string::npos);
        CHECK(header.find("d_kl_r") != std::string::npos);
    }
}

TEST_CASE("report equality ignores wall time and label only") {
    AssessConfig cfg = calibrated_config();
    cfg.t0_override = 1.0;
    const auto traj = gen(recovery_spec(0.7, 1.2));
    auto a = assess(traj, cfg);
    auto b = assess(traj, cfg);
    b.elapsed_seconds = a.elapsed_seconds + 1.0;
    b.source = "elsewhere";
    CHECK(reports_equal(a, b));
    b.d_kl_r.value += 1e-12;
    CHECK_FALSE(reports_equal(a, b));
}

TEST_CASE("batch keeps order and isolates failures") {
    AssessConfig cfg = calibrated_config();
    cfg.t0_override = 1.0;

    SUBCASE("in-memory batch") {
        std::vector<VoltageTrajectory> inputs = {
            gen(recovery_spec(0.7, 1.2)),
            gen(recovery_spec(0.8, 0.6)),
            gen(recovery_spec(0.6, 2.0)),
        };
        const auto items = assess_batch(inputs, cfg);
        REQUIRE(items.size() == 3);
        for (std::size_t i = 0; i < items.size(); ++i) {
            REQUIRE(items[i].report.has_value());
            CHECK(items[i].error.empty());
            CHECK(reports_equal(*items[i].report, assess(inputs[i], cfg)));
        }
    }
    SUBCASE("file batch records per-item errors in place") {
        TempDir dir;
        const auto good1 = (dir.path / "a.csv").string();
        const auto bad = (dir.path / "b.csv").string();
        const auto good2 = (dir.path / "c.csv").string();
        {
            std::ofstream f1(good1);
            emit_csv(gen(recovery_spec(0.7, 1.2)), f1);
            std::ofstream fb(bad);
            fb << "t,v\n0.0,not_a_number\n";
            std::ofstream f2(good2);
            emit_csv(gen(recovery_spec(0.8, 0.6)), f2);
        }
        const auto items = assess_batch_files({good1, bad, good2}, cfg);
        REQUIRE(items.size() == 3);
        CHECK(items[0].input == good1);
        CHECK(items[0].report.has_value());
        CHECK_FALSE(items[1].report.has_value());
        CHECK_FALSE(items[1].error.empty());
        CHECK(items[2].report.has_value());
        CHECK(items[2].report->source == good2);
    }
    SUBCASE("an empty batch is an error") {
        CHECK_THROWS_AS(assess_batch({}, cfg), EmptyBatch);
        CHECK_THROWS_AS(assess_batch_files({}, cfg), EmptyBatch);
    }
}

TEST_CASE("streamed assessment matches the offline pipeline") {
    // A composite fault whose plateau ripple trips the detector early; the
    // offline and streamed runs must still agree with each other exactly.
    ScenarioSpec s;
    s.kind = ScenarioKind::composite;
    s.r0 = 0.6;
    s.alpha = 0.8;
    s.amp = 0.08;
    s.omega = 2.0 * 3.14159265358979323846 * 1.2;
    s.osc_decay = 0.9;
    const auto traj = gen(s);

    AssessConfig cfg = calibrated_config();
    const auto offline = assess(traj, cfg);

    StreamAssessor stream(cfg, 1000);
    std::vector<StabilityReport> reports;
    std::size_t heartbeats = 0;
    double emit_t = -1.0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        for (const auto& ev : stream.push(traj.time_at(i), traj.values[i])) {
            if (ev.kind == StreamEvent::Kind::report) {
                reports.push_back(*ev.report);
                emit_t = ev.t;
            } else if (ev.kind == StreamEvent::Kind::heartbeat) {
                ++heartbeats;
            }
        }
    }
    REQUIRE(reports.size() == 1);
    CHECK(reports_equal(reports[0], offline));
    // The report lands on the first sample that completes the window.
    CHECK(emit_t == doctest::Approx(offline.t0 + cfg.window_duration).epsilon(1e-6));
    CHECK(heartbeats == traj.size() / 1000);
    CHECK(stream.samples_seen() == traj.size());
}

TEST_CASE("stream handles gaps, re-arming, and bad feeds") {
    AssessConfig cfg = calibrated_config();

    SUBCASE("a spacing jump raises a gap event and abandons the window") {
        StreamAssessor stream(cfg, 1000000);
        const double dt = 1e-3;
        bool gap_seen = false;
        std::size_t reports = 0;
        // A full fault signature (dip, then a recovery ramp) arms the
        // detector, but the 3 s analysis window is still far from complete...
        for (int i = 0; i < 700; ++i) {
            const double t = i * dt;
            double v = 1.0;
            if (i >= 300 && i < 500) v = 0.5;
            if (i >= 500) v = 0.5 + 2.0 * (t - 0.5);
            for (const auto& ev : stream.push(t, v))
                if (ev.kind == StreamEvent::Kind::report) ++reports;
        }
        // ...when the feed drops out for 10 sample periods.
        for (const auto& ev : stream.push(0.699 + 10 * dt, 1.0)) {
            if (ev.kind == StreamEvent::Kind::gap) {
                gap_seen = true;
                CHECK(ev.gap_seconds == doctest::Approx(10 * dt).epsilon(1e-6));
            }
            if (ev.kind == StreamEvent::Kind::report) ++reports;
        }
        CHECK(gap_seen);
        CHECK(stream.buffered() == 1);  // only the post-gap sample remains
        // The pre-gap fault never completes a window.
        for (int i = 1; i <= 3500; ++i)
            for (const auto& ev : stream.push(0.699 + (10 + i) * dt, 1.0))
                if (ev.kind == StreamEvent::Kind::report) ++reports;
        CHECK(reports == 0);
    }

    SUBCASE("the detector re-arms after each emission") {
        ScenarioSpec s;
        s.kind = ScenarioKind::exp_recovery;
        s.r0 = 0.6;
        s.alpha = 1.2;
        const auto traj = gen(s);  // 6 s: fault at 0.5, cleared at 1.0

        StreamAssessor stream(cfg, 1000000);
        std::size_t reports = 0;
        const auto feed = [&](double offset) {
            for (std::size_t i = 0; i < traj.size(); ++i)
                for (const auto& ev : stream.push(offset + traj.time_at(i), traj.values[i]))
                    if (ev.kind == StreamEvent::Kind::report) ++reports;
        };
        feed(0.0);
        CHECK(reports == 1);
        feed(traj.end_time() + traj.dt);  // same event again, later in time
        CHECK(reports == 2);
    }

    SUBCASE("timestamps must strictly increase") {
        StreamAssessor stream(cfg);
        stream.push(0.0, 1.0);
        stream.push(0.001, 1.0);
        CHECK_THROWS_AS(stream.push(0.001, 1.0), InvalidSpec);
        CHECK_THROWS_AS(stream.push(0.0005, 1.0), InvalidSpec);
    }

    SUBCASE("an unconfigured stream is rejected up front") {
        AssessConfig blank;  // threshold 0
        CHECK_THROWS_AS((StreamAssessor{blank}), InvalidSpec);
    }
}
