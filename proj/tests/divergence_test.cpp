#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "stvsi/divergence.hpp"
#include "stvsi/emd.hpp"
#include "stvsi/errors.hpp"
#include "stvsi/scenarios.hpp"

using namespace stvsi;

namespace {

constexpr double PI = 3.14159265358979323846;

EmpiricalDistribution two_bins(std::vector<double> mass, std::vector<double> rep) {
    EmpiricalDistribution d;
    d.edges = {0.0, 1.0, 2.0};
    d.mass = std::move(mass);
    d.representative = std::move(rep);
    return d;
}

}  // namespace

TEST_CASE("binning covers [0, max(2, max sample)] with sample-mean representatives") {
    SUBCASE("a point mass lands in one bin") {
        const std::vector<double> samples(40, 1.0);
        const auto d = empirical_distribution(samples, 32);
        REQUIRE(d.edges.size() == 33);
        CHECK(d.edges.front() == 0.0);
        CHECK(d.edges.back() == 2.0);
        double total = 0;
        int occupied = 0;
        for (std::size_t b = 0; b < d.mass.size(); ++b) {
            total += d.mass[b];
            if (d.mass[b] > 0) {
                ++occupied;
                CHECK(d.representative[b] == 1.0);
                CHECK(d.mass[b] == 1.0);
            }
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(occupied == 1);
    }
    SUBCASE("a sample above 2 stretches the grid") {
        const auto d = empirical_distribution(std::vector<double>{3.1}, 33);
        CHECK(d.edges.back() == doctest::Approx(3.1).epsilon(1e-12));
        CHECK(d.mass.back() == 1.0);
        CHECK(d.representative.back() == 3.1);
    }
    SUBCASE("representatives are within-bin means") {
        // 33 bins over [0,2]: width 2/33; 0.99 and 1.01 share the bin around 1.
        const auto d = empirical_distribution(std::vector<double>{0.99, 1.01}, 33);
        int occupied = 0;
        for (std::size_t b = 0; b < d.mass.size(); ++b) {
            if (d.mass[b] > 0) {
                ++occupied;
                CHECK(d.representative[b] == doctest::Approx(1.0).epsilon(1e-12));
            }
        }
        CHECK(occupied == 1);
    }
    SUBCASE("empty bins fall back to their center") {
        const auto d = empirical_distribution(std::vector<double>{2.0}, 2);
        CHECK(d.representative[0] == doctest::Approx(0.5).epsilon(1e-12));
    }
    CHECK_THROWS_AS(empirical_distribution(std::vector<double>{}, 33), TooShort);
    CHECK_THROWS_AS(empirical_distribution(std::vector<double>{1.0}, 0), InvalidSpec);
}

TEST_CASE("reference density evaluates the double exponential") {
    CHECK(gompertz_pdf({1.0, 0.5}, 0.5) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(gompertz_pdf({2.0, 1.0}, 0.5) ==
          doctest::Approx(std::exp(-std::exp(-1.0))).epsilon(1e-12));
    CHECK(gompertz_pdf({1.0, 1.0}, 0.0) > gompertz_pdf({1.0, 1.0}, 2.0));  // decreasing
    CHECK_THROWS_AS(gompertz_pdf({0.0, 0.5}, 1.0), InvalidSpec);
    CHECK_THROWS_AS(gompertz_pdf({1.0, -0.5}, 1.0), InvalidSpec);
}

TEST_CASE("relative entropy identities") {
    SUBCASE("KL of a distribution against itself is exactly zero") {
        const std::vector<double> p = {0.125, 0.5, 0.25, 0.125};
        CHECK(kl_divergence(p, p) == 0.0);
    }
    SUBCASE("hand-computed two-bin values") {
        CHECK(kl_divergence({1.0, 0.0}, {0.6, 0.4}) ==
              doctest::Approx(std::log(5.0 / 3.0)).epsilon(1e-9));
        CHECK(kl_divergence({1.0, 0.0}, {0.5, 0.5}) ==
              doctest::Approx(std::log(2.0)).epsilon(1e-9));
    }
    SUBCASE("non-negative over random pairs") {
        std::mt19937_64 rng(17);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<double> p(8), q(8);
            double ps = 0, qs = 0;
            for (int i = 0; i < 8; ++i) {
                p[i] = u(rng);
                q[i] = u(rng) + 1e-6;
                ps += p[i];
                qs += q[i];
            }
            for (int i = 0; i < 8; ++i) {
                p[i] /= ps;
                q[i] /= qs;
            }
            CHECK(kl_divergence(p, q) >= -1e-14);
        }
    }
    SUBCASE("mismatched grids are rejected") {
        CHECK_THROWS_AS(kl_divergence({0.5, 0.5}, {0.3, 0.3, 0.4}), GridMismatch);
        auto a = two_bins({0.5, 0.5}, {0.5, 1.5});
        auto b = a;
        b.edges[1] = 0.9;
        CHECK_THROWS_AS(kl_divergence(a, b), GridMismatch);
    }
}

TEST_CASE("the index score of a point mass collapses to the reference weight") {
    // Mass 1 at the reference shift scores exactly 1 for any gamma.
    for (double gamma : {0.3, 1.0, 4.2}) {
        auto at_shift = two_bins({0.0, 1.0}, {0.5, 1.0});
        CHECK(step1_index(at_shift, {gamma, 1.0}).value == doctest::Approx(1.0).epsilon(1e-12));
        auto at_half = two_bins({1.0, 0.0}, {0.5, 1.5});
        CHECK(step1_index(at_half, {gamma, 0.5}).value == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("a point mass off the shift scores the exponential gap") {
        auto d = two_bins({1.0, 0.0}, {0.5, 1.5});
        CHECK(step1_index(d, {1.0, 1.0}).value ==
              doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
    }
}

TEST_CASE("index score splits into entropy and cross terms") {
    auto d = two_bins({0.5, 0.5}, {0.25, 1.75});
    const GompertzReference ref{1.0, 0.5};
    const auto s = step1_index(d, ref);
    const double entropy = 2.0 * 0.5 * std::log(0.5);
    const double cross = 0.5 * std::exp(1.0 * (0.25 - 0.5)) + 0.5 * std::exp(1.0 * (1.75 - 0.5));
    CHECK(s.entropy_term == doctest::Approx(entropy).epsilon(1e-12));
    CHECK(s.cross_term == doctest::Approx(cross).epsilon(1e-12));
    CHECK(s.value == doctest::Approx(entropy + cross).epsilon(1e-12));

    SUBCASE("cross term rises with gamma when mass sits above the shift") {
        auto above = two_bins({0.0, 1.0}, {0.5, 1.8});
        CHECK(step1_index(above, {2.0, 1.0}).value > step1_index(above, {1.0, 1.0}).value);
    }
    SUBCASE("cross term falls with gamma when mass sits below the shift") {
        auto below = two_bins({1.0, 0.0}, {0.3, 1.5});
        CHECK(step1_index(below, {2.0, 1.0}).value < step1_index(below, {1.0, 1.0}).value);
    }
    CHECK_THROWS_AS(step1_index(d, {0.0, 1.0}), InvalidSpec);
}

TEST_CASE("recovery index matches the exponential closed form") {
    for (double r0 : {0.6, 0.8}) {
        for (double alpha : {0.4, 1.2}) {
            ScenarioSpec s;
            s.kind = ScenarioKind::exp_recovery;
            s.r0 = r0;
            s.alpha = alpha;
            s.duration = 6.0;
            const auto traj = gen(s);
            const auto w = extract_window(traj, 1.0, 3.0);
            const auto d = decompose(w);
            const auto iv = recovery_index(d.residual, w.dt, 1.0);
            const double oracle = std::abs(std::log(r0)) * std::exp(std::exp(-alpha) - 0.5);
            CHECK(iv.value == doctest::Approx(oracle).epsilon(0.02));
            CHECK(iv.depth_weight == doctest::Approx(std::abs(std::log(r0))).epsilon(1e-9));
            CHECK_FALSE(iv.degenerate);
            CHECK(iv.tag == ComponentTag::residual);
        }
    }
}

TEST_CASE("recovery index guards its inputs") {
    SUBCASE("flat residual is degenerate, not an error") {
        const std::vector<double> flat(100, 0.8);
        const auto iv = recovery_index(flat, 1e-3, 1.0);
        CHECK(iv.degenerate);
        CHECK(iv.value == 0.0);
        CHECK(iv.depth_weight == doctest::Approx(std::abs(std::log(0.8))).epsilon(1e-12));
    }
    SUBCASE("anchor outside (0, 1.5] is rejected") {
        std::vector<double> zero_anchor(100, 0.5);
        zero_anchor.front() = 0.0;
        CHECK_THROWS_AS(recovery_index(zero_anchor, 1e-3, 1.0), InvalidSpec);
        std::vector<double> high_anchor(100, 1.0);
        high_anchor.front() = 1.6;
        CHECK_THROWS_AS(recovery_index(high_anchor, 1e-3, 1.0), InvalidSpec);
    }
    CHECK_THROWS_AS(recovery_index(std::vector<double>(4, 0.9), 1e-3, 1.0), TooShort);
}

TEST_CASE("cached recovery distribution rescoring equals the direct index") {
    ScenarioSpec s;
    s.kind = ScenarioKind::exp_recovery;
    s.r0 = 0.7;
    s.alpha = 0.9;
    s.duration = 6.0;
    const auto traj = gen(s);
    const auto w = extract_window(traj, 1.0, 3.0);
    const auto d = decompose(w);
    const auto rd = recovery_distribution(d.residual, w.dt);
    for (double gamma : {0.5, 1.0, 3.0}) {
        const double direct = recovery_index(d.residual, w.dt, gamma).value;
        const double cached = rd.depth_weight * step1_index(rd.dist, {gamma, 0.5}).value;
        CHECK(cached == direct);
    }
}

TEST_CASE("oscillation index pins fixed-magnitude ringing at one") {
    for (double amp : {0.05, 0.1, 0.2}) {
        ScenarioSpec s;
        s.kind = ScenarioKind::fixed_osc;
        s.amp = amp;
        s.omega = 2 * PI * 1.5;
        s.duration = 3.0;
        const auto traj = gen(s);
        const auto w = extract_window(traj, 0.0, 3.0);
        const auto d = decompose(w);
        const auto osc = oscillatory_component(d);
        const auto iv = oscillation_index(osc, w.dt, 1.0);
        CHECK(iv.value == doctest::Approx(1.0).epsilon(0.01));
        CHECK(iv.tag == ComponentTag::oscillatory);
    }
}

TEST_CASE("oscillation index orders damping against growth") {
    auto score = [](ScenarioKind kind) {
        ScenarioSpec s;
        s.kind = kind;
        s.alpha = 0.5;
        s.growth = 0.5;
        s.amp = 0.1;
        s.omega = 2 * PI * 1.5;
        s.duration = 3.0;
        const auto traj = gen(s);
        const auto w = extract_window(traj, 0.0, 3.0);
        const auto d = decompose(w);
        return oscillation_index(oscillatory_component(d), w.dt, 1.0).value;
    };
    const double damped = score(ScenarioKind::damped_osc);
    const double fixed = score(ScenarioKind::fixed_osc);
    const double growing = score(ScenarioKind::growing_osc);
    CHECK(damped < 1.0);
    CHECK(fixed == doctest::Approx(1.0).epsilon(0.01));
    CHECK(growing > 1.0);
    CHECK(damped < growing);
}

TEST_CASE("zero oscillatory component is degenerate") {
    const auto iv = oscillation_index(std::vector<double>(200, 0.0), 1e-3, 1.0);
    CHECK(iv.degenerate);
    CHECK(iv.value == 0.0);
    SUBCASE("short component is degenerate too") {
        CHECK(oscillation_index(std::vector<double>{0.1, -0.1}, 1e-3, 1.0).degenerate);
    }
}

TEST_CASE("distribution CSV lists centers, mass, and reference") {
    const auto d = empirical_distribution(std::vector<double>(20, 1.0), 33);
    std::ostringstream out;
    distribution_csv(d, {1.0, 1.0}, out);
    const std::string text = out.str();
    CHECK(text.find("bin_center,mass,reference_density") == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 34);  // header + 33 bins
}
