#include "stvsi/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "stvsi/errors.hpp"

namespace stvsi {

Verdict classify(double value, double threshold, double epsilon, ComponentTag tag) {
    if (!(threshold > 0.0)) throw InvalidSpec("classification threshold must be positive");
    if (!(epsilon >= 0.0)) throw InvalidSpec("band width epsilon must be non-negative");
    Verdict v;
    v.tag = tag;
    v.margin = threshold - value;
    if (value > threshold + 0.5 * epsilon)
        v.band = Band::unstable;
    else if (value < threshold - 0.5 * epsilon)
        v.band = Band::stable;
    else
        v.band = Band::critical;
    return v;
}

double degree_of_stability(double value, double threshold) {
    if (!(threshold > 0.0)) throw InvalidSpec("stability degree needs a positive threshold");
    return 1.0 - std::max(value, 0.0) / threshold;
}

const char* band_name(Band band) {
    switch (band) {
        case Band::stable: return "stable";
        case Band::critical: return "critical";
        case Band::unstable: return "unstable";
    }
    return "unknown";
}

namespace {

/// Cached gamma-independent scoring state for one boundary signal.
RecoveryDistribution boundary_distribution(const VoltageTrajectory& traj,
                                           std::optional<double> known_t0,
                                           const CalibrationOptions& opt) {
    const double t0 = known_t0 ? *known_t0
                               : detect_fault_clearing(traj, opt.dip_threshold, opt.clear_slope);
    const AnalysisWindow window = extract_window(traj, t0, opt.window_duration);
    const Decomposition decomp = decompose(window, opt.emd);
    return recovery_distribution(decomp.residual, window.dt, opt.index);
}

double index_at(const RecoveryDistribution& rd, double gamma) {
    if (rd.degenerate) return 0.0;
    return rd.depth_weight * step1_index(rd.dist, GompertzReference{gamma, 0.5}).value;
}

}  // namespace

CalibrationResult tune_gamma1(const BoundaryPair& pair, const CalibrationOptions& opt) {
    if (!(opt.gamma_lo > 0.0) || !(opt.gamma_hi > opt.gamma_lo))
        throw InvalidSpec("gamma search range must satisfy 0 < lo < hi");
    if (opt.grid_points < 2) throw InvalidSpec("gamma grid needs >= 2 points");
    if (!(opt.epsilon > 0.0)) throw InvalidSpec("feasibility width epsilon must be positive");

    const RecoveryDistribution rd1 = boundary_distribution(pair.s1, pair.t0_s1, opt);
    const RecoveryDistribution rd2 = boundary_distribution(pair.s2, pair.t0_s2, opt);

    const auto diff = [&](double g) { return index_at(rd1, g) - index_at(rd2, g); };
    const auto feasible = [&](double g) { return std::abs(diff(g)) < opt.epsilon; };

    CalibrationResult res;
    res.epsilon = opt.epsilon;

    const auto n = static_cast<std::size_t>(opt.grid_points);
    const double log_lo = std::log(opt.gamma_lo);
    const double log_hi = std::log(opt.gamma_hi);
    std::vector<double> gs(n), ds(n);
    res.search_trace.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double f = static_cast<double>(i) / static_cast<double>(n - 1);
        gs[i] = std::exp(log_lo + f * (log_hi - log_lo));
        ds[i] = diff(gs[i]);
        res.search_trace.emplace_back(gs[i], std::abs(ds[i]));
    }

    double gamma_star;
    if (std::abs(ds[n - 1]) < opt.epsilon) {
        gamma_star = gs[n - 1];  // feasible all the way to the range top
    } else {
        // Largest feasible candidate seen on the grid, by value.
        std::optional<double> base;
        std::size_t base_idx = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (std::abs(ds[i]) < opt.epsilon) {
                base = gs[i];
                base_idx = i;
            }
        }
        // A sign change past the last feasible grid point hides a feasible
        // crossing between grid nodes; locate it by bisection on the sign.
        for (std::size_t i = n - 1; i-- > 0;) {
            if ((ds[i] < 0.0) != (ds[i + 1] < 0.0)) {
                double lo = gs[i], hi = gs[i + 1];
                double flo = ds[i];
                for (int it = 0; it < 200 && hi - lo > 1e-9; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    const double fm = diff(mid);
                    if ((fm < 0.0) == (flo < 0.0)) {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                }
                const double cross = 0.5 * (lo + hi);
                if (feasible(cross) && (!base || cross > *base)) {
                    base = cross;
                    base_idx = i;
                }
                break;  // only the rightmost sign change can beat the grid scan
            }
        }
        if (!base) {
            double dmin = std::abs(ds[0]);
            for (double d : ds) dmin = std::min(dmin, std::abs(d));
            std::ostringstream msg;
            msg << "no gamma in [" << opt.gamma_lo << ", " << opt.gamma_hi
                << "] brings the boundary indices within " << opt.epsilon
                << " (closest separation " << dmin << ")";
            throw NoFeasibleGamma(msg.str());
        }
        // Push the feasible point up to the feasibility boundary.
        double lo = *base;
        double hi = opt.gamma_hi;
        for (std::size_t i = base_idx + 1; i < n; ++i) {
            if (gs[i] > lo && !feasible(gs[i])) {
                hi = gs[i];
                break;
            }
        }
        while (hi - lo > 1e-6) {
            const double mid = 0.5 * (lo + hi);
            if (feasible(mid))
                lo = mid;
            else
                hi = mid;
        }
        gamma_star = lo;
    }

    res.gamma1 = gamma_star;
    res.d_s1 = index_at(rd1, gamma_star);
    res.d_s2 = index_at(rd2, gamma_star);
    res.d_critical_r = 0.5 * (res.d_s1 + res.d_s2);
    return res;
}

void save_calibration(const CalibrationResult& result, std::ostream& out) {
    nlohmann::json j;
    j["schema_version"] = result.schema_version;
    j["gamma1"] = result.gamma1;
    j["d_critical_r"] = result.d_critical_r;
    j["d_s1"] = result.d_s1;
    j["d_s2"] = result.d_s2;
    j["epsilon"] = result.epsilon;
    auto trace = nlohmann::json::array();
    for (const auto& [g, d] : result.search_trace) trace.push_back({g, d});
    j["search_trace"] = std::move(trace);
    out << j.dump(2) << "\n";
}

CalibrationResult load_calibration(std::istream& in) {
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidSpec(std::string("calibration file is not valid JSON: ") + e.what());
    }
    CalibrationResult res;
    try {
        res.schema_version = j.at("schema_version").get<std::string>();
        if (res.schema_version != "stvsi.calibration/1")
            throw InvalidSpec("unsupported calibration schema '" + res.schema_version + "'");
        res.gamma1 = j.at("gamma1").get<double>();
        res.d_critical_r = j.at("d_critical_r").get<double>();
        res.d_s1 = j.at("d_s1").get<double>();
        res.d_s2 = j.at("d_s2").get<double>();
        res.epsilon = j.at("epsilon").get<double>();
        for (const auto& row : j.value("search_trace", nlohmann::json::array()))
            res.search_trace.emplace_back(row.at(0).get<double>(), row.at(1).get<double>());
    } catch (const nlohmann::json::exception& e) {
        throw InvalidSpec(std::string("calibration file is missing fields: ") + e.what());
    }
    if (!(res.gamma1 > 0.0) || !(res.d_critical_r > 0.0))
        throw InvalidSpec("calibration file carries non-positive gamma1 or threshold");
    return res;
}

void save_calibration_file(const CalibrationResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InvalidSpec("cannot open calibration file for writing: " + path);
    save_calibration(result, out);
}

CalibrationResult load_calibration_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidSpec("cannot open calibration file: " + path);
    return load_calibration(in);
}

}  // namespace stvsi
