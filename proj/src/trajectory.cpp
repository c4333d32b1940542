#include "stvsi/trajectory.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "stvsi/errors.hpp"

namespace stvsi {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

double parse_field(const std::string& field, std::size_t line_no) {
    const std::string f = trim(field);
    if (f.empty()) throw MalformedCsv("empty field on line " + std::to_string(line_no));
    try {
        std::size_t pos = 0;
        double x = std::stod(f, &pos);
        if (pos != f.size())
            throw MalformedCsv("trailing junk in '" + f + "' on line " + std::to_string(line_no));
        return x;
    } catch (const MalformedCsv&) {
        throw;
    } catch (const std::exception&) {
        throw MalformedCsv("non-numeric field '" + f + "' on line " + std::to_string(line_no));
    }
}

}  // namespace

VoltageTrajectory VoltageTrajectory::make(double start_time, double dt,
                                          std::vector<double> values, std::string meta) {
    if (!(dt > 0.0)) throw MalformedCsv("sampling interval must be positive");
    if (values.size() < 8)
        throw TooShort("trajectory needs at least 8 samples, got " + std::to_string(values.size()));
    for (double v : values) {
        if (!std::isfinite(v)) throw MalformedCsv("non-finite voltage sample");
        if (v < 0.0) throw MalformedCsv("negative voltage magnitude");
    }
    VoltageTrajectory t;
    t.start_time = start_time;
    t.dt = dt;
    t.values = std::move(values);
    t.meta = std::move(meta);
    return t;
}

AnalysisWindow AnalysisWindow::from_samples(double t0, double dt, std::vector<double> values) {
    AnalysisWindow w;
    w.t0 = t0;
    w.dt = dt;
    w.values = std::move(values);
    return w;
}

VoltageTrajectory ingest_csv(std::istream& in, std::string meta) {
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    std::vector<double> times;
    std::vector<double> volts;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string t = trim(line);
        if (t.empty()) continue;
        if (!header_seen) {
            std::string lowered = t;
            std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                           [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
            lowered.erase(std::remove_if(lowered.begin(), lowered.end(),
                                         [](unsigned char c) { return std::isspace(c); }),
                          lowered.end());
            if (lowered != "t,v")
                throw MalformedCsv("expected header 't,v' on line " + std::to_string(line_no) +
                                   ", got '" + t + "'");
            header_seen = true;
            continue;
        }
        const auto comma = t.find(',');
        if (comma == std::string::npos || t.find(',', comma + 1) != std::string::npos)
            throw MalformedCsv("expected two comma-separated fields on line " +
                               std::to_string(line_no));
        times.push_back(parse_field(t.substr(0, comma), line_no));
        volts.push_back(parse_field(t.substr(comma + 1), line_no));
    }
    if (!header_seen) throw MalformedCsv("missing header 't,v'");
    if (times.size() < 8)
        throw TooShort("need at least 8 rows, got " + std::to_string(times.size()));

    std::vector<double> deltas(times.size() - 1);
    for (std::size_t i = 0; i + 1 < times.size(); ++i) deltas[i] = times[i + 1] - times[i];
    std::vector<double> sorted = deltas;
    std::sort(sorted.begin(), sorted.end());
    const double dt = sorted[sorted.size() / 2];
    if (!(dt > 0.0)) throw NonUniformSampling("non-increasing timestamps");
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        if (std::abs(deltas[i] / dt - 1.0) > 1e-6)
            throw NonUniformSampling("time delta " + std::to_string(deltas[i]) + " at row " +
                                     std::to_string(i + 2) + " deviates from dt=" +
                                     std::to_string(dt));
    }
    return VoltageTrajectory::make(times.front(), dt, std::move(volts), std::move(meta));
}

VoltageTrajectory ingest_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MalformedCsv("cannot open '" + path + "'");
    return ingest_csv(in, path);
}

void emit_csv(const VoltageTrajectory& traj, std::ostream& out) {
    out << "t,v\n";
    char buf[64];
    for (std::size_t i = 0; i < traj.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", traj.time_at(i), traj.values[i]);
        out << buf;
    }
}

double detect_fault_clearing(const VoltageTrajectory& traj, double dip_threshold,
                             double clear_slope) {
    if (!(dip_threshold > 0.0 && dip_threshold < 1.0))
        throw InvalidSpec("dip_threshold must lie in (0,1)");
    if (!(clear_slope > 0.0)) throw InvalidSpec("clear_slope must be positive");

    const auto& v = traj.values;
    std::size_t deepest = v.size();
    double vmin = dip_threshold;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] < vmin) {
            vmin = v[i];
            deepest = i;
        }
    }
    if (deepest == v.size())
        throw NoFaultDetected("no sample below " + std::to_string(dip_threshold) + " pu");

    const std::vector<double> d = derivative_values(v, traj.dt, DerivativeMethod::central_difference);
    for (std::size_t i = deepest; i < v.size(); ++i) {
        if (d[i] >= clear_slope) return traj.time_at(i);
    }
    throw NoFaultDetected("no recovery slope >= " + std::to_string(clear_slope) +
                          " pu/s after the deepest excursion");
}

AnalysisWindow extract_window(const VoltageTrajectory& traj, double t0, double duration) {
    if (!(duration > 0.0)) throw WindowOutOfRange("duration must be positive");
    const double offset = (t0 - traj.start_time) / traj.dt;
    if (offset < -1e-6)
        throw WindowOutOfRange("window anchor " + std::to_string(t0) +
                               " s precedes the trajectory start " +
                               std::to_string(traj.start_time) + " s");
    std::size_t i0 = 0;
    if (offset > 0.0) {
        const double c = std::ceil(offset - 1e-9);
        if (c > static_cast<double>(traj.size())) throw WindowOutOfRange("window start beyond trajectory end");
        i0 = static_cast<std::size_t>(c);
    }
    const auto n = static_cast<std::size_t>(std::llround(duration / traj.dt));
    if (n < 1) throw WindowOutOfRange("window shorter than one sample");
    if (i0 + n > traj.size())
        throw WindowOutOfRange("window [" + std::to_string(t0) + ", +" + std::to_string(duration) +
                               " s) extends past the trajectory end " +
                               std::to_string(traj.end_time()));

    AnalysisWindow w;
    w.t0 = traj.time_at(i0);
    w.dt = traj.dt;
    w.values.assign(traj.values.begin() + static_cast<std::ptrdiff_t>(i0),
                    traj.values.begin() + static_cast<std::ptrdiff_t>(i0 + n));
    const std::size_t lead = std::min<std::size_t>(3, i0);
    w.lead_context.assign(traj.values.begin() + static_cast<std::ptrdiff_t>(i0 - lead),
                          traj.values.begin() + static_cast<std::ptrdiff_t>(i0));
    const std::size_t tail = std::min<std::size_t>(3, traj.size() - (i0 + n));
    w.tail_context.assign(traj.values.begin() + static_cast<std::ptrdiff_t>(i0 + n),
                          traj.values.begin() + static_cast<std::ptrdiff_t>(i0 + n + tail));
    return w;
}

namespace {

/// Derivative weights of a least-squares quadratic fit over nodes 0..m-1,
/// evaluated at node position p (in node units; divide the result by dt).
std::vector<double> quad_fit_deriv_weights(std::size_t m, double p) {
    // Normal-equation matrix M[r][c] = sum x^(r+c) over x = 0..m-1.
    std::array<double, 5> s{};  // power sums x^0..x^4
    for (std::size_t i = 0; i < m; ++i) {
        const double x = static_cast<double>(i);
        double xp = 1.0;
        for (int k = 0; k <= 4; ++k) {
            s[static_cast<std::size_t>(k)] += xp;
            xp *= x;
        }
    }
    double M[3][4];  // augmented per RHS column later; store just M here
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) M[r][c] = s[static_cast<std::size_t>(r + c)];

    // Solve M * beta = X^T e_j for each stencil node j; weight_j = beta1 + 2p*beta2.
    std::vector<double> w(m);
    for (std::size_t j = 0; j < m; ++j) {
        const double xj = static_cast<double>(j);
        double rhs[3] = {1.0, xj, xj * xj};
        double a[3][4];
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) a[r][c] = M[r][c];
            a[r][3] = rhs[r];
        }
        for (int col = 0; col < 3; ++col) {  // Gaussian elimination, partial pivoting
            int piv = col;
            for (int r = col + 1; r < 3; ++r)
                if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
            for (int c = col; c < 4; ++c) std::swap(a[col][c], a[piv][c]);
            for (int r = col + 1; r < 3; ++r) {
                const double f = a[r][col] / a[col][col];
                for (int c = col; c < 4; ++c) a[r][c] -= f * a[col][c];
            }
        }
        double beta[3];
        for (int r = 2; r >= 0; --r) {
            double acc = a[r][3];
            for (int c = r + 1; c < 3; ++c) acc -= a[r][c] * beta[c];
            beta[r] = acc / a[r][r];
        }
        w[j] = beta[1] + 2.0 * p * beta[2];
    }
    return w;
}

std::vector<double> central_difference(const std::vector<double>& v, double dt) {
    const std::size_t n = v.size();
    std::vector<double> out(n);
    out[0] = (v[1] - v[0]) / dt;
    for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (v[i + 1] - v[i - 1]) / (2.0 * dt);
    out[n - 1] = (v[n - 1] - v[n - 2]) / dt;
    return out;
}

std::vector<double> local_polynomial(const std::vector<double>& v, double dt,
                                     const std::vector<double>& lead,
                                     const std::vector<double>& tail) {
    std::vector<double> ext;
    ext.reserve(lead.size() + v.size() + tail.size());
    ext.insert(ext.end(), lead.begin(), lead.end());
    ext.insert(ext.end(), v.begin(), v.end());
    ext.insert(ext.end(), tail.begin(), tail.end());

    const std::size_t m = std::min<std::size_t>(7, ext.size());
    // Cache the m distinct weight vectors (one per in-stencil position).
    std::vector<std::vector<double>> wcache(m);
    for (std::size_t p = 0; p < m; ++p) wcache[p] = quad_fit_deriv_weights(m, static_cast<double>(p));

    const std::size_t n = v.size();
    const std::size_t L = lead.size();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = i + L;
        const std::size_t half = (m - 1) / 2;
        std::size_t s = j > half ? j - half : 0;
        s = std::min(s, ext.size() - m);
        const auto& w = wcache[j - s];
        double acc = 0.0;
        for (std::size_t k = 0; k < m; ++k) acc += w[k] * ext[s + k];
        out[i] = acc / dt;
    }
    return out;
}

}  // namespace

DerivativeSeries estimate_derivative(const AnalysisWindow& window, DerivativeMethod method) {
    const std::size_t min_len = method == DerivativeMethod::local_polynomial ? 5 : 3;
    if (window.size() < min_len)
        throw TooShort("derivative needs >= " + std::to_string(min_len) + " samples, window has " +
                       std::to_string(window.size()));
    DerivativeSeries d;
    d.method = method;
    d.dt = window.dt;
    d.values = method == DerivativeMethod::central_difference
                   ? central_difference(window.values, window.dt)
                   : local_polynomial(window.values, window.dt, window.lead_context,
                                      window.tail_context);
    return d;
}

std::vector<double> derivative_values(const std::vector<double>& values, double dt,
                                      DerivativeMethod method) {
    const std::size_t min_len = method == DerivativeMethod::local_polynomial ? 5 : 3;
    if (values.size() < min_len)
        throw TooShort("derivative needs >= " + std::to_string(min_len) + " samples, got " +
                       std::to_string(values.size()));
    return method == DerivativeMethod::central_difference ? central_difference(values, dt)
                                                          : local_polynomial(values, dt, {}, {});
}

}  // namespace stvsi
