#include "mmo/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "mmo/drift.hpp"
#include "mmo/local.hpp"

namespace mmo {

namespace {

std::vector<double> lattice(double lo, double hi, int steps) {
    std::vector<double> v;
    v.reserve(steps);
    if (steps == 1) {
        v.push_back(lo);
        return v;
    }
    for (int i = 0; i < steps; ++i)
        v.push_back(lo + (hi - lo) * double(i) / double(steps - 1));
    return v;
}

void validate(const GridSpec& grid) {
    if (grid.k_steps < 1 || grid.lambda_steps < 1)
        throw std::invalid_argument("grid steps must be positive");
    if (!(grid.k_min <= grid.k_max) || !(grid.lambda_min <= grid.lambda_max))
        throw std::invalid_argument("grid ranges must be nonempty");
    if (!(grid.eps_hat > 0.0) || !(grid.delta > 0.0))
        throw std::invalid_argument("perturbation sizes must be positive");
    if (!(grid.strip_fraction >= 0.0) || !(grid.strip_fraction < 1.0))
        throw std::invalid_argument("strip fraction must lie in [0, 1)");
}

SweepPoint run_grid_point(const GridSpec& grid, double k, double lambda) {
    SweepPoint pt;
    pt.k = k;
    pt.lambda = lambda;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const KoperParams kp{k, lambda, grid.eps_hat, grid.delta};
        const auto p = koper_to_normal_form(kp);
        const double t_end =
            grid.t_end > 0.0 ? grid.t_end : 50.0 / grid.delta;
        const auto traj =
            integrate(make_system(p), grid.initial, 0.0, t_end, grid.config);
        if (traj.status != IntegrationStatus::Ok)
            throw std::runtime_error("integration failed: " + traj.note);
        const auto res = classify_trajectory(
            p, transient_strip(traj, grid.strip_fraction), grid.classify);
        pt.regime = res.regime;
        pt.farey = res.farey;
        pt.ok = true;
    } catch (const std::exception& e) {
        pt.ok = false;
        pt.error = e.what();
    }
    pt.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return pt;
}

double overlay_or_nan(double (*f)(const KoperParams&, Side),
                      const KoperParams& kp, Side side) {
    try {
        return f(kp, side);
    } catch (const std::exception&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// Pieces of the fast nullcline n(v)^4 = P(v)/Q(v) at frozen inactivation.
double nullcline_p(const HHParams& hp, double v, double h_ref) {
    const double m = hh_m_inf(100.0 * v);
    return hp.I / hp.k_scale - (v - hp.E_na) * m * m * m * h_ref -
           hp.g_l * (v - hp.E_l);
}

double nullcline_p_prime(const HHParams& hp, double v, double h_ref) {
    const auto r = hh_rates(100.0 * v);
    const double m = r.am / (r.am + r.bm);
    const double dm = 100.0 * (r.dam * r.bm - r.am * r.dbm) /
                      ((r.am + r.bm) * (r.am + r.bm));
    return -m * m * m * h_ref -
           (v - hp.E_na) * 3.0 * m * m * dm * h_ref - hp.g_l;
}

// Sign of d/dv of n(v): the knees are its zero crossings.
double knee_indicator(const HHParams& hp, double v, double h_ref) {
    const double p = nullcline_p(hp, v, h_ref);
    const double q = hp.g_k * (v - hp.E_k);
    return nullcline_p_prime(hp, v, h_ref) * q - p * hp.g_k;
}

}  // namespace

std::vector<double> GridSpec::k_values() const {
    return lattice(k_min, k_max, k_steps);
}

std::vector<double> GridSpec::lambda_values() const {
    return lattice(lambda_min, lambda_max, lambda_steps);
}

SweepResult sweep_koper(const GridSpec& grid, unsigned workers) {
    validate(grid);
    SweepResult res;
    res.grid = grid;
    const auto ks = grid.k_values();
    const auto ls = grid.lambda_values();
    res.points.resize(ks.size() * ls.size());

    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= res.points.size()) return;
            const double k = ks[i / ls.size()];
            const double lambda = ls[i % ls.size()];
            res.points[i] = run_grid_point(grid, k, lambda);
        }
    };
    unsigned n = workers ? workers : std::thread::hardware_concurrency();
    n = std::max(1u, std::min<unsigned>(n, res.points.size() ? res.points.size() : 1));
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < n; ++i) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();

    res.overlay_k = ks;
    for (const double k : ks) {
        const KoperParams kp{k, 0.0, grid.eps_hat, grid.delta};
        res.lambda_sh_minus.push_back(overlay_or_nan(lambda_sh, kp, Side::Minus));
        res.lambda_sh_plus.push_back(overlay_or_nan(lambda_sh, kp, Side::Plus));
        res.lambda_r_minus.push_back(overlay_or_nan(lambda_r, kp, Side::Minus));
        res.lambda_r_plus.push_back(overlay_or_nan(lambda_r, kp, Side::Plus));
    }
    return res;
}

double hh_supercritical_h(const HHParams& hp, double v) {
    const double n = hh_n_inf(100.0 * v);
    const double m = hh_m_inf(100.0 * v);
    const double num = hp.I / hp.k_scale -
                       hp.g_k * (v - hp.E_k) * n * n * n * n -
                       hp.g_l * (v - hp.E_l);
    return num / ((v - hp.E_na) * m * m * m);
}

OscillationFrame hh_frame(const HHParams& hp, double h_ref) {
    // bracket the zero crossings of the nullcline slope inside the
    // physically meaningful voltage window
    const double v_lo = hp.E_k + 0.02;
    const double v_hi = hp.E_na - 0.05;
    const int cells = 1200;
    std::vector<double> knees;
    double prev_v = v_lo;
    double prev_r = knee_indicator(hp, prev_v, h_ref);
    for (int i = 1; i <= cells; ++i) {
        const double v = v_lo + (v_hi - v_lo) * double(i) / cells;
        const double r = knee_indicator(hp, v, h_ref);
        if (prev_r == 0.0 || prev_r * r < 0.0) {
            double a = prev_v, b = v, ra = prev_r;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (a + b);
                const double rm = knee_indicator(hp, mid, h_ref);
                if (ra * rm <= 0.0) b = mid;
                else a = mid, ra = rm;
            }
            knees.push_back(0.5 * (a + b));
        }
        prev_v = v;
        prev_r = r;
    }
    if (knees.size() != 2)
        throw std::runtime_error("membrane nullcline knees not found");

    OscillationFrame frame;
    frame.fold_lower = knees[0];
    frame.fold_upper = knees[1];
    frame.delta = hp.delta();
    frame.slow_curve = [hp](double v) { return hh_supercritical_h(hp, v); };
    const auto sys = make_system(hp);
    frame.rhs = sys.rhs;
    frame.jacobian = sys.jacobian;
    return frame;
}

std::vector<HHSweepPoint> sweep_hh(const std::vector<double>& currents,
                                   const HHParams& base) {
    std::vector<HHSweepPoint> out;
    out.reserve(currents.size());
    for (const double current : currents) {
        HHSweepPoint pt;
        pt.current = current;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            HHParams hp = base;
            hp.I = current;
            const double t_end = 50.0 / hp.delta();
            const auto traj = integrate(make_system(hp), {-0.6, 0.4, 0.3},
                                        0.0, t_end, IntegratorConfig{});
            if (traj.status != IntegrationStatus::Ok)
                throw std::runtime_error("integration failed: " + traj.note);
            const auto tail = transient_strip(traj, 0.5);
            std::vector<double> hs;
            hs.reserve(tail.states.size());
            for (const auto& s : tail.states) hs.push_back(s.z);
            std::nth_element(hs.begin(), hs.begin() + hs.size() / 2, hs.end());
            const auto res = classify_trajectory_frame(
                tail, hh_frame(hp, hs[hs.size() / 2]));
            pt.regime = res.regime;
            pt.farey = res.farey;
            pt.ok = true;
        } catch (const std::exception& e) {
            pt.ok = false;
            pt.error = e.what();
        }
        pt.runtime_seconds = std::chrono::duration<double>(
                                 std::chrono::steady_clock::now() - t0)
                                 .count();
        out.push_back(pt);
    }
    return out;
}

std::string emit_diagram(const SweepResult& res, const std::string& csv_path) {
    std::ofstream csv(csv_path);
    if (!csv) throw std::runtime_error("cannot write " + csv_path);
    csv << "k,lambda,regime,farey\n";
    char buf[64];
    for (const auto& pt : res.points) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,", pt.k, pt.lambda);
        csv << buf << (pt.ok ? regime_name(pt.regime) : "Failed") << ','
            << (pt.ok ? pt.farey : "") << '\n';
    }
    csv.close();

    nlohmann::json j;
    j["k"] = res.overlay_k;
    j["lambda_sh_minus"] = res.lambda_sh_minus;
    j["lambda_sh_plus"] = res.lambda_sh_plus;
    j["lambda_r_minus"] = res.lambda_r_minus;
    j["lambda_r_plus"] = res.lambda_r_plus;
    j["divider_k"] = res.divider_k;

    std::string stem = csv_path;
    if (stem.size() > 4 && stem.substr(stem.size() - 4) == ".csv")
        stem.resize(stem.size() - 4);
    const std::string json_path = stem + "_overlays.json";
    std::ofstream out(json_path);
    if (!out) throw std::runtime_error("cannot write " + json_path);
    out << j.dump(2) << '\n';
    return json_path;
}

std::map<std::string, std::string> load_key_values(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos || trim(stripped.substr(0, eq)).empty())
            throw std::invalid_argument("malformed config line: " + line);
        kv[trim(stripped.substr(0, eq))] = trim(stripped.substr(eq + 1));
    }
    return kv;
}

}  // namespace mmo
