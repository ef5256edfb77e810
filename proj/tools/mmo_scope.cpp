#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mmo/acceptance.hpp"
#include "mmo/classify.hpp"
#include "mmo/drift.hpp"
#include "mmo/geometry.hpp"
#include "mmo/harness.hpp"
#include "mmo/integrate.hpp"
#include "mmo/local.hpp"
#include "mmo/model.hpp"

namespace {

// Values from a key=value settings file fill in options the user did not pass
// on the command line; explicit flags always win.
struct ConfigOverlay {
    std::map<std::string, std::string> kv;

    void load(const std::string& path) { kv = mmo::load_key_values(path); }

    template <typename T>
    void apply(const CLI::App& cmd, const std::string& flag,
               const std::string& key, T& value) const {
        if (cmd.count(flag) > 0) return;
        const auto it = kv.find(key);
        if (it == kv.end()) return;
        std::istringstream is(it->second);
        T parsed{};
        if (is >> parsed) value = parsed;
    }
};

struct PointArgs {
    double k = -4.5;
    double lambda = 1.5;
    double eps_hat = 0.01;
    double delta = 0.01;
    std::string config_path;
};

void add_point_options(CLI::App* cmd, PointArgs* a) {
    cmd->add_option("--config", a->config_path,
                    "key=value settings file (flags override it)");
    cmd->add_option("-k,--k", a->k, "rate-model parameter k (k < 0)");
    cmd->add_option("-l,--lambda", a->lambda, "rate-model parameter lambda");
    cmd->add_option("--eps-hat", a->eps_hat, "fast-scale separation");
    cmd->add_option("--delta", a->delta, "slow-scale separation");
}

void overlay_point(const CLI::App& cmd, ConfigOverlay& cfg, PointArgs& a) {
    if (!a.config_path.empty()) cfg.load(a.config_path);
    cfg.apply(cmd, "--k", "k", a.k);
    cfg.apply(cmd, "--lambda", "lambda", a.lambda);
    cfg.apply(cmd, "--eps-hat", "eps_hat", a.eps_hat);
    cfg.apply(cmd, "--delta", "delta", a.delta);
}

mmo::KoperParams to_koper(const PointArgs& a) {
    return mmo::KoperParams{a.k, a.lambda, a.eps_hat, a.delta};
}

const char* side_name(mmo::Side s) {
    return s == mmo::Side::Minus ? "minus" : "plus";
}

int run_geometry(const PointArgs& a) {
    const mmo::NormalFormParams p = mmo::koper_to_normal_form(to_koper(a));
    const mmo::GeometryReport rep = mmo::geometry_report(p);
    std::printf("normal form: f2=%.12g f3=%.12g alpha=%.12g beta=%.12g "
                "mu=%.12g eps=%.12g delta=%.12g\n",
                p.f2, p.f3, p.alpha, p.beta, p.mu, p.eps, p.delta);
    for (const mmo::FoldLine& f : rep.folds)
        std::printf("fold line %s: x=%.12g y=%.12g\n", side_name(f.which),
                    f.x, f.y);
    for (const mmo::FoldedSingularity& q : rep.folded_singularities)
        std::printf("folded singularity %s: x=%.12g y=%.12g z=%.12g\n",
                    side_name(q.which), q.location.x, q.location.y,
                    q.location.z);
    std::printf("nullcline folds: count=%d discriminant=%.12g\n",
                rep.m2_folds.count, rep.m2_folds.discriminant);
    for (const mmo::State3& s : rep.m2_folds.points)
        std::printf("  fold point: x=%.12g y=%.12g z=%.12g\n", s.x, s.y, s.z);
    if (rep.stability) {
        for (const mmo::Branch& b : rep.stability->branches)
            std::printf("branch %-7s x in [%.12g, %.12g] %s\n",
                        b.name.c_str(), b.x_lo, b.x_hi,
                        b.attracting ? "attracting" : "repelling");
    }
    const char* kind = rep.config.kind == mmo::RelKind::Remote ? "remote"
                       : rep.config.kind == mmo::RelKind::Aligned
                           ? "aligned"
                           : "connected";
    std::printf("relative configuration: %s (z_q-=%.12g z_q+=%.12g)\n", kind,
                rep.config.z_q_minus, rep.config.z_q_plus);
    return 0;
}

int run_landmarks(const PointArgs& a, const std::string& side_opt,
                  const std::string& mode_opt) {
    const mmo::NormalFormParams p = mmo::koper_to_normal_form(to_koper(a));
    const mmo::Side side =
        side_opt == "plus" ? mmo::Side::Plus : mmo::Side::Minus;
    const mmo::LandmarkMode mode = mode_opt == "numeric"
                                       ? mmo::LandmarkMode::Numeric
                                       : mmo::LandmarkMode::Asymptotic;
    const mmo::LocalLandmarks lm = mmo::landmarks(p, side, mode);
    std::printf("side=%s mode=%s\n", side_name(side),
                mode == mmo::LandmarkMode::Numeric ? "numeric" : "asymptotic");
    std::printf("p_dh:       x=%.12g y=%.12g z=%.12g\n", lm.p_dh.x, lm.p_dh.y,
                lm.p_dh.z);
    std::printf("p_dn_minus: x=%.12g y=%.12g z=%.12g\n", lm.p_dn_minus.x,
                lm.p_dn_minus.y, lm.p_dn_minus.z);
    std::printf("p_dn_plus:  x=%.12g y=%.12g z=%.12g\n", lm.p_dn_plus.x,
                lm.p_dn_plus.y, lm.p_dn_plus.z);
    std::printf("z_cn=%.12g\n", lm.z_cn);
    std::printf("nodal band:  [%.12g, %.12g]\n", lm.nodal.lo, lm.nodal.hi);
    std::printf("spiral band: [%.12g, %.12g]\n", lm.spiral.lo, lm.spiral.hi);
    std::printf("canard band: [%.12g, %.12g]\n", lm.canard.lo, lm.canard.hi);
    const mmo::Criticality c = mmo::hopf_criticality(p);
    std::printf("hopf criticality: %s\n",
                c == mmo::Criticality::Supercritical   ? "supercritical"
                : c == mmo::Criticality::Subcritical ? "subcritical"
                                                       : "degenerate");
    std::printf("lambda_sh=%.12g\n", mmo::lambda_sh(to_koper(a), side));
    return 0;
}

int run_boundaries(const PointArgs& a, double k_min, double k_max, int steps,
                   const std::string& out_path) {
    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw std::runtime_error("cannot open " + out_path);
        os = &file;
    }
    *os << "k,lambda_sh_minus,lambda_sh_plus,lambda_r_minus,lambda_r_plus\n";
    for (int i = 0; i < steps; ++i) {
        const double k =
            steps == 1 ? k_min
                       : k_min + (k_max - k_min) * i / double(steps - 1);
        const mmo::KoperParams kp{k, 0.0, a.eps_hat, a.delta};
        char line[256];
        std::snprintf(line, sizeof line, "%.10g,%.10g,%.10g", k,
                      mmo::lambda_sh(kp, mmo::Side::Minus),
                      mmo::lambda_sh(kp, mmo::Side::Plus));
        *os << line;
        if (k < -4.0) {
            std::snprintf(line, sizeof line, ",%.10g,%.10g",
                          mmo::lambda_r(kp, mmo::Side::Minus),
                          mmo::lambda_r(kp, mmo::Side::Plus));
            *os << line << "\n";
        } else {
            *os << ",,\n";  // balance parameter undefined here
        }
    }
    return 0;
}

int run_simulate(const PointArgs& a, double t_end, const mmo::State3& s0_koper,
                 const std::string& frame, const std::string& out_path) {
    const mmo::KoperParams kp = to_koper(a);
    mmo::Trajectory traj;
    std::array<std::string, 3> cols{"x", "y", "z"};
    if (frame == "koper") {
        traj = mmo::integrate(mmo::make_system(kp), s0_koper, 0.0, t_end);
    } else {
        const mmo::NormalFormParams p = mmo::koper_to_normal_form(kp);
        const mmo::State3 s0 = mmo::koper_state_to_normal_form(kp, s0_koper);
        traj = mmo::integrate(mmo::make_system(p), s0, 0.0, t_end);
    }
    if (out_path.empty()) {
        mmo::write_trajectory_csv(traj, std::cout, cols);
    } else {
        std::ofstream file(out_path);
        if (!file) throw std::runtime_error("cannot open " + out_path);
        mmo::write_trajectory_csv(traj, file, cols);
    }
    std::fprintf(stderr, "%zu samples, %zu events, status %s\n",
                 traj.t.size(), traj.events.size(),
                 traj.status == mmo::IntegrationStatus::Ok ? "ok"
                                                           : "truncated");
    return 0;
}

int run_classify(const PointArgs& a, double t_end, double strip, int periods) {
    const mmo::KoperParams kp = to_koper(a);
    const mmo::NormalFormParams p = mmo::koper_to_normal_form(kp);
    const mmo::State3 s0 =
        mmo::koper_state_to_normal_form(kp, mmo::State3{-1.0, 2.0, 0.1});
    if (t_end <= 0.0) t_end = 50.0 / a.delta;
    const mmo::Trajectory traj =
        mmo::integrate(mmo::make_system(p), s0, 0.0, t_end);
    mmo::ClassifyOptions opts;
    opts.periods = periods;
    const mmo::ClassifyResult res =
        mmo::classify_trajectory(p, mmo::transient_strip(traj, strip), opts);
    std::printf("regime: %s\n", mmo::regime_name(res.regime).c_str());
    std::printf("farey:  %s\n", res.farey.c_str());
    if (std::isfinite(res.period))
        std::printf("period: %.6g\n", res.period);
    std::printf("events: %zu\n", res.events.size());
    for (const std::string& flag : res.ambiguity_flags)
        std::printf("note: %s\n", flag.c_str());
    return 0;
}

int run_sweep(const mmo::GridSpec& grid, unsigned workers,
              const std::string& out_path) {
    const mmo::SweepResult res = mmo::sweep_koper(grid, workers);
    const std::string overlay_path = mmo::emit_diagram(res, out_path);
    std::map<std::string, int> counts;
    int failures = 0;
    for (const mmo::SweepPoint& pt : res.points) {
        if (!pt.ok) {
            ++failures;
            continue;
        }
        ++counts[mmo::regime_name(pt.regime)];
    }
    std::printf("%zu points -> %s (overlays %s)\n", res.points.size(),
                out_path.c_str(), overlay_path.c_str());
    for (const auto& [name, n] : counts) std::printf("  %-22s %d\n",
                                                     name.c_str(), n);
    if (failures > 0) std::printf("  %-22s %d\n", "failed", failures);
    return failures == 0 ? 0 : 1;
}

int run_hh(const std::vector<double>& currents, double tau_h, double tau_n,
           double eps) {
    mmo::HHParams base;
    base.tau_h = tau_h;
    base.tau_n = tau_n;
    base.eps = eps;
    const auto pts = mmo::sweep_hh(currents, base);
    bool all_ok = true;
    for (const mmo::HHSweepPoint& pt : pts) {
        if (pt.ok) {
            std::printf("I=%-8.5g %-22s %s\n", pt.current,
                        mmo::regime_name(pt.regime).c_str(),
                        pt.farey.c_str());
        } else {
            std::printf("I=%-8.5g failed: %s\n", pt.current,
                        pt.error.c_str());
            all_ok = false;
        }
    }
    return all_ok ? 0 : 1;
}

int run_verify() {
    const auto results = mmo::run_acceptance();
    bool all = true;
    for (const mmo::CriterionResult& r : results) {
        std::printf("criterion %2d [%s] %-36s %7.1fs  %s\n", r.id,
                    r.passed ? "PASS" : "FAIL", r.name.c_str(), r.seconds,
                    r.detail.c_str());
        std::fflush(stdout);
        all = all && r.passed;
    }
    std::printf("%s\n", all ? "all criteria passed"
                            : "one or more criteria failed");
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Three-timescale oscillation survey tool"};
    app.require_subcommand(1);
    ConfigOverlay cfg;

    PointArgs geo_args;
    CLI::App* geo = app.add_subcommand(
        "geometry", "critical-manifold layout for one parameter point");
    add_point_options(geo, &geo_args);

    PointArgs lm_args;
    std::string lm_side = "minus";
    std::string lm_mode = "asymptotic";
    CLI::App* lms = app.add_subcommand(
        "landmarks", "fold-region landmark points and bands");
    add_point_options(lms, &lm_args);
    lms->add_option("--side", lm_side, "minus or plus")
        ->check(CLI::IsMember({"minus", "plus"}));
    lms->add_option("--mode", lm_mode, "asymptotic or numeric")
        ->check(CLI::IsMember({"asymptotic", "numeric"}));

    PointArgs bd_args;
    double bd_k_min = -5.5;
    double bd_k_max = -2.5;
    int bd_steps = 61;
    std::string bd_out;
    CLI::App* bds = app.add_subcommand(
        "boundaries", "regime boundary curves over a k range (CSV)");
    add_point_options(bds, &bd_args);
    bds->add_option("--k-min", bd_k_min, "lower end of the k range");
    bds->add_option("--k-max", bd_k_max, "upper end of the k range");
    bds->add_option("--steps", bd_steps, "number of k samples");
    bds->add_option("-o,--out", bd_out, "output CSV path (default stdout)");

    PointArgs sim_args;
    double sim_t_end = 1500.0;
    mmo::State3 sim_s0{-1.0, 2.0, 0.1};
    std::string sim_frame = "normal";
    std::string sim_out;
    CLI::App* sim = app.add_subcommand(
        "simulate", "integrate one trajectory and write it as CSV");
    add_point_options(sim, &sim_args);
    sim->add_option("--t-end", sim_t_end, "integration horizon");
    sim->add_option("--x0", sim_s0.x, "initial x (rate-model frame)");
    sim->add_option("--y0", sim_s0.y, "initial y (rate-model frame)");
    sim->add_option("--z0", sim_s0.z, "initial z (rate-model frame)");
    sim->add_option("--frame", sim_frame, "output frame: normal or koper")
        ->check(CLI::IsMember({"normal", "koper"}));
    sim->add_option("-o,--out", sim_out, "output CSV path (default stdout)");

    PointArgs cls_args;
    double cls_t_end = 0.0;
    double cls_strip = 0.5;
    int cls_periods = 3;
    CLI::App* cls = app.add_subcommand(
        "classify", "integrate and label the attractor at one point");
    add_point_options(cls, &cls_args);
    cls->add_option("--t-end", cls_t_end,
                    "integration horizon (0 selects 50/delta)");
    cls->add_option("--strip", cls_strip, "leading transient fraction");
    cls->add_option("--periods", cls_periods, "recurrence windows to label");

    mmo::GridSpec grid;
    unsigned sweep_workers = 0;
    std::string sweep_out = "diagram.csv";
    std::string sweep_config;
    CLI::App* swp = app.add_subcommand(
        "sweep", "regime diagram over a (k, lambda) grid");
    swp->add_option("--config", sweep_config,
                    "key=value settings file (flags override it)");
    swp->add_option("--k-min", grid.k_min, "grid lower k");
    swp->add_option("--k-max", grid.k_max, "grid upper k");
    swp->add_option("--k-steps", grid.k_steps, "grid k count");
    swp->add_option("--lambda-min", grid.lambda_min, "grid lower lambda");
    swp->add_option("--lambda-max", grid.lambda_max, "grid upper lambda");
    swp->add_option("--lambda-steps", grid.lambda_steps, "grid lambda count");
    swp->add_option("--eps-hat", grid.eps_hat, "fast-scale separation");
    swp->add_option("--delta", grid.delta, "slow-scale separation");
    swp->add_option("--t-end", grid.t_end,
                    "integration horizon (0 selects 50/delta)");
    swp->add_option("--strip", grid.strip_fraction,
                    "leading transient fraction");
    swp->add_option("--workers", sweep_workers,
                    "worker threads (0 selects hardware count)");
    swp->add_option("-o,--out", sweep_out, "output CSV path");

    std::vector<double> hh_currents;
    double hh_tau_h = 45.0;
    double hh_tau_n = 1.0;
    double hh_eps = 0.0073;
    CLI::App* hhc = app.add_subcommand(
        "hh", "label membrane-model attractors per applied current");
    hhc->add_option("--currents", hh_currents,
                    "applied currents in microamp/cm^2")
        ->required()
        ->delimiter(',');
    hhc->add_option("--tau-h", hh_tau_h, "inactivation time stretch");
    hhc->add_option("--tau-n", hh_tau_n, "activation time stretch");
    hhc->add_option("--eps", hh_eps, "voltage time-scale separation");

    CLI::App* ver = app.add_subcommand(
        "verify", "run the release criteria and print a pass/fail table");

    CLI11_PARSE(app, argc, argv);

    try {
        if (geo->parsed()) {
            overlay_point(*geo, cfg, geo_args);
            return run_geometry(geo_args);
        }
        if (lms->parsed()) {
            overlay_point(*lms, cfg, lm_args);
            cfg.apply(*lms, "--side", "side", lm_side);
            cfg.apply(*lms, "--mode", "mode", lm_mode);
            return run_landmarks(lm_args, lm_side, lm_mode);
        }
        if (bds->parsed()) {
            overlay_point(*bds, cfg, bd_args);
            cfg.apply(*bds, "--k-min", "k_min", bd_k_min);
            cfg.apply(*bds, "--k-max", "k_max", bd_k_max);
            cfg.apply(*bds, "--steps", "steps", bd_steps);
            return run_boundaries(bd_args, bd_k_min, bd_k_max, bd_steps,
                                  bd_out);
        }
        if (sim->parsed()) {
            overlay_point(*sim, cfg, sim_args);
            cfg.apply(*sim, "--t-end", "t_end", sim_t_end);
            return run_simulate(sim_args, sim_t_end, sim_s0, sim_frame,
                                sim_out);
        }
        if (cls->parsed()) {
            overlay_point(*cls, cfg, cls_args);
            cfg.apply(*cls, "--t-end", "t_end", cls_t_end);
            cfg.apply(*cls, "--strip", "strip", cls_strip);
            cfg.apply(*cls, "--periods", "periods", cls_periods);
            return run_classify(cls_args, cls_t_end, cls_strip, cls_periods);
        }
        if (swp->parsed()) {
            if (!sweep_config.empty()) cfg.load(sweep_config);
            cfg.apply(*swp, "--k-min", "k_min", grid.k_min);
            cfg.apply(*swp, "--k-max", "k_max", grid.k_max);
            cfg.apply(*swp, "--k-steps", "k_steps", grid.k_steps);
            cfg.apply(*swp, "--lambda-min", "lambda_min", grid.lambda_min);
            cfg.apply(*swp, "--lambda-max", "lambda_max", grid.lambda_max);
            cfg.apply(*swp, "--lambda-steps", "lambda_steps",
                      grid.lambda_steps);
            cfg.apply(*swp, "--eps-hat", "eps_hat", grid.eps_hat);
            cfg.apply(*swp, "--delta", "delta", grid.delta);
            cfg.apply(*swp, "--t-end", "t_end", grid.t_end);
            cfg.apply(*swp, "--strip", "strip_fraction", grid.strip_fraction);
            cfg.apply(*swp, "--workers", "workers", sweep_workers);
            return run_sweep(grid, sweep_workers, sweep_out);
        }
        if (hhc->parsed()) return run_hh(hh_currents, hh_tau_h, hh_tau_n,
                                         hh_eps);
        if (ver->parsed()) return run_verify();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
