#include "mmo/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmo/classify.hpp"
#include "mmo/drift.hpp"
#include "mmo/geometry.hpp"
#include "mmo/harness.hpp"
#include "mmo/integrate.hpp"
#include "mmo/local.hpp"
#include "mmo/model.hpp"

#include <random>

namespace mmo {
namespace {

std::string fmt(const char* f, ...) {
    char buf[768];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return std::string(buf);
}

NormalFormParams nf(double k, double lambda, double eps_hat = 0.01,
                    double delta = 0.01) {
    return koper_to_normal_form(KoperParams{k, lambda, eps_hat, delta});
}

State3 nf_initial(const KoperParams& kp) {
    return koper_state_to_normal_form(kp, State3{-1.0, 2.0, 0.1});
}

double z_at(const Trajectory& traj, double t) {
    const auto it = std::lower_bound(traj.t.begin(), traj.t.end(), t);
    size_t i = static_cast<size_t>(it - traj.t.begin());
    if (i >= traj.t.size()) i = traj.t.size() - 1;
    if (i > 0 && std::abs(traj.t[i - 1] - t) < std::abs(traj.t[i] - t)) --i;
    return traj.states[i].z;
}

// Abscissa on the lower part of the intermediate nullcline with the given
// z-level, found by Newton from the linearised guess.  Only used close to the
// lower fold, where the curve is a graph over z.
double g_inverse_near_fold(const NormalFormParams& p, double z) {
    const CubicG G = cubic_g(p);
    double x = z / p.alpha;
    for (int it = 0; it < 60; ++it) {
        const double d = G.d(x);
        if (std::abs(d) < 1e-12) break;
        const double step = (G(x) - z) / d;
        x -= step;
        if (std::abs(step) < 1e-15) break;
    }
    return x;
}

// One small-oscillation epoch with the jumps around it, measured in z-levels
// so the drift predictions can be checked against it.
struct Passage {
    double z_capture = std::numeric_limits<double>::quiet_NaN();
    double z_exit = std::numeric_limits<double>::quiet_NaN();
    long runs_after = -1;  // large loops between this epoch and the next
    double z_first_landing_after = std::numeric_limits<double>::quiet_NaN();
    double z_capture_after = std::numeric_limits<double>::quiet_NaN();
};

std::vector<Passage> scan_passages(const Trajectory& tail, double width) {
    const auto events = detect_events(tail);
    const size_t n = events.size();
    const auto is_large = [&](size_t q) {
        const double a = std::min(events[q].swing_in, events[q].swing_out);
        const double b = std::max(events[q].swing_in, events[q].swing_out);
        return a > 0.25 * width && b >= 0.75 * width;
    };

    std::vector<std::pair<size_t, size_t>> epochs;  // [first, last) small runs
    size_t i = 0;
    while (i < n) {
        if (is_large(i)) {
            ++i;
            continue;
        }
        size_t j = i;
        while (j < n && !is_large(j)) ++j;
        epochs.push_back({i, j});
        i = j;
    }

    std::vector<Passage> out;
    for (size_t e = 0; e < epochs.size(); ++e) {
        const auto [a, b] = epochs[e];
        Passage ps;
        for (size_t q = a; q-- > 0;) {
            if (!is_large(q)) break;
            if (events[q].kind == ExtremumKind::Min) {
                ps.z_capture = z_at(tail, events[q].time);
                break;
            }
        }
        ps.z_exit = z_at(tail, events[b - 1].time);
        if (e + 1 < epochs.size()) {
            long n_max = 0;
            long n_min = 0;
            double t_first_min = std::numeric_limits<double>::quiet_NaN();
            double t_last_min = t_first_min;
            for (size_t q = b; q < epochs[e + 1].first; ++q) {
                if (!is_large(q)) continue;
                if (events[q].kind == ExtremumKind::Max) {
                    ++n_max;
                } else {
                    ++n_min;
                    if (!std::isfinite(t_first_min)) t_first_min = events[q].time;
                    t_last_min = events[q].time;
                }
            }
            ps.runs_after = std::max(n_max, n_min);
            if (std::isfinite(t_first_min)) {
                ps.z_first_landing_after = z_at(tail, t_first_min);
                ps.z_capture_after = z_at(tail, t_last_min);
            }
        }
        out.push_back(ps);
    }
    return out;
}

double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Trajectory run_koper_nf(const KoperParams& kp, double t_end, int stride = 1) {
    IntegratorConfig cfg;
    cfg.stride = stride;
    const NormalFormParams p = koper_to_normal_form(kp);
    return integrate(make_system(p), nf_initial(kp), 0.0, t_end, cfg);
}

RegimeLabel regime_at(const KoperParams& kp, double t_end,
                      const ClassifyOptions& opts) {
    const NormalFormParams p = koper_to_normal_form(kp);
    const Trajectory traj = run_koper_nf(kp, t_end);
    return classify_trajectory(p, transient_strip(traj, 0.5), opts).regime;
}

// ---------------------------------------------------------------------------

CriterionResult crit_trichotomy() {
    CriterionResult r;
    bool ok = true;
    std::string notes;
    for (const double k : {-3.9, -3.95}) {
        if (classify_relative_config(nf(k, 0.0)).kind != RelKind::Connected) {
            ok = false;
            notes += fmt(" k=%g not connected;", k);
        }
    }
    for (const double k : {-4.1, -4.5, -5.0}) {
        if (classify_relative_config(nf(k, 0.0)).kind != RelKind::Remote) {
            ok = false;
            notes += fmt(" k=%g not remote;", k);
        }
    }
    const RelativeConfig mid = classify_relative_config(nf(-4.0, 0.0));
    const double gap = std::abs(mid.z_q_minus - mid.z_q_plus);
    if (mid.kind != RelKind::Aligned) {
        ok = false;
        notes += " k=-4 not aligned;";
    }
    if (!(gap <= 1e-9)) {
        ok = false;
        notes += fmt(" aligned gap %.3e;", gap);
    }
    r.passed = ok;
    r.detail = fmt("connected {-3.9,-3.95}, remote {-4.1,-4.5,-5}, "
                   "k=-4 gap %.2e%s",
                   gap, notes.c_str());
    return r;
}

CriterionResult crit_fold_points() {
    CriterionResult r;
    bool ok = true;
    std::string notes;
    const double ks[] = {-4.5, -5.9, -6.0, -7.0};
    const int want[] = {2, 2, 1, 0};
    double disc6 = 0.0;
    for (int i = 0; i < 4; ++i) {
        const M2FoldPoints fp = m2_fold_points(nf(ks[i], 0.0));
        if (fp.count != want[i]) {
            ok = false;
            notes += fmt(" k=%g count %d (want %d);", ks[i], fp.count, want[i]);
        }
        if (i == 0 && fp.count == 2) {
            const double e0 = std::abs(fp.points[0].x - 0.5);
            const double e1 = std::abs(fp.points[1].x - 1.5);
            if (!(e0 <= 1e-12 && e1 <= 1e-12)) {
                ok = false;
                notes += fmt(" k=-4.5 x errors %.2e/%.2e;", e0, e1);
            }
        }
        if (i == 2) {
            disc6 = fp.discriminant;
            if (!(std::abs(disc6) <= 1e-12)) {
                ok = false;
                notes += fmt(" k=-6 discriminant %.3e;", disc6);
            }
        }
    }
    r.passed = ok;
    r.detail = fmt("counts 2/2/1/0, k=-4.5 folds at 0.5 and 1.5, "
                   "k=-6 discriminant %.2e%s",
                   disc6, notes.c_str());
    return r;
}

CriterionResult crit_landmarks() {
    CriterionResult r;
    const auto dh_error = [](double eps_hat) {
        const NormalFormParams p = nf(-4.5, 0.0, eps_hat, 0.01);
        const double num =
            landmarks(p, Side::Minus, LandmarkMode::Numeric).p_dh.x;
        const double asym =
            landmarks(p, Side::Minus, LandmarkMode::Asymptotic).p_dh.x;
        return std::abs(num - asym);
    };
    const double e1 = dh_error(0.01);
    const double e2 = dh_error(0.005);
    const double ratio = e1 / e2;
    const bool ok_ratio = ratio >= 3.0 && ratio <= 5.0;

    const NormalFormParams p4 = nf(-4.0, 0.0, 0.01, 0.01);
    const LocalLandmarks lm =
        landmarks(p4, Side::Minus, LandmarkMode::Asymptotic);
    const double gap = std::abs(lm.z_cn - lm.p_dh.z);
    const bool ok_gap = gap <= 1e-3 * p4.eps;

    r.passed = ok_ratio && ok_gap;
    r.detail = fmt("Hopf-point error ratio %.3f (want 3..5), "
                   "k=-4 canard offset %.2e (cap %.2e)",
                   ratio, gap, 1e-3 * p4.eps);
    return r;
}

CriterionResult crit_entry_exit() {
    CriterionResult r;

    // Flat drift: the exit must mirror the entry through the trace-zero
    // point.  Entries are kept inside the focal band, whose half-width is
    // sqrt(eps * alpha) / f2, so the attachment point spirals; entries
    // beyond the band attach along a real eigendirection and the mirror
    // identity degrades.
    NormalFormParams p = nf(-4.5, 1.5);
    p.eps = 1e-7;
    p.phi = PhiSpec::zero();
    const double xdh = landmarks(p, Side::Minus, LandmarkMode::Numeric).p_dh.x;
    double worst_flat = 0.0;
    bool ok_flat = true;
    for (int i = 0; i < 10; ++i) {
        const double a = 2e-5 + (2e-4 - 2e-5) * i / 9.0;
        const EntryExitResult ee = entry_exit(p, xdh - a, Side::Minus);
        const double diff = std::abs(ee.x_out - (xdh - (xdh - a)));
        worst_flat = std::max(worst_flat, diff);
        ok_flat = ok_flat && diff <= 1e-6;
    }

    // Simulated passages: read the attachment and departure levels of each
    // small-oscillation epoch off the trajectory, map them to nullcline
    // abscissas, and compare the measured exit with the balance prediction.
    const KoperParams kp{-4.4, 1.5, 0.01, 0.01};
    const NormalFormParams ps = koper_to_normal_form(kp);
    const Trajectory traj = run_koper_nf(kp, 6000.0);
    const Trajectory tail = transient_strip(traj, 0.3);
    const double width = drift_endpoints(ps).x_max;
    const auto passes = scan_passages(tail, width);
    const double tol = 3.0 * std::sqrt(ps.eps);
    int used = 0;
    int within = 0;
    int rejected = 0;
    double worst_sim = 0.0;
    for (const Passage& q : passes) {
        if (!(std::isfinite(q.z_capture) && std::isfinite(q.z_exit))) continue;
        const double x_in = g_inverse_near_fold(ps, q.z_capture);
        EntryExitResult ee;
        try {
            ee = entry_exit(ps, x_in, Side::Minus);
        } catch (const std::exception&) {
            ++rejected;  // sector-type capture past the trace-zero point
            continue;
        }
        const double x_meas = g_inverse_near_fold(ps, q.z_exit);
        const double diff = std::abs(x_meas - ee.x_out);
        worst_sim = std::max(worst_sim, diff);
        ++used;
        if (diff <= tol) ++within;
    }
    const bool ok_sim = used >= 5 && within >= (9 * used + 9) / 10;

    r.passed = ok_flat && ok_sim;
    r.detail = fmt("flat-drift worst %.2e (cap 1e-6); simulated %d/%d within "
                   "%.3f, worst %.3f, %d sector captures skipped",
                   worst_flat, within, used, tol, worst_sim, rejected);
    return r;
}

CriterionResult crit_regimes() {
    CriterionResult r;
    struct Ref {
        double k;
        double lambda;
        RegimeLabel want;
    };
    const Ref refs[] = {
        {-2.2, 1.5, RegimeLabel::SteadyState},
        {-3.6, 1.5, RegimeLabel::MmoDouble},
        {-4.4, 1.5, RegimeLabel::MmoSingleBelow},
        {-5.4, 1.5, RegimeLabel::RelaxationTwoScale},
    };
    std::mt19937 rng(20260815u);
    std::uniform_real_distribution<double> jit(-0.25, 0.25);
    bool ok = true;
    std::string notes;
    for (const Ref& ref : refs) {
        const KoperParams kp{ref.k, ref.lambda, 0.01, 0.01};
        const NormalFormParams p = koper_to_normal_form(kp);
        const OdeSystem sys = make_system(p);
        for (int trial = 0; trial <= 10; ++trial) {
            State3 s0k{-1.0, 2.0, 0.1};
            if (trial > 0) {
                s0k.x += jit(rng);
                s0k.y += jit(rng);
                s0k.z += jit(rng);
            }
            const State3 s0 = koper_state_to_normal_form(kp, s0k);
            const Trajectory traj = integrate(sys, s0, 0.0, 3000.0);
            const Trajectory tail = transient_strip(traj, 0.5);
            const ClassifyResult res = classify_trajectory(p, tail, {});
            if (res.regime != ref.want) {
                ok = false;
                notes += fmt(" (%g,%g) trial %d got %s;", ref.k, ref.lambda,
                             trial, regime_name(res.regime).c_str());
                break;
            }
            if (trial == 0) {
                for (const double fl : {0.8, 1.2}) {
                    for (const double fs : {0.8, 1.2}) {
                        ClassifyOptions o;
                        o.theta_lao *= fl;
                        o.theta_sao *= fs;
                        const RegimeLabel got =
                            classify_trajectory(p, tail, o).regime;
                        if (got != ref.want) {
                            ok = false;
                            notes += fmt(" (%g,%g) thresholds %.1f/%.1f got "
                                         "%s;",
                                         ref.k, ref.lambda, fl, fs,
                                         regime_name(got).c_str());
                        }
                    }
                }
            }
        }
    }
    r.passed = ok;
    r.detail =
        ok ? "four reference labels stable under 10 jitters and threshold "
             "scaling"
           : fmt("mismatches:%s", notes.c_str());
    return r;
}

CriterionResult crit_farey() {
    CriterionResult r;
    bool ok = true;
    std::string notes;

    const auto classify_at = [](double k, double lambda, double t_end) {
        const KoperParams kp{k, lambda, 0.01, 0.01};
        const NormalFormParams p = koper_to_normal_form(kp);
        const Trajectory traj = run_koper_nf(kp, t_end);
        return classify_trajectory(p, transient_strip(traj, 0.5), {});
    };

    // Segments without small oscillations are horizon truncations of the
    // following epoch; their side bit is a rendering default and carries no
    // information, so only segments with s > 0 constrain the checks below.
    const ClassifyResult above = classify_at(-4.5, -2.0, 3000.0);
    long saos_above = 0;
    for (const FareySegment& s : above.segments) {
        if (s.s == 0) continue;
        if (s.position != BranchSide::Upper) {
            ok = false;
            notes += " (-4.5,-2) has a below segment;";
            break;
        }
        saos_above += s.s;
    }
    if (saos_above == 0) {
        ok = false;
        notes += " (-4.5,-2) no upper small oscillations;";
    }

    const ClassifyResult below = classify_at(-4.5, 2.0, 3000.0);
    long saos_below = 0;
    for (const FareySegment& s : below.segments) {
        if (s.s == 0) continue;
        if (s.position != BranchSide::Lower) {
            ok = false;
            notes += " (-4.5,2) has an above segment;";
            break;
        }
        saos_below += s.s;
    }
    if (saos_below == 0) {
        ok = false;
        notes += " (-4.5,2) no lower small oscillations;";
    }

    const ClassifyResult alt = classify_at(-4.0, 0.0, 2500.0);
    long alt_checked = 0;
    BranchSide prev_side = BranchSide::Upper;
    for (size_t i = 0; i < alt.segments.size(); ++i) {
        const FareySegment& s = alt.segments[i];
        if (s.s == 0) continue;
        if (s.L != 1) {
            ok = false;
            notes += fmt(" (-4,0) segment %zu has %ld large loops;", i, s.L);
            break;
        }
        if (alt_checked > 0 && s.position == prev_side) {
            ok = false;
            notes += fmt(" (-4,0) segment %zu repeats its side;", i);
            break;
        }
        prev_side = s.position;
        ++alt_checked;
    }
    if (alt_checked < 2) {
        ok = false;
        notes += " (-4,0) fewer than two alternating segments;";
    }

    const ClassifyResult pure = classify_at(-4.5, 0.0, 3000.0);
    if (pure.farey != "{L^0}") {
        ok = false;
        notes += fmt(" (-4.5,0) farey '%s';", pure.farey.c_str());
    }

    r.passed = ok;
    r.detail = ok ? fmt("above '%s', below '%s', alternating '%s', pure "
                        "'%s'",
                        above.farey.c_str(), below.farey.c_str(),
                        alt.farey.c_str(), pure.farey.c_str())
                  : fmt("mismatches:%s", notes.c_str());
    return r;
}

CriterionResult crit_boundaries() {
    CriterionResult r;
    std::string notes;

    const auto is_steady = [](double lambda) {
        return regime_at(KoperParams{-4.4, lambda, 0.01, 0.01}, 5000.0, {}) ==
               RegimeLabel::SteadyState;
    };
    bool ok_onset = true;
    double lambda_onset = std::numeric_limits<double>::quiet_NaN();
    if (is_steady(2.0)) {
        ok_onset = false;
        notes += " lower onset bracket already steady;";
    } else if (!is_steady(2.8)) {
        ok_onset = false;
        notes += " upper onset bracket still oscillating;";
    } else {
        double lo = 2.0;
        double hi = 2.8;
        for (int i = 0; i < 12; ++i) {
            const double mid = 0.5 * (lo + hi);
            (is_steady(mid) ? hi : lo) = mid;
        }
        lambda_onset = 0.5 * (lo + hi);
    }
    const double target_onset =
        lambda_sh(KoperParams{-4.4, 0.0, 0.01, 0.01}, Side::Minus);
    const double tol_onset = 5.0 * 0.01 + 5.0 * 0.01;
    if (ok_onset && !(std::abs(lambda_onset - target_onset) <= tol_onset)) {
        ok_onset = false;
        notes += fmt(" onset %.4f vs %.4f;", lambda_onset, target_onset);
    }

    // The balance point is a fast-limit object: the simulated transition
    // approaches it at O(delta) only once the fast scale sits well below
    // delta.  A rate-constant scale of 4.5e-4 puts the fast scale at 1e-4
    // against delta = 1e-2; at equal scales the transition is offset by an
    // amount that does not shrink with delta.
    const double eps_hat_r = 4.5e-4;
    const double delta_r = 0.01;
    ClassifyOptions wide;
    wide.periods = 300;
    const auto is_relax = [&](double lambda) {
        return regime_at(KoperParams{-4.5, lambda, eps_hat_r, delta_r},
                         1500.0, wide) == RegimeLabel::RelaxationTwoScale;
    };
    bool ok_relax = true;
    double lambda_relax = std::numeric_limits<double>::quiet_NaN();
    if (!is_relax(0.5)) {
        ok_relax = false;
        notes += " lower relaxation bracket not relaxation;";
    } else if (is_relax(1.2)) {
        ok_relax = false;
        notes += " upper relaxation bracket not mixed-mode;";
    } else {
        double lo = 0.5;
        double hi = 1.2;
        for (int i = 0; i < 8; ++i) {
            const double mid = 0.5 * (lo + hi);
            (is_relax(mid) ? lo : hi) = mid;
        }
        lambda_relax = 0.5 * (lo + hi);
    }
    const double target_relax =
        lambda_r(KoperParams{-4.5, 0.0, eps_hat_r, delta_r}, Side::Minus);
    const double tol_relax = 5.0 * delta_r;
    if (ok_relax && !(std::abs(lambda_relax - target_relax) <= tol_relax)) {
        ok_relax = false;
        notes += fmt(" relaxation edge %.4f vs %.4f;", lambda_relax,
                     target_relax);
    }

    r.passed = ok_onset && ok_relax;
    r.detail = fmt("onset %.4f (target %.4f, tol %.2f); relaxation edge %.4f "
                   "at rate scale %g (target %.4f, tol %.2f)%s",
                   lambda_onset, target_onset, tol_onset, lambda_relax,
                   eps_hat_r, target_relax, tol_relax, notes.c_str());
    return r;
}

CriterionResult crit_lao_runs() {
    CriterionResult r;
    struct Row {
        double delta;
        double t_end;
        int stride;
        int count = 0;
        int within = 0;
        double med_obs = 0.0;
        double med_pred = 0.0;
        double mean_obs = 0.0;
        double max_obs = 0.0;
    };
    Row rows[] = {{0.01, 3000.0, 2}, {0.001, 8000.0, 8}};
    bool ok = true;
    for (Row& row : rows) {
        const KoperParams kp{-4.5, 1.5, 0.01, row.delta};
        const NormalFormParams p = koper_to_normal_form(kp);
        const Trajectory traj = run_koper_nf(kp, row.t_end, row.stride);
        const Trajectory tail = transient_strip(traj, 0.4);
        const auto passes = scan_passages(tail, drift_endpoints(p).x_max);
        std::vector<double> obs;
        std::vector<double> pred;
        for (const Passage& q : passes) {
            if (q.runs_after < 1 || !std::isfinite(q.z_capture_after) ||
                !std::isfinite(q.z_exit))
                continue;
            const double z_out_rel = q.z_exit - q.z_capture_after;
            const double z_in_rel =
                q.z_first_landing_after - q.z_capture_after;
            if (!(z_out_rel > 0.0)) continue;
            const LaoPrediction lp = lao_count(p, z_in_rel, z_out_rel);
            if (lp.relaxation) continue;
            obs.push_back(static_cast<double>(q.runs_after));
            pred.push_back(static_cast<double>(lp.count));
        }
        row.count = static_cast<int>(obs.size());
        for (size_t i = 0; i < obs.size(); ++i)
            if (std::abs(obs[i] - pred[i]) <= 1.0) ++row.within;
        row.med_obs = median(obs);
        row.med_pred = median(pred);
        for (const double v : obs) {
            row.mean_obs += v;
            row.max_obs = std::max(row.max_obs, v);
        }
        if (!obs.empty()) row.mean_obs /= static_cast<double>(obs.size());
        const bool ok_row = row.count >= 20 &&
                            row.within * 10 >= row.count * 9 &&
                            std::abs(row.med_obs - row.med_pred) <= 1.0;
        ok = ok && ok_row;
    }
    // The slower drift stretches the longest uninterrupted large-loop train.
    // Partial captures can split some trains into shorter pieces, so the
    // mean is not monotone in the drift rate; the longest train is.
    if (!(rows[1].max_obs > rows[0].max_obs)) ok = false;
    r.passed = ok;
    r.detail = fmt("delta 0.01: %d/%d within 1, medians %.1f/%.1f, mean %.2f, "
                   "max %g; delta 0.001: %d/%d within 1, medians %.1f/%.1f, "
                   "mean %.2f, max %g",
                   rows[0].within, rows[0].count, rows[0].med_obs,
                   rows[0].med_pred, rows[0].mean_obs, rows[0].max_obs,
                   rows[1].within, rows[1].count, rows[1].med_obs,
                   rows[1].med_pred, rows[1].mean_obs, rows[1].max_obs);
    return r;
}

CriterionResult crit_membrane() {
    CriterionResult r;
    HHParams base;
    base.tau_h = 45.0;
    base.eps = 0.0073;
    const auto pts = sweep_hh({23.0, 25.6, 26.25, 27.0}, base);
    std::string obs;
    for (const HHSweepPoint& pt : pts) {
        obs += fmt("I=%.4g %s '%s'; ", pt.current,
                   pt.ok ? regime_name(pt.regime).c_str() : "failed",
                   pt.ok ? pt.farey.c_str() : pt.error.c_str());
    }
    const bool ok_23 = pts[0].ok && pts[0].regime == RegimeLabel::MmoDouble;
    const bool ok_2625 = pts[2].ok &&
                         (pts[2].regime == RegimeLabel::MmoSingleAbove ||
                          pts[2].regime == RegimeLabel::MmoSingleBelow);
    const bool ok_27 =
        pts[3].ok && pts[3].regime == RegimeLabel::RelaxationTwoScale;
    const bool want_256 = pts[1].ok &&
                          (pts[1].regime == RegimeLabel::Exotic ||
                           pts[1].regime == RegimeLabel::MmoDouble);
    if (!want_256) obs += "I=25.6 outside lenient set (logged only); ";
    r.passed = ok_23 && ok_2625 && ok_27;
    r.detail = obs + fmt("hard checks: I=23 %s, I=26.25 %s, I=27 %s",
                         ok_23 ? "ok" : "MISMATCH",
                         ok_2625 ? "ok" : "MISMATCH",
                         ok_27 ? "ok" : "MISMATCH");
    return r;
}

CriterionResult crit_drift_oracle() {
    CriterionResult r;

    // Quadrature cross-check: composite Simpson on the pole-free reduced
    // integrand (the shared factor s divided out of numerator and
    // denominator) over random pieces of the two return legs.
    std::mt19937 rng(777u);
    std::uniform_real_distribution<double> uk(-7.0, -4.2);
    std::uniform_real_distribution<double> ul(0.0, 1.5);
    std::uniform_real_distribution<double> uu(0.02, 0.98);
    double worst_quad = 0.0;
    bool ok_quad = true;
    for (int trial = 0; trial < 20; ++trial) {
        const NormalFormParams p = nf(uk(rng), ul(rng));
        const DriftEndpoints e = drift_endpoints(p);
        const double lo = (trial % 2 == 0) ? e.x_star_max : e.x_max;
        const double hi = (trial % 2 == 0) ? 0.0 : e.x_0;
        double u1 = uu(rng);
        double u2 = uu(rng);
        if (u1 > u2) std::swap(u1, u2);
        if (u2 - u1 < 0.05) u2 = std::min(0.98, u1 + 0.05);
        const double a = lo + (hi - lo) * u1;
        const double b = lo + (hi - lo) * u2;
        const CubicF F = cubic_f(p);
        const auto f = [&](double s) {
            const double num =
                (2.0 * p.f2 + 3.0 * p.f3 * s) * (p.mu + p.phi(s, F(s), 0.0));
            const double den =
                p.alpha + p.beta * (p.f2 * s + p.f3 * s * s);
            return num / den;
        };
        const long n = 1000000;
        const double h = (b - a) / static_cast<double>(n);
        double acc = f(a) + f(b);
        for (long i = 1; i < n; ++i)
            acc += f(a + h * static_cast<double>(i)) * ((i % 2) ? 4.0 : 2.0);
        const double simpson = acc * h / 3.0;
        const double diff = std::abs(simpson - g_drift(p, a, b, 0.0).value);
        worst_quad = std::max(worst_quad, diff);
        ok_quad = ok_quad && diff <= 1e-8;
    }

    // Odd symmetry of the cubic-rate model, checked in its own coordinates
    // where lambda -> -lambda mirrors states exactly.
    const KoperParams kp{-4.5, 1.5, 0.01, 0.01};
    const KoperParams km{-4.5, -1.5, 0.01, 0.01};
    IntegratorConfig settle_cfg;
    settle_cfg.stride = 64;
    const Trajectory settle =
        integrate(make_system(kp), State3{-1.0, 2.0, 0.1}, 0.0, 3000.0,
                  settle_cfg);
    const State3 s1 = settle.states.back();
    const State3 s2{-s1.x, -s1.y, -s1.z};
    const Trajectory t1 = integrate(make_system(kp), s1, 0.0, 50.0);
    const Trajectory t2 = integrate(make_system(km), s2, 0.0, 50.0);
    bool ok_mirror = t1.t.size() == t2.t.size();
    double sup = 0.0;
    const size_t m = std::min(t1.t.size(), t2.t.size());
    for (size_t i = 0; i < m; ++i) {
        sup = std::max(sup, std::abs(t1.states[i].x + t2.states[i].x));
        sup = std::max(sup, std::abs(t1.states[i].y + t2.states[i].y));
        sup = std::max(sup, std::abs(t1.states[i].z + t2.states[i].z));
    }
    ok_mirror = ok_mirror && sup <= 1e-6;

    r.passed = ok_quad && ok_mirror;
    r.detail = fmt("20 Simpson cross-checks worst %.2e (cap 1e-8); mirror "
                   "sup %.2e over %zu samples%s",
                   worst_quad, sup, m,
                   t1.t.size() == t2.t.size() ? "" : " (sample counts differ)");
    return r;
}

}  // namespace

std::vector<CriterionResult> run_acceptance() {
    struct Entry {
        int id;
        const char* name;
        CriterionResult (*fn)();
    };
    const Entry table[] = {
        {1, "relative configuration trichotomy", crit_trichotomy},
        {2, "nullcline fold points", crit_fold_points},
        {3, "fold landmark scaling", crit_landmarks},
        {4, "delayed-Hopf entry-exit map", crit_entry_exit},
        {5, "reference regime labels", crit_regimes},
        {6, "Farey signatures", crit_farey},
        {7, "regime boundary locations", crit_boundaries},
        {8, "large-loop run lengths", crit_lao_runs},
        {9, "membrane-model transitions", crit_membrane},
        {10, "drift quadrature and symmetry", crit_drift_oracle},
    };
    std::vector<CriterionResult> out;
    for (const Entry& e : table) {
        const auto t0 = std::chrono::steady_clock::now();
        CriterionResult r;
        try {
            r = e.fn();
        } catch (const std::exception& ex) {
            r.passed = false;
            r.detail = fmt("exception: %s", ex.what());
        }
        const auto t1 = std::chrono::steady_clock::now();
        r.id = e.id;
        r.name = e.name;
        r.seconds = std::chrono::duration<double>(t1 - t0).count();
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace mmo
