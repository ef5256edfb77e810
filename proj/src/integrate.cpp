#include "mmo/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace mmo {

namespace {

State3 axpy(const State3& s, double a, const Vec3& v) {
    return {s.x + a * v[0], s.y + a * v[1], s.z + a * v[2]};
}

bool finite(const State3& s) {
    return std::isfinite(s.x) && std::isfinite(s.y) && std::isfinite(s.z);
}

bool finite(const Vec3& v) {
    return std::isfinite(v[0]) && std::isfinite(v[1]) && std::isfinite(v[2]);
}

double comp(const State3& s, int i) { return i == 0 ? s.x : (i == 1 ? s.y : s.z); }

// RMS norm of e against the tolerance scale built from y and ynew.
double error_norm(const Vec3& e, const State3& y, const State3& ynew,
                  double atol, double rtol) {
    double acc = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double sc =
            atol + rtol * std::max(std::fabs(comp(y, i)), std::fabs(comp(ynew, i)));
        const double q = e[i] / sc;
        acc += q * q;
    }
    return std::sqrt(acc / 3.0);
}

// Gaussian elimination with partial pivoting for A d = b; returns false on a
// vanishing pivot.
bool solve3(Mat3 a, Vec3 b, Vec3& d) {
    int idx[3] = {0, 1, 2};
    for (int c = 0; c < 3; ++c) {
        int piv = c;
        for (int r = c + 1; r < 3; ++r)
            if (std::fabs(a[idx[r]][c]) > std::fabs(a[idx[piv]][c])) piv = r;
        std::swap(idx[c], idx[piv]);
        const double p = a[idx[c]][c];
        if (!(std::fabs(p) > 1e-300)) return false;
        for (int r = c + 1; r < 3; ++r) {
            const double m = a[idx[r]][c] / p;
            for (int cc = c; cc < 3; ++cc) a[idx[r]][cc] -= m * a[idx[c]][cc];
            b[idx[r]] -= m * b[idx[c]];
        }
    }
    for (int c = 2; c >= 0; --c) {
        double s = b[idx[c]];
        for (int cc = c + 1; cc < 3; ++cc) s -= a[idx[c]][cc] * d[cc];
        d[c] = s / a[idx[c]][c];
    }
    return true;
}

// Dormand-Prince 5(4) tableau.
constexpr double A21 = 1.0 / 5;
constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187,
                 A53 = 64448.0 / 6561, A54 = -212.0 / 729;
constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247,
                 A64 = 49.0 / 176, A65 = -5103.0 / 18656;
constexpr double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192,
                 B5 = -2187.0 / 6784, B6 = 11.0 / 84;
constexpr double E1 = 35.0 / 384 - 5179.0 / 57600,
                 E3 = 500.0 / 1113 - 7571.0 / 16695,
                 E4 = 125.0 / 192 - 393.0 / 640,
                 E5 = -2187.0 / 6784 + 92097.0 / 339200,
                 E6 = 11.0 / 84 - 187.0 / 2100, E7 = -1.0 / 40;

struct StepResult {
    State3 y;
    Vec3 f;        // rhs at the new state (FSAL stage)
    double err = 0.0;
    bool finite = true;
};

StepResult dopri_step(const OdeSystem& sys, const State3& y, const Vec3& k1,
                      double h, double atol, double rtol) {
    StepResult r;
    r.finite = false;
    State3 w = axpy(y, h * A21, k1);
    if (!finite(w)) return r;
    const Vec3 k2 = sys.rhs(w);
    w = axpy(axpy(y, h * A31, k1), h * A32, k2);
    if (!finite(w)) return r;
    const Vec3 k3 = sys.rhs(w);
    w = axpy(axpy(axpy(y, h * A41, k1), h * A42, k2), h * A43, k3);
    if (!finite(w)) return r;
    const Vec3 k4 = sys.rhs(w);
    w = axpy(axpy(axpy(axpy(y, h * A51, k1), h * A52, k2), h * A53, k3),
             h * A54, k4);
    if (!finite(w)) return r;
    const Vec3 k5 = sys.rhs(w);
    w = axpy(axpy(axpy(axpy(axpy(y, h * A61, k1), h * A62, k2), h * A63, k3),
                  h * A64, k4),
             h * A65, k5);
    if (!finite(w)) return r;
    const Vec3 k6 = sys.rhs(w);
    if (!finite(k2) || !finite(k3) || !finite(k4) || !finite(k5) ||
        !finite(k6))
        return r;
    r.finite = true;
    State3 ynew = y;
    Vec3 err{};
    for (int i = 0; i < 3; ++i) {
        const double d = B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] +
                         B6 * k6[i];
        err[i] = E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] +
                 E6 * k6[i];
        if (i == 0) ynew.x += h * d;
        if (i == 1) ynew.y += h * d;
        if (i == 2) ynew.z += h * d;
    }
    if (!finite(ynew)) {
        r.finite = false;
        return r;
    }
    const Vec3 k7 = sys.rhs(ynew);
    for (int i = 0; i < 3; ++i) err[i] = h * (err[i] + E7 * k7[i]);
    if (!finite(k7) || !finite(err)) {
        r.finite = false;
        return r;
    }
    r.y = ynew;
    r.f = k7;
    r.err = error_norm(err, y, ynew, atol, rtol);
    return r;
}

// Second-order L-stable singly diagonally implicit scheme, gamma = 1 - 1/sqrt(2).
constexpr double SdirkGamma = 0.29289321881345254;

bool sdirk_stage(const OdeSystem& sys, const State3& base, double h, Vec3& k,
                 double atol, double rtol) {
    for (int it = 0; it < 30; ++it) {
        const State3 arg = axpy(base, h * SdirkGamma, k);
        if (!finite(arg)) return false;
        const Vec3 f = sys.rhs(arg);
        if (!finite(f)) return false;
        Mat3 m = sys.jacobian(arg);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
                m[r][c] = (r == c ? 1.0 : 0.0) - h * SdirkGamma * m[r][c];
        const Vec3 res{f[0] - k[0], f[1] - k[1], f[2] - k[2]};
        Vec3 d{};
        if (!solve3(m, res, d)) return false;
        for (int i = 0; i < 3; ++i) k[i] += d[i];
        double scaled = 0.0;
        for (int i = 0; i < 3; ++i) {
            const double sc = atol + rtol * std::fabs(comp(arg, i));
            scaled = std::max(scaled, std::fabs(d[i]) / sc);
        }
        if (scaled <= 1e-3) return true;
    }
    return false;
}

bool sdirk_step(const OdeSystem& sys, const State3& y, const Vec3& fy,
                double h, double atol, double rtol, State3& out) {
    Vec3 k1 = fy;
    if (!sdirk_stage(sys, y, h, k1, atol, rtol)) return false;
    const State3 base2 = axpy(y, h * (1.0 - SdirkGamma), k1);
    Vec3 k2 = k1;
    if (!sdirk_stage(sys, base2, h, k2, atol, rtol)) return false;
    out = axpy(base2, h * SdirkGamma, k2);
    return finite(out);
}

// Cubic Hermite interpolation of one component and its time derivative.
double hermite(double y0, double y1, double f0, double f1, double h,
               double th) {
    const double t2 = th * th;
    const double t3 = t2 * th;
    return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + th) * h * f0 +
           (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * f1;
}

double hermite_d(double y0, double y1, double f0, double f1, double h,
                 double th) {
    const double t2 = th * th;
    return (6 * t2 - 6 * th) * (y0 - y1) / h + (3 * t2 - 4 * th + 1) * f0 +
           (3 * t2 - 2 * th) * f1;
}

State3 hermite_state(const State3& y0, const State3& y1, const Vec3& f0,
                     const Vec3& f1, double h, double th) {
    return {hermite(y0.x, y1.x, f0[0], f1[0], h, th),
            hermite(y0.y, y1.y, f0[1], f1[1], h, th),
            hermite(y0.z, y1.z, f0[2], f1[2], h, th)};
}

// Bisection for a sign change of g over [0, 1]; g(0) and g(1) must straddle.
template <typename G>
double bisect01(const G& g, double g0) {
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if (gm == 0.0) return mid;
        if ((gm < 0.0) == (g0 < 0.0))
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

void record_events(const OdeSystem& sys, Trajectory& traj, double t,
                   const State3& y0, const State3& y1, const Vec3& f0,
                   const Vec3& f1, double h) {
    if (f0[0] * f1[0] < 0.0) {
        const double th = bisect01(
            [&](double u) { return hermite_d(y0.x, y1.x, f0[0], f1[0], h, u); },
            f0[0]);
        TrajectoryEvent e;
        e.t = t + th * h;
        e.s = hermite_state(y0, y1, f0, f1, h, th);
        e.kind = f0[0] > 0.0 ? EventKind::Max : EventKind::Min;
        traj.events.push_back(e);
    }
    const double c = sys.section_x;
    if (std::isfinite(c) && y0.x > c && y1.x <= c) {
        const double th = bisect01(
            [&](double u) {
                return hermite(y0.x, y1.x, f0[0], f1[0], h, u) - c;
            },
            y0.x - c);
        TrajectoryEvent e;
        e.t = t + th * h;
        e.s = hermite_state(y0, y1, f0, f1, h, th);
        e.kind = EventKind::SectionDown;
        traj.events.push_back(e);
    }
}

// Starting step size from the scaled magnitudes of the state, the slope, and
// a forward Euler probe.
double initial_step(const OdeSystem& sys, const State3& y, const Vec3& f,
                    double atol, double rtol, double hmax) {
    auto scaled = [&](const Vec3& v, const State3& ref) {
        double acc = 0.0;
        for (int i = 0; i < 3; ++i) {
            const double sc = atol + rtol * std::fabs(comp(ref, i));
            const double q = v[i] / sc;
            acc += q * q;
        }
        return std::sqrt(acc / 3.0);
    };
    const double d0 = scaled({y.x, y.y, y.z}, y);
    const double d1 = scaled(f, y);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, hmax);
    const State3 y1 = axpy(y, h0, f);
    if (!finite(y1)) return std::min(1e-6, hmax);
    const Vec3 f1 = sys.rhs(y1);
    if (!finite(f1)) return std::min(1e-6, hmax);
    const Vec3 df{f1[0] - f[0], f1[1] - f[1], f1[2] - f[2]};
    const double d2 = scaled(df, y) / h0;
    const double dm = std::max(d1, d2);
    const double h1 = (dm <= 1e-15) ? std::max(1e-6, h0 * 1e-3)
                                    : std::pow(0.01 / dm, 0.2);
    return std::min({100.0 * h0, h1, hmax});
}

void validate(const IntegratorConfig& cfg, double span) {
    if (!(cfg.rel_tol > 0.0) || !(cfg.abs_tol > 0.0) || !(cfg.min_step > 0.0) ||
        cfg.max_steps <= 0 || cfg.stride < 1 ||
        (cfg.max_step != 0.0 && cfg.max_step < cfg.min_step))
        throw std::invalid_argument("invalid integrator config");
    if (!(span > 0.0)) throw std::invalid_argument("time span must advance");
}

std::array<std::complex<double>, 3> jacobian_eigs(const Mat3& a) {
    // characteristic cubic nu^3 - c2 nu^2 + c1 nu - c0
    const double c2 = a[0][0] + a[1][1] + a[2][2];
    const double c1 = a[0][0] * a[1][1] - a[0][1] * a[1][0] +
                      a[0][0] * a[2][2] - a[0][2] * a[2][0] +
                      a[1][1] * a[2][2] - a[1][2] * a[2][1];
    const double c0 = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
                      a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
                      a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    // depressed form t^3 + p t + q with nu = t + c2/3
    const double p = c1 - c2 * c2 / 3.0;
    const double q = -2.0 * c2 * c2 * c2 / 27.0 + c2 * c1 / 3.0 - c0;
    const double disc = 0.25 * q * q + p * p * p / 27.0;
    std::array<std::complex<double>, 3> nu;
    if (disc > 0.0) {
        const double s = std::sqrt(disc);
        const double u = std::cbrt(-0.5 * q + s);
        const double v = std::cbrt(-0.5 * q - s);
        const double r1 = u + v;
        nu[0] = r1 + c2 / 3.0;
        // deflate to a quadratic t^2 + r1 t + (r1^2 + p)
        const std::complex<double> sq =
            std::sqrt(std::complex<double>(r1 * r1 - 4.0 * (r1 * r1 + p), 0.0));
        nu[1] = (-r1 + sq) * 0.5 + c2 / 3.0;
        nu[2] = (-r1 - sq) * 0.5 + c2 / 3.0;
    } else {
        const double m = 2.0 * std::sqrt(std::max(0.0, -p / 3.0));
        const double arg = (m == 0.0)
                               ? 0.0
                               : std::clamp(3.0 * q / (p * m), -1.0, 1.0);
        const double th = std::acos(arg);
        for (int k = 0; k < 3; ++k)
            nu[k] = m * std::cos((th + 2.0 * M_PI * k) / 3.0) + c2 / 3.0;
    }
    // polish on the characteristic polynomial
    for (auto& v : nu) {
        for (int it = 0; it < 12; ++it) {
            const std::complex<double> pv =
                ((v - c2) * v + c1) * v - c0;
            const std::complex<double> dv = (3.0 * v - 2.0 * c2) * v + c1;
            if (std::abs(dv) < 1e-300) break;
            v -= pv / dv;
        }
    }
    std::sort(nu.begin(), nu.end(),
              [](const std::complex<double>& l, const std::complex<double>& r) {
                  if (l.real() != r.real()) return l.real() > r.real();
                  return l.imag() > r.imag();
              });
    return nu;
}

} // namespace

OdeSystem make_system(const NormalFormParams& p) {
    OdeSystem s;
    s.rhs = [p](const State3& w) { return normal_form_rhs(p, w); };
    s.jacobian = [p](const State3& w) { return normal_form_jacobian(p, w); };
    s.name = "normal";
    s.section_x = -p.f2 / (3.0 * p.f3);  // midpoint between the folds
    return s;
}

OdeSystem make_system(const KoperParams& p) {
    OdeSystem s;
    s.rhs = [p](const State3& w) { return koper_rhs(p, w); };
    s.jacobian = [p](const State3& w) { return koper_jacobian(p, w); };
    s.name = "koper";
    s.section_x = 0.0;  // midpoint between the cubic's folds at -1 and 1
    return s;
}

OdeSystem make_system(const HHParams& p) {
    OdeSystem s;
    s.rhs = [p](const State3& w) { return hh_rhs(p, w); };
    s.jacobian = [p](const State3& w) { return hh_jacobian(p, w); };
    s.name = "hh";
    return s;
}

Trajectory integrate(const OdeSystem& sys, const State3& s0, double t0,
                     double t1, const IntegratorConfig& cfg) {
    validate(cfg, t1 - t0);
    const double hmax = cfg.max_step > 0.0 ? cfg.max_step : (t1 - t0) / 10.0;
    const double atol = cfg.abs_tol;
    const double rtol = cfg.rel_tol;

    Trajectory traj;
    if (!finite(s0)) throw std::invalid_argument("non-finite state");

    double t = t0;
    State3 y = s0;
    Vec3 f = sys.rhs(y);
    traj.t.push_back(t);
    traj.states.push_back(y);
    traj.h.push_back(0.0);

    double h = std::max(cfg.min_step,
                        initial_step(sys, y, f, atol, rtol, hmax));
    double err_old = 1e-4;
    long nsteps = 0;
    long since_store = 0;
    int collapse = 0;
    bool implicit = false;

    auto store = [&](double tt, const State3& yy, double hh, bool force) {
        ++since_store;
        if (!force && since_store < cfg.stride) return;
        since_store = 0;
        traj.t.push_back(tt);
        traj.states.push_back(yy);
        traj.h.push_back(hh);
    };
    auto fail = [&](IntegrationStatus st, const std::string& why) {
        if (traj.t.back() != t) store(t, y, 0.0, true);
        traj.status = st;
        traj.note = why;
    };

    while (t < t1) {
        if (++nsteps > cfg.max_steps) {
            fail(IntegrationStatus::MaxStepsExceeded,
                 "step budget exhausted at t = " + std::to_string(t));
            break;
        }
        double hs = std::min(h, t1 - t);
        const bool clipped = hs < h;

        if (!implicit) {
            const StepResult st = dopri_step(sys, y, f, hs, atol, rtol);
            if (!st.finite) {
                if (hs <= cfg.min_step) {
                    // explicit stepping cannot proceed at all; let the
                    // L-stable scheme decide whether the state is salvageable
                    implicit = true;
                    traj.used_implicit_fallback = true;
                    continue;
                }
                h = std::max(cfg.min_step, 0.25 * hs);
                if (h <= cfg.min_step && ++collapse >= 20) {
                    implicit = true;
                    traj.used_implicit_fallback = true;
                }
                continue;
            }
            const double err = std::max(st.err, 1e-30);
            if (err <= 1.0) {
                record_events(sys, traj, t, y, st.y, f, st.f, hs);
                t += hs;
                y = st.y;
                f = st.f;
                store(t, y, hs, t >= t1);
                double fac = 0.9 * std::pow(err, -0.14) *
                             std::pow(err_old, 0.08);
                fac = std::clamp(fac, 0.2, 5.0);
                err_old = std::max(err, 1e-4);
                double hn = hs * fac;
                if (!clipped || hn > h) h = hn;
            } else {
                h = hs * std::max(0.2, 0.9 * std::pow(err, -0.2));
            }
            if (h < cfg.min_step) {
                ++collapse;
                h = cfg.min_step;
                if (collapse >= 20) {
                    implicit = true;
                    traj.used_implicit_fallback = true;
                }
            } else {
                collapse = 0;
            }
            h = std::min(h, hmax);
        } else {
            State3 full, half1, half2;
            const bool ok = sdirk_step(sys, y, f, hs, atol, rtol, full) &&
                            sdirk_step(sys, y, f, 0.5 * hs, atol, rtol,
                                       half1) &&
                            sdirk_step(sys, half1, sys.rhs(half1), 0.5 * hs,
                                       atol, rtol, half2);
            if (!ok) {
                if (hs <= cfg.min_step) {
                    fail(IntegrationStatus::NonFiniteState,
                         "implicit stage failed near t = " +
                             std::to_string(t));
                    break;
                }
                h = std::max(cfg.min_step, 0.3 * hs);
                continue;
            }
            const Vec3 ev{(half2.x - full.x) / 3.0, (half2.y - full.y) / 3.0,
                          (half2.z - full.z) / 3.0};
            const double err =
                std::max(error_norm(ev, y, half2, atol, rtol), 1e-30);
            if (err <= 1.0 || hs <= cfg.min_step) {
                const Vec3 fnew = sys.rhs(half2);
                if (!finite(half2) || !finite(fnew)) {
                    fail(IntegrationStatus::NonFiniteState,
                         "state left the finite range near t = " +
                             std::to_string(t));
                    break;
                }
                record_events(sys, traj, t, y, half2, f, fnew, hs);
                t += hs;
                y = half2;
                f = fnew;
                store(t, y, hs, t >= t1);
                double hn = hs * std::clamp(0.9 * std::pow(err, -1.0 / 3.0),
                                            0.2, 5.0);
                if (!clipped || hn > h) h = hn;
            } else {
                h = hs * std::max(0.2, 0.9 * std::pow(err, -1.0 / 3.0));
            }
            h = std::clamp(h, cfg.min_step, hmax);
        }
        if (!finite(y)) {
            fail(IntegrationStatus::NonFiniteState,
                 "state left the finite range near t = " + std::to_string(t));
            break;
        }
    }

    if (traj.status == IntegrationStatus::Ok && traj.t.back() < t) {
        traj.t.push_back(t);
        traj.states.push_back(y);
        traj.h.push_back(0.0);
    }
    std::sort(traj.events.begin(), traj.events.end(),
              [](const TrajectoryEvent& a, const TrajectoryEvent& b) {
                  return a.t < b.t;
              });
    return traj;
}

EquilibriumReport find_equilibrium(const OdeSystem& sys, const State3& guess) {
    State3 w = guess;
    auto norm2 = [](const Vec3& v) {
        return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    };
    auto linf = [](const Vec3& v) {
        return std::max({std::fabs(v[0]), std::fabs(v[1]), std::fabs(v[2])});
    };
    Vec3 r = sys.rhs(w);
    double res = linf(r);
    for (int it = 0; it < 200 && res > 1e-12; ++it) {
        Vec3 d{};
        if (!solve3(sys.jacobian(w), {-r[0], -r[1], -r[2]}, d))
            throw std::runtime_error(
                "equilibrium search hit a singular jacobian");
        const double base = norm2(r);
        double step = 1.0;
        bool moved = false;
        for (int j = 0; j < 40; ++j) {
            const State3 trial = axpy(w, step, d);
            if (finite(trial)) {
                const Vec3 rt = sys.rhs(trial);
                if (finite(rt) && norm2(rt) < (1.0 - 1e-4 * step) * base) {
                    w = trial;
                    r = rt;
                    moved = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if (!moved) break;
        res = linf(r);
    }
    if (res > 1e-12) {
        std::ostringstream msg;
        msg << "equilibrium search did not converge (residual = " << res
            << ")";
        throw std::runtime_error(msg.str());
    }
    EquilibriumReport rep;
    rep.location = w;
    rep.residual = res;
    rep.eigenvalues = jacobian_eigs(sys.jacobian(w));
    rep.stable = true;
    for (const auto& ev : rep.eigenvalues)
        if (!(ev.real() < 0.0)) rep.stable = false;
    return rep;
}

namespace {

Trajectory strip_before(const Trajectory& traj, double cut) {
    Trajectory out;
    out.status = traj.status;
    out.used_implicit_fallback = traj.used_implicit_fallback;
    out.note = traj.note;
    for (std::size_t i = 0; i < traj.t.size(); ++i) {
        if (traj.t[i] < cut) continue;
        out.t.push_back(traj.t[i]);
        out.states.push_back(traj.states[i]);
        out.h.push_back(traj.h[i]);
    }
    for (const auto& e : traj.events)
        if (e.t >= cut) out.events.push_back(e);
    if (out.t.size() < 2)
        throw std::runtime_error("transient strip leaves an empty trajectory");
    return out;
}

} // namespace

Trajectory transient_strip(const Trajectory& traj, double fraction) {
    if (!(fraction >= 0.0) || !(fraction <= 1.0))
        throw std::invalid_argument("strip fraction outside [0, 1]");
    if (fraction == 0.0 || traj.t.empty()) return traj;
    const double cut =
        traj.t.front() + fraction * (traj.t.back() - traj.t.front());
    return strip_before(traj, cut);
}

Trajectory transient_strip_from(const Trajectory& traj, double t_start) {
    if (traj.t.empty() || t_start <= traj.t.front()) return traj;
    return strip_before(traj, t_start);
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& os,
                          const std::array<std::string, 3>& cols) {
    os << "t," << cols[0] << ',' << cols[1] << ',' << cols[2] << ",step\n";
    os << std::setprecision(17);
    for (std::size_t i = 0; i < traj.t.size(); ++i) {
        const State3& s = traj.states[i];
        os << traj.t[i] << ',' << s.x << ',' << s.y << ',' << s.z << ','
           << traj.h[i] << '\n';
    }
}

Trajectory read_trajectory_csv(std::istream& is) {
    Trajectory traj;
    std::string line;
    bool header_skipped = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        double vals[5] = {0, 0, 0, 0, 0};
        int n = 0;
        bool numeric = true;
        while (std::getline(row, cell, ',') && n < 5) {
            try {
                std::size_t used = 0;
                vals[n] = std::stod(cell, &used);
                if (used == 0) numeric = false;
            } catch (const std::exception&) {
                numeric = false;
            }
            if (!numeric) break;
            ++n;
        }
        if (!numeric) {
            if (!header_skipped && traj.t.empty()) {
                header_skipped = true;  // at most one header line
                continue;
            }
            throw std::runtime_error("malformed trajectory CSV row: " + line);
        }
        if (n < 4)
            throw std::runtime_error("trajectory CSV needs t and three states");
        if (!traj.t.empty() && vals[0] <= traj.t.back())
            throw std::runtime_error("trajectory CSV times not increasing");
        traj.t.push_back(vals[0]);
        traj.states.push_back({vals[1], vals[2], vals[3]});
        traj.h.push_back(n >= 5 ? vals[4] : 0.0);
    }
    return traj;
}

}  // namespace mmo
