#include "mmo/local.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace mmo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double trace_at(const NormalFormParams& p, double x) {
    return cubic_f(p).d(x) + p.eps * p.beta;
}

// tr^2 - 4 det collapses to (F'(x) - eps*beta)^2 - 4 eps alpha, which is the
// numerically stable form used throughout.
double disc_at(const NormalFormParams& p, double x) {
    const double w = cubic_f(p).d(x) - p.eps * p.beta;
    return w * w - 4.0 * p.eps * p.alpha;
}

double bisect_to_limit(const std::function<double(double)>& f, double lo, double hi) {
    double flo = f(lo);
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        const double fm = f(mid);
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double bracketed_root(const std::function<double(double)>& f, double lo, double hi,
                      const std::string& what) {
    double flo = f(lo);
    double fhi = f(hi);
    for (int i = 0; i < 3 && (flo < 0.0) == (fhi < 0.0); ++i) {
        const double span = hi - lo;
        lo -= 0.5 * span;
        hi += 0.5 * span;
        flo = f(lo);
        fhi = f(hi);
    }
    if ((flo < 0.0) == (fhi < 0.0))
        throw std::runtime_error("failed to bracket " + what +
                                 " near the fold (eps outside the local regime?)");
    return bisect_to_limit(f, lo, hi);
}

State3 on_m2(const NormalFormParams& p, double x) {
    return State3{x, cubic_f(p)(x), cubic_g(p)(x)};
}

double cn_offset(const NormalFormParams& p) {
    return p.alpha * p.beta * (5.0 * p.f2 - 3.0 * (1.0 - p.alpha * p.f3)) /
           (4.0 * (1.0 + p.f2) * p.f2) * p.eps;
}

void require_local_orientation(const NormalFormParams& p) {
    if (!(p.eps > 0.0)) throw std::invalid_argument("landmarks require eps > 0");
    if (!(p.alpha > 0.0)) throw std::invalid_argument("landmarks require alpha > 0");
    if (!(p.f2 > 0.0) || !(p.f3 < 0.0))
        throw std::invalid_argument("landmarks require f2 > 0 and f3 < 0");
}

State3 plus_singularity(const NormalFormParams& p) {
    for (const FoldedSingularity& q : folded_singularities(p))
        if (q.which == Side::Plus) return q.location;
    throw std::runtime_error("no folded singularity on the plus side");
}

// Reflecting the normal form through the folded singularity q+ yields another
// copy with the same (f2, f3, alpha, beta, eps, delta), drift offset
// mu~ = -(mu + phi(q+)), and forcing phi~(s) = phi(q+) - phi(q+ - s).
NormalFormParams reflected_params(const NormalFormParams& p, const State3& q) {
    NormalFormParams r = p;
    const double phi_q = p.phi(q.x, q.y, q.z);
    r.mu = -(p.mu + phi_q);
    if (p.phi.is_affine()) {
        r.phi = PhiSpec{0.0, p.phi.cx, p.phi.cy, p.phi.cz, nullptr};
    } else {
        const PhiSpec orig = p.phi;
        r.phi = PhiSpec{};
        r.phi.general = [orig, q, phi_q](double x, double y, double z) {
            return phi_q - orig(q.x - x, q.y - y, q.z - z);
        };
    }
    return r;
}

LocalLandmarks minus_landmarks(const NormalFormParams& p, LandmarkMode mode) {
    require_local_orientation(p);
    const CubicF F = cubic_f(p);
    const double s0 = std::sqrt(p.alpha * p.eps) / p.f2;  // degenerate-node scale

    double x_dh = 0.0, x_dnm = 0.0, x_dnp = 0.0;
    if (mode == LandmarkMode::Asymptotic) {
        const double e1 = p.beta / (2.0 * p.f2) * p.eps;
        x_dh = -e1;
        x_dnm = -(s0 + e1);
        x_dnp = s0 + e1;
    } else {
        auto tr = [&](double x) { return F.d(x) + p.eps * p.beta; };
        auto dc = [&](double x) {
            const double w = F.d(x) - p.eps * p.beta;
            return w * w - 4.0 * p.eps * p.alpha;
        };
        x_dh = bracketed_root(tr, -0.5 * s0, 0.5 * s0, "the trace root");
        x_dnm = bracketed_root(dc, -3.0 * s0, -0.2 * s0, "the lower discriminant root");
        x_dnp = bracketed_root(dc, 0.2 * s0, 3.0 * s0, "the upper discriminant root");
    }

    LocalLandmarks lm;
    lm.side = Side::Minus;
    lm.mode = mode;
    lm.p_dh = on_m2(p, x_dh);
    lm.p_dn_minus = on_m2(p, x_dnm);
    lm.p_dn_plus = on_m2(p, x_dnp);
    lm.z_cn = lm.p_dh.z + cn_offset(p);
    lm.nodal = ZRange{-kInf, lm.p_dn_minus.z};
    lm.spiral = ZRange{lm.p_dn_minus.z, lm.p_dh.z};
    lm.canard = ZRange{std::min(lm.p_dh.z, lm.z_cn), std::max(lm.p_dh.z, lm.z_cn)};
    return lm;
}

State3 reflect_back(const State3& q, const State3& s) {
    return State3{q.x - s.x, q.y - s.y, q.z - s.z};
}

ZRange reflect_back(const State3& q, const ZRange& r) {
    return ZRange{q.z - r.hi, q.z - r.lo};
}

}  // namespace

EigenPair jacobian_eigenvalues(const NormalFormParams& p, double x) {
    const double tr = trace_at(p, x);
    const double disc = disc_at(p, x);
    std::complex<double> root;
    if (disc >= 0.0)
        root = std::sqrt(disc);
    else
        root = std::complex<double>(0.0, std::sqrt(-disc));
    return EigenPair{0.5 * (tr + root), 0.5 * (tr - root)};
}

LocalLandmarks landmarks(const NormalFormParams& p, Side side, LandmarkMode mode) {
    if (side == Side::Minus) return minus_landmarks(p, mode);

    const State3 q = plus_singularity(p);
    const LocalLandmarks m = minus_landmarks(reflected_params(p, q), mode);
    LocalLandmarks lm;
    lm.side = Side::Plus;
    lm.mode = mode;
    lm.p_dh = reflect_back(q, m.p_dh);
    lm.p_dn_minus = reflect_back(q, m.p_dn_minus);
    lm.p_dn_plus = reflect_back(q, m.p_dn_plus);
    lm.z_cn = q.z - m.z_cn;
    lm.nodal = reflect_back(q, m.nodal);
    lm.spiral = reflect_back(q, m.spiral);
    lm.canard = reflect_back(q, m.canard);
    return lm;
}

Criticality hopf_criticality(const NormalFormParams& p) {
    const double threshold = 0.6 * (1.0 - p.alpha * p.f3);
    const double gap = p.f2 - threshold;
    const double tol = 1e-12 * std::max({1.0, std::abs(p.f2), std::abs(threshold)});
    if (gap < -tol) return Criticality::Supercritical;
    if (gap > tol) return Criticality::Subcritical;
    return Criticality::Degenerate;
}

double mu_sh(const NormalFormParams& p, Side side, ShOrder order) {
    State3 at;
    if (order == ShOrder::Singular) {
        for (const FoldedSingularity& q : folded_singularities(p))
            if (q.which == side) at = q.location;
    } else if (side == Side::Minus) {
        at = on_m2(p, -p.beta / (2.0 * p.f2) * p.eps);
    } else {
        const State3 q = plus_singularity(p);
        const NormalFormParams r = reflected_params(p, q);
        at = reflect_back(q, on_m2(r, -r.beta / (2.0 * r.f2) * r.eps));
    }
    return -p.phi(at.x, at.y, at.z);
}

double lambda_sh(const KoperParams& kp, Side side) {
    if (!(kp.k < 0.0)) throw std::invalid_argument("Koper requires k < 0");
    const double lam = -(2.0 + kp.k) + (-kp.k / 3.0) * kp.eps_hat;
    return side == Side::Minus ? lam : -lam;
}

namespace {

// Adaptive Simpson with a fixed absolute tolerance per call; the integrands
// here are smooth away from square-root kinks at the discriminant roots, and
// the depth cap keeps the kink cells from recursing unboundedly.
double simpson_step(const std::function<double(double)>& f, double a, double m, double b,
                    double fa, double fm, double fb, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return simpson_step(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_step(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate_cell(const std::function<double(double)>& f, double a, double b, double tol) {
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a);
    const double fm = f(m);
    const double fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_step(f, a, m, b, fa, fm, fb, whole, tol, 42);
}

}  // namespace

EntryExitResult entry_exit(const NormalFormParams& p, double x_in, Side side) {
    if (side == Side::Plus) {
        const State3 q = plus_singularity(p);
        const EntryExitResult m = entry_exit(reflected_params(p, q), q.x - x_in, Side::Minus);
        return EntryExitResult{x_in, q.x - m.x_out, m.branch, m.residual};
    }

    require_local_orientation(p);
    const CubicF F = cubic_f(p);
    const CubicG G = cubic_g(p);
    const double x_dh = minus_landmarks(p, LandmarkMode::Numeric).p_dh.x;

    auto re_nu1 = [&](double x) {
        const double tr = F.d(x) + p.eps * p.beta;
        const double w = F.d(x) - p.eps * p.beta;
        const double disc = w * w - 4.0 * p.eps * p.alpha;
        return disc <= 0.0 ? 0.5 * tr : 0.5 * (tr + std::sqrt(disc));
    };
    auto integrand = [&](double x) {
        const double drift = p.mu + p.phi(x, F(x), G(x));
        if (!(drift > 0.0)) throw std::runtime_error("slow flow vanishes on path");
        return re_nu1(x) / drift;
    };

    const EntryBranch branch =
        disc_at(p, x_in) <= 0.0 ? EntryBranch::Spiral : EntryBranch::Nodal;
    if (x_in == x_dh || std::abs(trace_at(p, x_in)) <= 1e-15 * std::max(1.0, std::abs(x_in)))
        return EntryExitResult{x_in, x_dh, branch, 0.0};
    if (!(re_nu1(x_in) < 0.0))
        throw std::invalid_argument("entry point not in the attracting range");

    const double s0 = std::sqrt(p.alpha * p.eps) / p.f2;
    const double x_cap = 0.9 * (-2.0 * p.f2 / (3.0 * p.f3));
    const double cell_tol = 1e-16 * std::max(1.0, std::abs(x_in));

    double a = x_in;
    double acc = 0.0;
    while (a < x_cap) {
        const double b = std::min(a + std::max(std::abs(a), 0.25 * s0) / 16.0, x_cap);
        const double before = acc;
        acc += integrate_cell(integrand, a, b, cell_tol);
        if (acc >= 0.0) {
            double lo = a;
            double hi = b;
            for (int i = 0; i < 80; ++i) {
                const double mid = 0.5 * (lo + hi);
                if (mid == lo || mid == hi) break;
                (before + integrate_cell(integrand, a, mid, cell_tol) < 0.0 ? lo : hi) = mid;
            }
            const double x_out = 0.5 * (lo + hi);
            const double residual = before + integrate_cell(integrand, a, x_out, cell_tol);
            return EntryExitResult{x_in, x_out, branch, residual};
        }
        a = b;
    }
    throw std::runtime_error("no balanced exit");
}

double sector_exit(const NormalFormParams& p, Side side) {
    return landmarks(p, side, LandmarkMode::Asymptotic).z_cn;
}

}  // namespace mmo
