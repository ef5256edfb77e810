#include "mmo/drift.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace mmo {

namespace {

// 7-point Gauss / 15-point Kronrod pair on [-1, 1].  Odd-index abscissas
// carry the embedded Gauss rule.
constexpr double kGkNodes[8] = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691,
    0.7415311855993944, 0.5860872354676911, 0.4058451513773972,
    0.2077849550078985, 0.0,
};
constexpr double kKronrodWeights[8] = {
    0.0229353220105292, 0.0630920926299785, 0.1047900103222502,
    0.1406532597155259, 0.1690047266392679, 0.1903505780647854,
    0.2044329400752989, 0.2094821410847278,
};
constexpr double kGaussWeights[4] = {
    0.1294849661688697, 0.2797053914892767, 0.3818300505051189,
    0.4179591836734694,
};

struct Panel {
    double integral = 0.0;
    double estimate = 0.0;
};

template <typename F>
Panel gk15(const F& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double kron = kKronrodWeights[7] * fc;
    double gauss = kGaussWeights[3] * fc;
    for (int i = 0; i < 7; ++i) {
        const double lo = f(c - h * kGkNodes[i]);
        const double hi = f(c + h * kGkNodes[i]);
        kron += kKronrodWeights[i] * (lo + hi);
        if (i % 2 == 1) gauss += kGaussWeights[i / 2] * (lo + hi);
    }
    return {kron * h, std::abs((kron - gauss) * h)};
}

template <typename F>
void refine(const F& f, double a, double b, const Panel& panel, double tol,
            double& sum, double& err, int depth) {
    if (panel.estimate <= tol || depth >= 48) {
        if (panel.estimate > tol)
            throw std::runtime_error("drift quadrature failed to converge");
        sum += panel.integral;
        err += panel.estimate;
        return;
    }
    const double m = 0.5 * (a + b);
    refine(f, a, m, gk15(f, a, m), 0.5 * tol, sum, err, depth + 1);
    refine(f, m, b, gk15(f, m, b), 0.5 * tol, sum, err, depth + 1);
}

// Adaptive quadrature over [lo, hi]: a coarse pass fixes the absolute
// tolerance relative to the integral's magnitude, then each coarse panel is
// refined until its Gauss/Kronrod discrepancy drops below its share.
template <typename F>
std::pair<double, double> integrate(const F& f, double lo, double hi) {
    constexpr int kCoarse = 8;
    const double width = (hi - lo) / kCoarse;
    Panel coarse[kCoarse];
    double l1 = 0.0;
    for (int i = 0; i < kCoarse; ++i) {
        coarse[i] = gk15(f, lo + i * width, lo + (i + 1) * width);
        l1 += std::abs(coarse[i].integral);
    }
    const double tol = 1e-10 * std::max(1.0, l1);
    double sum = 0.0;
    double err = 0.0;
    for (int i = 0; i < kCoarse; ++i)
        refine(f, lo + i * width, lo + (i + 1) * width, coarse[i],
               tol / kCoarse, sum, err, 0);
    return {sum, err};
}

// Rejects segments on which the denominator changes sign or comes within a
// factor of 1e-7 of zero relative to its largest sampled magnitude.  The
// magnitude guard catches even-order touches that never flip sign.
template <typename D>
void require_no_pole(const D& den, double lo, double hi) {
    constexpr int kSamples = 4096;
    double max_abs = 0.0;
    double min_abs = std::numeric_limits<double>::infinity();
    double prev = den(lo);
    bool crossing = false;
    for (int i = 0; i <= kSamples; ++i) {
        const double s = (i == 0) ? prev
                                  : den(lo + (hi - lo) * i / kSamples);
        if (i > 0 && ((s < 0.0) != (prev < 0.0))) crossing = true;
        max_abs = std::max(max_abs, std::abs(s));
        min_abs = std::min(min_abs, std::abs(s));
        prev = s;
    }
    if (crossing || min_abs == 0.0 || min_abs <= 1e-7 * max_abs)
        throw std::runtime_error("drift integrand pole");
}

NormalFormParams with_mu_phi(const NormalFormParams& p, double mu,
                             PhiSpec phi) {
    NormalFormParams q = p;
    q.mu = mu;
    q.phi = std::move(phi);
    return q;
}

// Net drift over one singular return at the given mu: upper segment from x_0
// down to x_max plus lower segment from x_star_max up to 0, both at z0 = 0.
double return_drift(const NormalFormParams& p, const DriftEndpoints& e,
                    double mu) {
    const NormalFormParams q = with_mu_phi(p, mu, p.phi);
    return g_drift(q, e.x_0, e.x_max, 0.0).value +
           g_drift(q, e.x_star_max, 0.0, 0.0).value;
}

} // namespace

DriftEndpoints drift_endpoints(const NormalFormParams& p) {
    if (p.f3 == 0.0) throw std::invalid_argument("degenerate cubic");
    DriftEndpoints e;
    e.x_max = -2.0 * p.f2 / (3.0 * p.f3);
    e.x_star_max = p.f2 / (3.0 * p.f3);
    e.x_0 = -p.f2 / p.f3;
    return e;
}

DriftValue g_drift(const NormalFormParams& p, double x0, double x1,
                   double z0) {
    if (!(std::isfinite(x0) && std::isfinite(x1) && std::isfinite(z0)))
        throw std::invalid_argument("non-finite drift segment");
    DriftValue out;
    out.x0 = x0;
    out.x1 = x1;
    out.z0 = z0;
    out.mu = p.mu;
    if (x0 == x1) return out;

    const CubicF F = cubic_f(p);
    const double lo = std::min(x0, x1);
    const double hi = std::max(x0, x1);
    double value = 0.0;
    double err = 0.0;
    if (z0 == 0.0) {
        // divide the shared factor s out of F'(s) and alpha s + beta F(s)
        auto den = [&p](double s) {
            return p.alpha + p.beta * (p.f2 + p.f3 * s) * s;
        };
        require_no_pole(den, lo, hi);
        auto f = [&](double s) {
            return (2.0 * p.f2 + 3.0 * p.f3 * s) *
                   (p.mu + p.phi(s, F(s), 0.0)) / den(s);
        };
        std::tie(value, err) = integrate(f, lo, hi);
    } else {
        const CubicG G = cubic_g(p);
        auto den = [&](double s) { return G(s) - z0; };
        require_no_pole(den, lo, hi);
        auto f = [&](double s) {
            return F.d(s) * (p.mu + p.phi(s, F(s), z0)) / den(s);
        };
        std::tie(value, err) = integrate(f, lo, hi);
    }
    out.value = (x0 < x1) ? value : -value;
    out.error = err;
    return out;
}

double strong_manifold_graph(const NormalFormParams& p, double x) {
    if (x == 0.0) return 0.0;
    return p.delta * g_drift(p, 0.0, x, 0.0).value;
}

double mu_r_minus(const NormalFormParams& p) {
    if (classify_relative_config(p).kind != RelKind::Remote)
        throw std::invalid_argument(
            "mu_r defined only for remote singularities");
    const DriftEndpoints e = drift_endpoints(p);

    // Route one: the net drift is affine in mu, so solve directly from the
    // phi part (mu = 0) and the unit-mu kernel (phi switched off).
    const NormalFormParams pd = with_mu_phi(p, 1.0, PhiSpec::zero());
    const double den = g_drift(pd, e.x_0, e.x_max, 0.0).value +
                       g_drift(pd, e.x_star_max, 0.0, 0.0).value;
    const NormalFormParams pn = with_mu_phi(p, 0.0, p.phi);
    const double num = g_drift(pn, e.x_0, e.x_max, 0.0).value +
                       g_drift(pn, e.x_star_max, 0.0, 0.0).value;
    if (den == 0.0) throw std::runtime_error("mu_r balance is degenerate");
    const double ratio = -num / den;

    // Route two: bracket the zero of the net drift and bisect.
    double lo = ratio - std::max(1.0, std::abs(ratio));
    double hi = ratio + std::max(1.0, std::abs(ratio));
    double slo = return_drift(p, e, lo);
    double shi = return_drift(p, e, hi);
    for (int i = 0; i < 8 && (slo < 0.0) == (shi < 0.0); ++i) {
        const double half = 0.5 * (hi - lo);
        lo -= half;
        hi += half;
        slo = return_drift(p, e, lo);
        shi = return_drift(p, e, hi);
    }
    if ((slo < 0.0) == (shi < 0.0))
        throw std::runtime_error("mu_r root bracketing failed");
    for (int i = 0; i < 64; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double smid = return_drift(p, e, mid);
        if (smid == 0.0) {
            lo = hi = mid;
            break;
        }
        if ((smid < 0.0) == (slo < 0.0)) {
            lo = mid;
            slo = smid;
        } else {
            hi = mid;
        }
    }
    const double root = 0.5 * (lo + hi);
    if (std::abs(root - ratio) > 1e-9 * std::max(1.0, std::abs(ratio)))
        throw std::runtime_error("mu_r dual-route mismatch");
    return ratio;
}

double lambda_r(const KoperParams& kp, Side side) {
    if (!(kp.k < -4.0))
        throw std::invalid_argument("lambda_r requires k < -4");
    const double mu = mu_r_minus(koper_to_normal_form(kp));
    const double lam = kp.k * mu - (kp.k + 2.0);
    return side == Side::Minus ? lam : -lam;
}

LaoPrediction lao_count(const NormalFormParams& p, double z_in,
                        double z_out) {
    if (!(std::isfinite(z_in) && std::isfinite(z_out)))
        throw std::invalid_argument("non-finite z bounds");
    if (!(z_out > 0.0))
        throw std::invalid_argument("lao_count requires z_out > 0");
    if (classify_relative_config(p).kind != RelKind::Remote)
        throw std::invalid_argument("lao_count requires a remote configuration");

    LaoPrediction out;
    if (z_in >= z_out) {
        out.relaxation = true;
        return out;
    }
    if (z_in < 0.0) {
        out.count = 1;
        return out;
    }
    const DriftEndpoints e = drift_endpoints(p);
    const double per_return = p.delta * return_drift(p, e, p.mu);
    if (per_return >= 0.0) {
        out.relaxation = true;
        return out;
    }
    const double loops = std::floor(z_out / -per_return);
    out.count = 1 + static_cast<long>(std::min(loops, 1e15));
    return out;
}

} // namespace mmo
