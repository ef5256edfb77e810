#include "mmo/model.hpp"

#include <cmath>
#include <stdexcept>

namespace mmo {

namespace {

void require_finite(const State3& s) {
    if (!std::isfinite(s.x) || !std::isfinite(s.y) || !std::isfinite(s.z))
        throw std::invalid_argument("non-finite state");
}

// u / (1 - exp(-u)) and its derivative, with a series branch near u = 0.
double expm1_ratio(double u) {
    if (std::fabs(u) < 1e-5) return 1.0 + u / 2.0 + u * u / 12.0;
    return u / (-std::expm1(-u));
}
double expm1_ratio_d(double u) {
    if (std::fabs(u) < 1e-5) return 0.5 + u / 6.0;
    double em = std::exp(-u);
    double d = -std::expm1(-u);  // 1 - exp(-u)
    return (d - u * em) / (d * d);
}

std::array<double, 3> phi_gradient(const PhiSpec& phi, const State3& s) {
    if (phi.is_affine()) return {phi.cx, phi.cy, phi.cz};
    const double h = 1e-6;
    auto g = [&](int i) {
        State3 a = s, b = s;
        (i == 0 ? a.x : i == 1 ? a.y : a.z) += h;
        (i == 0 ? b.x : i == 1 ? b.y : b.z) -= h;
        return (phi(a.x, a.y, a.z) - phi(b.x, b.y, b.z)) / (2.0 * h);
    };
    return {g(0), g(1), g(2)};
}

}  // namespace

GateRates hh_rates(double v) {
    GateRates r;
    double um = (v + 40.0) / 10.0;
    r.am = expm1_ratio(um);
    r.dam = expm1_ratio_d(um) / 10.0;

    r.bm = 4.0 * std::exp(-(v + 65.0) / 18.0);
    r.dbm = -r.bm / 18.0;

    r.ah = 0.07 * std::exp(-(v + 65.0) / 20.0);
    r.dah = -r.ah / 20.0;

    r.bh = 1.0 / (1.0 + std::exp(-(v + 35.0) / 10.0));
    r.dbh = r.bh * (1.0 - r.bh) / 10.0;

    double un = (v + 55.0) / 10.0;
    r.an = 0.1 * expm1_ratio(un);
    r.dan = 0.1 * expm1_ratio_d(un) / 10.0;

    r.bn = 0.125 * std::exp(-(v + 65.0) / 80.0);
    r.dbn = -r.bn / 80.0;
    return r;
}

double hh_m_inf(double v) { auto r = hh_rates(v); return r.am / (r.am + r.bm); }
double hh_n_inf(double v) { auto r = hh_rates(v); return r.an / (r.an + r.bn); }
double hh_h_inf(double v) { auto r = hh_rates(v); return r.ah / (r.ah + r.bh); }
double hh_t_m(double v) { auto r = hh_rates(v); return 1.0 / (r.am + r.bm); }
double hh_t_n(double v) { auto r = hh_rates(v); return 1.0 / (r.an + r.bn); }
double hh_t_h(double v) { auto r = hh_rates(v); return 1.0 / (r.ah + r.bh); }

Vec3 normal_form_rhs(const NormalFormParams& p, const State3& s) {
    require_finite(s);
    double f = -s.y + p.f2 * s.x * s.x + p.f3 * s.x * s.x * s.x;
    double g = p.alpha * s.x + p.beta * s.y - s.z;
    double h = p.mu + p.phi(s.x, s.y, s.z);
    return {f / p.eps, g, p.delta * h};
}

Vec3 koper_rhs(const KoperParams& p, const State3& s) {
    require_finite(s);
    if (!(p.k < 0.0)) throw std::invalid_argument("Koper requires k < 0");
    double f = p.k * s.y + 3.0 * s.x - s.x * s.x * s.x - p.lambda;
    double g = s.x - 2.0 * s.y + s.z;
    double h = s.y - s.z;
    return {f / p.eps_hat, g, p.delta * h};
}

Vec3 hh_rhs(const HHParams& p, const State3& s) {
    require_finite(s);
    double v = s.x, n = s.y, h = s.z;
    double vm = 100.0 * v;
    GateRates r = hh_rates(vm);
    double m = r.am / (r.am + r.bm);
    double tn = 1.0 / (r.an + r.bn);
    double th = 1.0 / (r.ah + r.bh);
    double ninf = r.an * tn;
    double hinf = r.ah * th;
    double ibar = p.I / p.k_scale;
    double f = ibar - (v - p.E_na) * m * m * m * h - p.g_k * (v - p.E_k) * n * n * n * n -
               p.g_l * (v - p.E_l);
    return {f / p.eps, (ninf - n) / (p.tau_n * tn), (hinf - h) / (p.tau_h * th)};
}

Mat3 normal_form_jacobian(const NormalFormParams& p, const State3& s) {
    require_finite(s);
    auto g = phi_gradient(p.phi, s);
    double fp = 2.0 * p.f2 * s.x + 3.0 * p.f3 * s.x * s.x;
    return Mat3{{{fp / p.eps, -1.0 / p.eps, 0.0},
                 {p.alpha, p.beta, -1.0},
                 {p.delta * g[0], p.delta * g[1], p.delta * g[2]}}};
}

Mat3 koper_jacobian(const KoperParams& p, const State3& s) {
    require_finite(s);
    if (!(p.k < 0.0)) throw std::invalid_argument("Koper requires k < 0");
    return Mat3{{{(3.0 - 3.0 * s.x * s.x) / p.eps_hat, p.k / p.eps_hat, 0.0},
                 {1.0, -2.0, 1.0},
                 {0.0, p.delta, -p.delta}}};
}

Mat3 hh_jacobian(const HHParams& p, const State3& s) {
    require_finite(s);
    double v = s.x, n = s.y, h = s.z;
    double vm = 100.0 * v;
    GateRates r = hh_rates(vm);
    double sm = r.am + r.bm, sn = r.an + r.bn, sh = r.ah + r.bh;
    double m = r.am / sm;
    double dm = (r.dam * r.bm - r.am * r.dbm) / (sm * sm);  // d m_inf / dV
    double tn = 1.0 / sn, th = 1.0 / sh;
    double ninf = r.an * tn, hinf = r.ah * th;
    double dninf = (r.dan * r.bn - r.an * r.dbn) / (sn * sn);
    double dhinf = (r.dah * r.bh - r.ah * r.dbh) / (sh * sh);
    double dtn = -(r.dan + r.dbn) / (sn * sn);
    double dth = -(r.dah + r.dbh) / (sh * sh);

    double m3 = m * m * m;
    double dvdv = (-m3 * h - (v - p.E_na) * 3.0 * m * m * dm * 100.0 * h - p.g_k * n * n * n * n -
                   p.g_l) /
                  p.eps;
    double dvdn = -p.g_k * (v - p.E_k) * 4.0 * n * n * n / p.eps;
    double dvdh = -(v - p.E_na) * m3 / p.eps;

    double dndv = 100.0 * (dninf / tn - (ninf - n) * dtn / (tn * tn)) / p.tau_n;
    double dndn = -1.0 / (p.tau_n * tn);
    double dhdv = 100.0 * (dhinf / th - (hinf - h) * dth / (th * th)) / p.tau_h;
    double dhdh = -1.0 / (p.tau_h * th);

    return Mat3{{{dvdv, dvdn, dvdh}, {dndv, dndn, 0.0}, {dhdv, 0.0, dhdh}}};
}

NormalFormParams koper_to_normal_form(const KoperParams& p) {
    if (!(p.k < 0.0)) throw std::invalid_argument("Koper requires k < 0");
    double ak = -p.k;
    NormalFormParams q;
    q.f2 = 3.0 / ak;
    q.f3 = -1.0 / ak;
    q.alpha = 1.0;
    q.beta = -2.0;
    q.mu = (p.k + p.lambda + 2.0) / p.k;
    q.eps = p.eps_hat / ak;
    q.delta = p.delta;
    q.phi = PhiSpec::koper();
    return q;
}

State3 koper_state_to_normal_form(const KoperParams& p, const State3& s) {
    if (!(p.k < 0.0)) throw std::invalid_argument("Koper requires k < 0");
    double c = (2.0 + p.lambda) / (-p.k);
    return {s.x + 1.0, s.y + c, 1.0 - s.z - 2.0 * c};
}

State3 normal_form_state_to_koper(const KoperParams& p, const State3& s) {
    if (!(p.k < 0.0)) throw std::invalid_argument("Koper requires k < 0");
    double c = (2.0 + p.lambda) / (-p.k);
    return {s.x - 1.0, s.y - c, 1.0 - s.z - 2.0 * c};
}

}  // namespace mmo
