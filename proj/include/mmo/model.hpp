#pragma once

#include <array>
#include <functional>

namespace mmo {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

struct State3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

// Slow forcing term phi(x,y,z). Affine coefficients by default; an arbitrary
// smooth map can be supplied through the `general` hook, which then overrides
// the affine part entirely.
struct PhiSpec {
    double c0 = 0.0;
    double cx = 0.0;
    double cy = 0.0;
    double cz = 0.0;
    std::function<double(double, double, double)> general;

    double operator()(double x, double y, double z) const {
        if (general) return general(x, y, z);
        return c0 + cx * x + cy * y + cz * z;
    }
    bool is_affine() const { return !static_cast<bool>(general); }

    static PhiSpec zero() { return PhiSpec{}; }
    static PhiSpec koper() { return PhiSpec{0.0, 0.0, -1.0, -1.0, nullptr}; }
};

// Three time-scale cubic normal form, written in the intermediate time scale:
//   eps * x' = -y + f2 x^2 + f3 x^3
//         y' = alpha x + beta y - z
//         z' = delta (mu + phi(x,y,z))
// with f2 > 0 and f3 < 0 so the critical manifold is a cubic with two folds.
struct NormalFormParams {
    double f2 = 1.0;
    double f3 = -1.0;
    double alpha = 1.0;
    double beta = -1.0;
    double mu = 0.0;
    double eps = 0.01;
    double delta = 0.01;
    PhiSpec phi = PhiSpec::zero();
};

// Koper's three-variable electrochemical model, slow time scale tau:
//   eps_hat * delta * dx/dtau = k y + 3 x - x^3 - lambda
//             delta * dy/dtau = x - 2 y + z
//                     dz/dtau = delta (y - z)
// Requires k < 0 for the folded-cubic geometry used throughout.
struct KoperParams {
    double k = -4.0;
    double lambda = 0.0;
    double eps_hat = 0.01;
    double delta = 0.01;
};

// Hodgkin-Huxley with the fast gate m slaved to m_inf(v), nondimensionalised
// so that v is O(1): physical membrane voltage is 100*v millivolt and the
// applied current enters as I / (120*100).  tau_h stretches the inactivation
// gate into the slowest variable (delta = 1/tau_h).
struct HHParams {
    double I = 9.6;
    double tau_h = 1.0;
    double tau_n = 1.0;
    double eps = 0.0083;
    double g_k = 0.3;
    double g_l = 0.0025;
    double E_na = 0.5;
    double E_k = -0.77;
    double E_l = -0.544;
    double k_scale = 120.0 * 100.0;

    double delta() const { return 1.0 / tau_h; }
};

// Voltage-dependent gate rates, evaluated at membrane voltage in millivolt.
// alpha_m and alpha_n have removable singularities (at -40 and -55 mV); a
// series branch takes over within 1e-4 mV of those points.
struct GateRates {
    double am, bm, ah, bh, an, bn;        // rates
    double dam, dbm, dah, dbh, dan, dbn;  // d(rate)/dV
};
GateRates hh_rates(double v_mV);

double hh_m_inf(double v_mV);
double hh_n_inf(double v_mV);
double hh_h_inf(double v_mV);
double hh_t_m(double v_mV);
double hh_t_n(double v_mV);
double hh_t_h(double v_mV);

// Right-hand sides in the intermediate time scale (so the x equation carries
// the 1/eps and the z equation the delta factor).  All throw
// std::invalid_argument on non-finite input states.
Vec3 normal_form_rhs(const NormalFormParams& p, const State3& s);
Vec3 koper_rhs(const KoperParams& p, const State3& s);
Vec3 hh_rhs(const HHParams& p, const State3& s);

// Analytic Jacobians of the right-hand sides above (same time scale).  A
// non-affine phi hook falls back to central differences for its gradient.
Mat3 normal_form_jacobian(const NormalFormParams& p, const State3& s);
Mat3 koper_jacobian(const KoperParams& p, const State3& s);
Mat3 hh_jacobian(const HHParams& p, const State3& s);

// Parameter map taking Koper's model into the normal form:
//   eps = eps_hat/|k|, f2 = 3/|k|, f3 = -1/|k|, alpha = 1, beta = -2,
//   mu = (k + lambda + 2)/k, phi = -y - z.
// Throws std::invalid_argument unless k < 0.
NormalFormParams koper_to_normal_form(const KoperParams& p);

// Affine state change realising the map above: X = x + 1,
// Y = y + (2+lambda)/|k|, Z = 1 - z - 2(2+lambda)/|k|, and its inverse.
State3 koper_state_to_normal_form(const KoperParams& p, const State3& s);
State3 normal_form_state_to_koper(const KoperParams& p, const State3& s);

}  // namespace mmo
