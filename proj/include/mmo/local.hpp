#pragma once

#include <complex>

#include "mmo/geometry.hpp"
#include "mmo/model.hpp"

namespace mmo {

// Eigenvalues of the layer-flow linearisation along M2 at abscissa x,
//   J = [ F'(x)       -1       ]
//       [ eps*alpha   eps*beta ],
// so trace = F'(x) + eps*beta and det = eps*G'(x).  nu1 carries the "+" root
// of (tr +- sqrt(tr^2 - 4 det))/2 and is tracked continuously: it is the weak
// eigenvalue below the focal band, has real part tr/2 inside it, and is the
// strong eigenvalue above it.
struct EigenPair {
    std::complex<double> nu1;
    std::complex<double> nu2;
};

EigenPair jacobian_eigenvalues(const NormalFormParams& p, double x);

enum class LandmarkMode { Asymptotic, Numeric };

// Landmarks of the delayed-Hopf and canard structure near one fold line.
// All marked points lie on M2 exactly (y = F(x), z = G(x) at the mode's
// x-coordinate); the canard level z_cn sits at an eps-linear offset from
// p_dh.z.  The z-bands split incoming levels by attraction type: node-like
// beyond p_dn_minus, focus-like between p_dn_minus and p_dh, sector-type
// between p_dh.z and z_cn.  On the minus side the nodal band opens downward
// (lo = -inf); on the plus side it opens upward (hi = +inf).
struct LocalLandmarks {
    Side side = Side::Minus;
    LandmarkMode mode = LandmarkMode::Asymptotic;
    State3 p_dh;        // trace-zero point of the layer linearisation
    State3 p_dn_minus;  // degenerate node bounding the nodal band
    State3 p_dn_plus;   // degenerate node on the far side of the focal band
    double z_cn = 0.0;  // canard connection level
    ZRange nodal;
    ZRange spiral;
    ZRange canard;
};

// Asymptotic mode evaluates the leading-order expansions in eps; numeric mode
// locates the trace and discriminant roots of the layer Jacobian by bisection
// near the fold.  Requires eps > 0 and alpha > 0 (std::invalid_argument); a
// numeric bracket that cannot be established throws std::runtime_error with
// a diagnostic.  The plus side is obtained from the reflection through the
// folded singularity q+, which preserves (f2, f3, alpha, beta, eps, delta).
LocalLandmarks landmarks(const NormalFormParams& p, Side side, LandmarkMode mode);

enum class Criticality { Supercritical, Subcritical, Degenerate };

// Sign of f2 - (3/5)(1 - alpha*f3): below threshold the Hopf bifurcation at
// p_dh is supercritical (equivalently z_cn > z_dh), above it subcritical.
Criticality hopf_criticality(const NormalFormParams& p);

enum class ShOrder { Singular, EpsCorrected };

// Parameter value of mu at which the equilibrium sits on the singular-Hopf
// point of the given side: -phi at the folded singularity q-/q+ (Singular),
// or -phi at the eps-dependent Hopf point p_dh (EpsCorrected).
double mu_sh(const NormalFormParams& p, Side side, ShOrder order);

// The same threshold expressed in Koper's lambda, at first order in eps_hat:
// lambda_sh_minus = -(2+k) + (|k|/3) eps_hat, and lambda_sh_plus its negative.
double lambda_sh(const KoperParams& kp, Side side);

enum class EntryBranch { Nodal, Spiral };

struct EntryExitResult {
    double x_in = 0.0;
    double x_out = 0.0;
    EntryBranch branch = EntryBranch::Spiral;  // eigenvalue regime at entry
    double residual = 0.0;  // balance integral evaluated at x_out
};

// Delayed-Hopf entry-exit map: x_out balances the accumulated contraction
// against the expansion, weighting the continuous nu1 branch by the slow
// drift,  integral of Re nu1(x) / (mu + phi(x, F(x), G(x))) dx = 0  from x_in
// to x_out.  Requires Re nu1(x_in) < 0 (std::invalid_argument otherwise) and
// a positive slow drift along the whole path; throws std::runtime_error
// "slow flow vanishes on path" when mu + phi <= 0 is met, and "no balanced
// exit" when the accumulated integral never returns to zero before the far
// fold.  x_in equal to the trace-zero abscissa maps to itself.
EntryExitResult entry_exit(const NormalFormParams& p, double x_in, Side side);

// Sector-type exit estimate: trajectories trapped between z_dh and z_cn leave
// near the canard level, so this returns z_cn of the given side (asymptotic
// mode).
double sector_exit(const NormalFormParams& p, Side side);

}  // namespace mmo
