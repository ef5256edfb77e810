#pragma once

#include "mmo/geometry.hpp"
#include "mmo/model.hpp"

namespace mmo {

// Distinguished abscissas bounding the return-map drift segments on the
// attracting sheets: the upper fold, the landing point of the jump from the
// upper fold, and the landing point of the jump from the lower fold.
// For f2 > 0 > f3 they satisfy x_star_max < 0 < x_max < x_0.
struct DriftEndpoints {
    double x_max = 0.0;      // upper fold abscissa, -2 f2 / (3 f3)
    double x_star_max = 0.0; // jump target of the upper fold, f2 / (3 f3)
    double x_0 = 0.0;        // jump target of the lower fold, -f2 / f3
};

DriftEndpoints drift_endpoints(const NormalFormParams& p);

// One evaluated drift integral together with the inputs that produced it and
// the accumulated quadrature error estimate.
struct DriftValue {
    double value = 0.0;
    double x0 = 0.0;
    double x1 = 0.0;
    double z0 = 0.0;
    double mu = 0.0;
    double error = 0.0;
};

// Integral of F'(s) * (mu + phi(s, F(s), z0)) / (alpha s + beta F(s) - z0)
// from x0 to x1, taken along the critical surface with the slow variable
// frozen at z0.  For z0 == 0 the common factor s is divided out of numerator
// and denominator, so the integrand stays regular through s == 0.  The
// denominator is scanned on a fine grid first; a sign change or a near-zero
// sample raises "drift integrand pole".  Adaptive Gauss-Kronrod quadrature
// targets a relative error of 1e-10.
DriftValue g_drift(const NormalFormParams& p, double x0, double x1, double z0);

// Leading-order graph of the strong stable manifold of the lower attracting
// sheet over the fast variable: delta times the drift integral from 0 to x at
// z0 = 0.  Vanishes at x = 0 and scales exactly linearly in delta.
double strong_manifold_graph(const NormalFormParams& p, double x);

// Return-map balance parameter: the value of mu at which the net drift over
// one singular return (upper segment from x_0 to x_max plus lower segment
// from x_star_max to 0, both at z0 = 0) vanishes.  Below it the drift pushes
// returns back toward the small-oscillation region; above it the system
// escapes to relaxation.  Defined only when the folded singularities are
// remote.  Computed twice, once by the closed linear-in-mu ratio and once by
// bracketed root finding on the net drift; the two routes must agree.
double mu_r_minus(const NormalFormParams& p);

// The balance parameter mapped to the cubic-rate model's lambda axis for the
// lower fold (Side::Minus) or, by the model's odd symmetry, the upper fold
// (Side::Plus).  Requires k < -4 so that the configuration is remote.
double lambda_r(const KoperParams& kp, Side side);

// Predicted number of large loops in one burst.  `relaxation` is set when the
// entry level does not drop below the exit level or when the per-return drift
// fails to be negative; otherwise `count` holds the prediction.
struct LaoPrediction {
    long count = 0;
    bool relaxation = false;
};

// Counts large returns needed to climb from the entry level z_in down past
// the exit level z_out > 0: one loop when z_in < 0, otherwise one plus the
// number of per-return drift increments of size |delta * net drift| that fit
// below z_out.  Requires a remote configuration.
LaoPrediction lao_count(const NormalFormParams& p, double z_in, double z_out);

} // namespace mmo
