#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>

#include "mmo/geometry.hpp"
#include "mmo/local.hpp"
#include "mmo/model.hpp"

using namespace mmo;

namespace {

NormalFormParams koper_image(double k, double lambda = 0.0, double eps_hat = 0.01) {
    return koper_to_normal_form(KoperParams{k, lambda, eps_hat, 0.01});
}

// Near-fold root of 3 f3 x^2 + 2 f2 x - w = 0, the independent closed form
// for the abscissa where F'(x) = w.
double near_fold_root(const NormalFormParams& p, double w) {
    return (-p.f2 + std::sqrt(p.f2 * p.f2 + 3.0 * p.f3 * w)) / (3.0 * p.f3);
}

double trace_of(const NormalFormParams& p, double x) {
    const EigenPair e = jacobian_eigenvalues(p, x);
    return (e.nu1 + e.nu2).real();
}

}  // namespace

TEST_CASE("jacobian eigenvalues: frozen values and algebraic invariants") {
    NormalFormParams p;
    p.f2 = 0.75;
    p.f3 = -0.25;
    p.eps = 0.0;

    // eps = 0 collapses the pair to {0, F'(x)}.
    const EigenPair e0 = jacobian_eigenvalues(p, -1.0);
    CHECK(e0.nu1.real() == 0.0);
    CHECK(e0.nu1.imag() == 0.0);
    CHECK(e0.nu2.real() == -2.25);
    CHECK(e0.nu2.imag() == 0.0);

    const NormalFormParams kp = koper_image(-4.0);
    REQUIRE(kp.eps == doctest::Approx(0.0025).epsilon(1e-15));
    const EigenPair e1 = jacobian_eigenvalues(kp, -0.1);
    CHECK(e1.nu1.real() == doctest::Approx(-0.023682105301652732).epsilon(1e-13));
    CHECK(e1.nu2.real() == doctest::Approx(-0.13881789469834729).epsilon(1e-13));
    CHECK(e1.nu1.imag() == 0.0);
    CHECK(e1.nu2.imag() == 0.0);

    std::mt19937 rng(20240811u);
    std::uniform_real_distribution<double> uf2(0.3, 2.0), uf3(-2.0, -0.2), ua(0.2, 2.0),
        ub(-2.0, 2.0), ue(1e-5, 0.01), ux(-1.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        NormalFormParams q;
        q.f2 = uf2(rng);
        q.f3 = uf3(rng);
        q.alpha = ua(rng);
        q.beta = ub(rng);
        q.eps = ue(rng);
        const double x = ux(rng);
        const EigenPair e = jacobian_eigenvalues(q, x);
        const double tr = cubic_f(q).d(x) + q.eps * q.beta;
        const double det = q.eps * cubic_g(q).d(x);
        const double scale = std::max({1.0, std::abs(tr), std::abs(det)});
        CHECK(std::abs((e.nu1 + e.nu2).real() - tr) <= 1e-12 * scale);
        CHECK(std::abs((e.nu1 + e.nu2).imag()) <= 1e-12 * scale);
        CHECK(std::abs(e.nu1 * e.nu2 - std::complex<double>(det, 0.0)) <= 1e-10 * scale);
    }
}

TEST_CASE("jacobian eigenvalues: branch ordering and continuity across the focal band") {
    const NormalFormParams p = koper_image(-4.0);

    // Below the lower degenerate node: real pair, nu1 weak.
    const EigenPair lo = jacobian_eigenvalues(p, -0.15);
    CHECK(lo.nu1.imag() == 0.0);
    CHECK(lo.nu1.real() < 0.0);
    CHECK(std::abs(lo.nu1.real()) < std::abs(lo.nu2.real()));
    // Inside the band: conjugate pair, positive imaginary part on nu1.
    const EigenPair mid = jacobian_eigenvalues(p, 0.0);
    CHECK(mid.nu1.imag() > 0.0);
    CHECK(mid.nu2 == std::conj(mid.nu1));
    // Above the upper degenerate node: real pair, nu1 strong.
    const EigenPair hi = jacobian_eigenvalues(p, 0.15);
    CHECK(hi.nu1.imag() == 0.0);
    CHECK(hi.nu1.real() > hi.nu2.real());
    CHECK(hi.nu2.real() > 0.0);

    double prev1 = jacobian_eigenvalues(p, -0.2).nu1.real();
    double prev1i = jacobian_eigenvalues(p, -0.2).nu1.imag();
    double prev2 = jacobian_eigenvalues(p, -0.2).nu2.real();
    double max_step = 0.0;
    const int n = 20000;
    for (int i = 1; i <= n; ++i) {
        const double x = -0.2 + 0.4 * i / n;
        const EigenPair e = jacobian_eigenvalues(p, x);
        max_step = std::max({max_step, std::abs(e.nu1.real() - prev1),
                             std::abs(e.nu1.imag() - prev1i), std::abs(e.nu2.real() - prev2)});
        prev1 = e.nu1.real();
        prev1i = e.nu1.imag();
        prev2 = e.nu2.real();
    }
    CHECK(max_step <= 6e-3);  // sqrt-type kink at the discriminant roots
}

TEST_CASE("landmarks: asymptotic mode at the Koper image of k = -4") {
    const NormalFormParams p = koper_image(-4.0);
    const LocalLandmarks lm = landmarks(p, Side::Minus, LandmarkMode::Asymptotic);
    const CubicF F = cubic_f(p);
    const CubicG G = cubic_g(p);

    CHECK(lm.p_dh.x == doctest::Approx(1.0 / 300).epsilon(1e-12));
    CHECK(lm.p_dn_minus.x == doctest::Approx(-19.0 / 300).epsilon(1e-12));
    CHECK(lm.p_dn_plus.x == doctest::Approx(19.0 / 300).epsilon(1e-12));
    // z via G exactly, and the leading-order value -alpha*beta/(2 f2) eps to
    // its O(eps^2) remainder.
    CHECK(lm.p_dh.y == F(lm.p_dh.x));
    CHECK(lm.p_dh.z == G(lm.p_dh.x));
    CHECK(lm.p_dh.z == doctest::Approx(1.0 / 300).epsilon(0.01));
    CHECK(std::abs(lm.p_dh.z - 1.0 / 300) <= 5.0 * p.eps * p.eps);
    CHECK(lm.p_dn_minus.z == G(lm.p_dn_minus.x));
    CHECK(lm.p_dn_plus.z == G(lm.p_dn_plus.x));

    // k = -4 is the degenerate-criticality case: the canard level coincides
    // with the Hopf level and the sector band is empty.
    CHECK(lm.z_cn == lm.p_dh.z);
    CHECK(lm.canard.lo == lm.canard.hi);

    CHECK(std::isinf(lm.nodal.lo));
    CHECK(lm.nodal.lo < 0.0);
    CHECK(lm.nodal.hi == lm.p_dn_minus.z);
    CHECK(lm.spiral.lo == lm.p_dn_minus.z);
    CHECK(lm.spiral.hi == lm.p_dh.z);
    CHECK(lm.spiral.lo < lm.spiral.hi);

    // Landmarks collapse to the folded singularity as eps -> 0.
    NormalFormParams tiny = p;
    tiny.eps = 1e-12;
    const LocalLandmarks lt = landmarks(tiny, Side::Minus, LandmarkMode::Asymptotic);
    CHECK(std::abs(lt.p_dh.x) <= 1e-5);
    CHECK(std::abs(lt.p_dn_minus.x) <= 1e-5);
    CHECK(std::abs(lt.p_dn_plus.z) <= 1e-5);
    CHECK(std::abs(lt.z_cn) <= 1e-5);
}

TEST_CASE("landmarks: numeric mode hits the closed-form trace and discriminant roots") {
    for (double k : {-4.0, -4.5, -3.3}) {
        const NormalFormParams p = koper_image(k);
        const LocalLandmarks lm = landmarks(p, Side::Minus, LandmarkMode::Numeric);

        CHECK(std::abs(trace_of(p, lm.p_dh.x)) <= 1e-12);
        const double se = std::sqrt(p.alpha * p.eps);
        const double x_dh = near_fold_root(p, -p.eps * p.beta);
        const double x_dnm = near_fold_root(p, p.eps * p.beta - 2.0 * se);
        const double x_dnp = near_fold_root(p, p.eps * p.beta + 2.0 * se);
        CHECK(lm.p_dh.x == doctest::Approx(x_dh).epsilon(1e-12));
        CHECK(lm.p_dn_minus.x == doctest::Approx(x_dnm).epsilon(1e-11));
        CHECK(lm.p_dn_plus.x == doctest::Approx(x_dnp).epsilon(1e-11));

        // Discriminant of the eigenvalue pair vanishes at the degenerate
        // nodes: the pair is real there and the two roots agree.
        for (double x : {lm.p_dn_minus.x, lm.p_dn_plus.x}) {
            const EigenPair e = jacobian_eigenvalues(p, x);
            CHECK(std::abs(e.nu1 - e.nu2) <= 1e-6);
        }
    }

    // Frozen k = -4 values and the size of the printed-expansion gap: the
    // eps-order terms of the degenerate-node expansions differ from the true
    // roots by a known O(eps) amount.
    const NormalFormParams p = koper_image(-4.0);
    const LocalLandmarks nm = landmarks(p, Side::Minus, LandmarkMode::Numeric);
    const LocalLandmarks as = landmarks(p, Side::Minus, LandmarkMode::Asymptotic);
    CHECK(nm.p_dh.x == doctest::Approx(0.0033389074849298575).epsilon(1e-12));
    const double gap_m = std::abs(nm.p_dn_minus.x - as.p_dn_minus.x);
    const double gap_p = std::abs(nm.p_dn_plus.x - as.p_dn_plus.x);
    CHECK(gap_m >= 1.4 * p.eps);
    CHECK(gap_m <= 2.1 * p.eps);
    CHECK(gap_p >= 0.6 * p.eps);
    CHECK(gap_p <= 1.1 * p.eps);

    // Numeric-vs-asymptotic Hopf abscissa gap shrinks at second order:
    // halving eps divides it by about four.
    auto dh_gap = [&](double eps) {
        NormalFormParams q = p;
        q.eps = eps;
        return std::abs(landmarks(q, Side::Minus, LandmarkMode::Numeric).p_dh.x -
                        landmarks(q, Side::Minus, LandmarkMode::Asymptotic).p_dh.x);
    };
    auto zdh_gap = [&](double eps) {
        NormalFormParams q = p;
        q.eps = eps;
        return std::abs(landmarks(q, Side::Minus, LandmarkMode::Numeric).p_dh.z -
                        landmarks(q, Side::Minus, LandmarkMode::Asymptotic).p_dh.z);
    };
    const double rx = dh_gap(0.0025) / dh_gap(0.00125);
    const double rz = zdh_gap(0.0025) / zdh_gap(0.00125);
    CHECK(rx >= 3.5);
    CHECK(rx <= 4.5);
    CHECK(rz >= 3.5);
    CHECK(rz <= 4.5);
}

TEST_CASE("landmarks: band widths scale as sqrt(eps) and eps") {
    NormalFormParams p = koper_image(-4.5);
    p.eps = 4e-4;
    NormalFormParams ph = p;
    ph.eps = 2e-4;
    for (LandmarkMode mode : {LandmarkMode::Asymptotic, LandmarkMode::Numeric}) {
        const LocalLandmarks a = landmarks(p, Side::Minus, mode);
        const LocalLandmarks b = landmarks(ph, Side::Minus, mode);
        const double spiral_ratio =
            (b.spiral.hi - b.spiral.lo) / (a.spiral.hi - a.spiral.lo);
        const double canard_ratio =
            (b.canard.hi - b.canard.lo) / (a.canard.hi - a.canard.lo);
        CHECK(std::abs(spiral_ratio - 1.0 / std::sqrt(2.0)) <= 0.02);
        CHECK(canard_ratio == doctest::Approx(0.5).epsilon(1e-12));
    }
}

TEST_CASE("landmarks: plus side is the point reflection through q+") {
    // Odd-symmetric case: lambda = 0, k = -4 puts q+ at (2, 1, 0).
    const NormalFormParams p = koper_image(-4.0);
    for (LandmarkMode mode : {LandmarkMode::Asymptotic, LandmarkMode::Numeric}) {
        const LocalLandmarks m = landmarks(p, Side::Minus, mode);
        const LocalLandmarks q = landmarks(p, Side::Plus, mode);
        CHECK(q.side == Side::Plus);
        CHECK(q.p_dh.x == doctest::Approx(2.0 - m.p_dh.x).epsilon(1e-14));
        CHECK(q.p_dh.z == doctest::Approx(-m.p_dh.z).epsilon(1e-12));
        CHECK(q.p_dn_minus.x == doctest::Approx(2.0 - m.p_dn_minus.x).epsilon(1e-14));
        CHECK(q.z_cn == doctest::Approx(-m.z_cn).epsilon(1e-12));
        // Nodal band opens upward on the plus side.
        CHECK(std::isinf(q.nodal.hi));
        CHECK(q.nodal.hi > 0.0);
        CHECK(q.nodal.lo == doctest::Approx(-m.nodal.hi).epsilon(1e-12));
        CHECK(q.spiral.lo == doctest::Approx(-m.spiral.hi).epsilon(1e-12));
        CHECK(q.spiral.hi == doctest::Approx(-m.spiral.lo).epsilon(1e-12));
    }

    // Asymmetric case: the reflected landmarks still live on M2 of the
    // original system and the trace still vanishes at the Hopf abscissa.
    const NormalFormParams r = koper_image(-4.5, 1.2);
    const CubicF F = cubic_f(r);
    const CubicG G = cubic_g(r);
    const LocalLandmarks q = landmarks(r, Side::Plus, LandmarkMode::Numeric);
    CHECK(q.p_dh.y == doctest::Approx(F(q.p_dh.x)).epsilon(1e-12));
    CHECK(q.p_dh.z == doctest::Approx(G(q.p_dh.x)).epsilon(1e-12));
    CHECK(q.p_dn_minus.z == doctest::Approx(G(q.p_dn_minus.x)).epsilon(1e-12));
    CHECK(std::abs(trace_of(r, q.p_dh.x)) <= 1e-10);
    // The Hopf abscissa sits just past the fold on the repelling sheet, the
    // mirror image of x_dh > 0 on the minus side; the bounding degenerate
    // node lies on the attracting sheet beyond the fold.
    CHECK(q.p_dh.x < 2.0);
    CHECK(q.p_dn_minus.x > 2.0);
    CHECK(q.p_dn_minus.z > q.p_dh.z);  // nodal band lies above
    CHECK(q.spiral.lo == q.p_dh.z);
    CHECK(q.spiral.hi == q.p_dn_minus.z);
}

TEST_CASE("landmarks: preconditions and bracket diagnostics") {
    NormalFormParams p = koper_image(-4.0);
    p.eps = 0.0;
    CHECK_THROWS_WITH_AS(landmarks(p, Side::Minus, LandmarkMode::Asymptotic),
                         "landmarks require eps > 0", std::invalid_argument);
    p = koper_image(-4.0);
    p.alpha = -1.0;
    CHECK_THROWS_WITH_AS(landmarks(p, Side::Minus, LandmarkMode::Numeric),
                         "landmarks require alpha > 0", std::invalid_argument);
    p = koper_image(-4.0);
    p.f3 = 0.0;
    CHECK_THROWS_WITH_AS(landmarks(p, Side::Minus, LandmarkMode::Asymptotic),
                         "landmarks require f2 > 0 and f3 < 0", std::invalid_argument);
    // eps far outside the local regime: the trace has no root at all.
    p = koper_image(-4.0);
    p.eps = 10.0;
    CHECK_THROWS_WITH_AS(landmarks(p, Side::Minus, LandmarkMode::Numeric),
                         "failed to bracket the trace root near the fold "
                         "(eps outside the local regime?)",
                         std::runtime_error);
}

TEST_CASE("hopf criticality trichotomy") {
    CHECK(hopf_criticality(koper_image(-4.5)) == Criticality::Supercritical);
    CHECK(hopf_criticality(koper_image(-4.0)) == Criticality::Degenerate);
    CHECK(hopf_criticality(koper_image(-3.6)) == Criticality::Subcritical);

    NormalFormParams p;  // f2 = 1 > 0.6*(1 - (-1)) = no, threshold 1.2 -> super
    p.f2 = 1.0;
    p.f3 = -1.0;
    CHECK(hopf_criticality(p) == Criticality::Supercritical);
    p.f2 = 1.3;
    CHECK(hopf_criticality(p) == Criticality::Subcritical);
}

TEST_CASE("mu_sh: singular and eps-corrected orders") {
    // phi = -y - z vanishes at the origin, so the minus side sits at 0.
    CHECK(mu_sh(koper_image(-4.0), Side::Minus, ShOrder::Singular) == 0.0);
    CHECK(mu_sh(koper_image(-7.7), Side::Minus, ShOrder::Singular) == 0.0);
    // Plus side: -phi(q+) = y + z = 2 - 4/|k|.
    CHECK(mu_sh(koper_image(-4.0), Side::Plus, ShOrder::Singular) ==
          doctest::Approx(1.0).epsilon(1e-14));
    CHECK(mu_sh(koper_image(-5.0), Side::Plus, ShOrder::Singular) ==
          doctest::Approx(1.2).epsilon(1e-14));

    const NormalFormParams p = koper_image(-4.0);
    const double corr_m = mu_sh(p, Side::Minus, ShOrder::EpsCorrected);
    const double corr_p = mu_sh(p, Side::Plus, ShOrder::EpsCorrected);
    CHECK(corr_m == doctest::Approx(0.0033250092592592593).epsilon(1e-12));
    CHECK(corr_p == doctest::Approx(0.99667499074074073).epsilon(1e-12));
    CHECK(std::abs(corr_m - 0.0) <= 2.0 * p.eps);
    CHECK(std::abs(corr_p - 1.0) <= 2.0 * p.eps);

    // At eps = 0 the corrected order collapses onto the singular one.
    NormalFormParams z = p;
    z.eps = 0.0;
    CHECK(mu_sh(z, Side::Minus, ShOrder::EpsCorrected) ==
          mu_sh(z, Side::Minus, ShOrder::Singular));
    CHECK(mu_sh(z, Side::Plus, ShOrder::EpsCorrected) ==
          doctest::Approx(mu_sh(z, Side::Plus, ShOrder::Singular)).epsilon(1e-14));
}

TEST_CASE("lambda_sh: frozen values, oddness, and domain") {
    CHECK(lambda_sh(KoperParams{-4.4, 0.0, 0.01, 0.01}, Side::Minus) ==
          doctest::Approx(2.414666666666667).epsilon(1e-14));
    CHECK(lambda_sh(KoperParams{-2.0, 0.0, 0.0, 0.01}, Side::Minus) == 0.0);
    for (double k : {-2.5, -4.0, -4.4, -6.0}) {
        const KoperParams kp{k, 0.0, 0.01, 0.01};
        CHECK(lambda_sh(kp, Side::Plus) == -lambda_sh(kp, Side::Minus));
    }
    CHECK_THROWS_WITH_AS(lambda_sh(KoperParams{1.0, 0.0, 0.01, 0.01}, Side::Minus),
                         "Koper requires k < 0", std::invalid_argument);
}

TEST_CASE("entry-exit: constant slow drift reproduces the symmetric exit law") {
    NormalFormParams p;
    p.f2 = 0.75;
    p.f3 = -0.25;
    p.alpha = 1.0;
    p.beta = -2.0;
    p.mu = 0.05;
    p.eps = 1e-7;
    const double x_dh_asym = -p.beta / (2.0 * p.f2) * p.eps;

    const double frozen[3][2] = {{-5e-5, 5.02675044822609e-05},
                                 {-1.5e-4, 0.000150274180400729},
                                 {-2.5e-4, 0.000250287523987889}};
    double prev = 0.0;
    for (const auto& c : frozen) {
        const EntryExitResult r = entry_exit(p, c[0], Side::Minus);
        CHECK(r.x_in == c[0]);
        CHECK(r.branch == EntryBranch::Spiral);
        CHECK(std::abs(r.x_out - c[1]) <= 1e-9);
        CHECK(std::abs(r.x_out - (x_dh_asym - c[0])) <= 1e-6);
        CHECK(std::abs(r.residual) <= 1e-8);
        CHECK(r.x_out > prev);  // deeper entry, later exit
        prev = r.x_out;
    }

    // A constant drift denominator scales out of the balance entirely.
    NormalFormParams p2 = p;
    p2.mu = 7.0;
    CHECK(std::abs(entry_exit(p2, -1.5e-4, Side::Minus).x_out -
                   entry_exit(p, -1.5e-4, Side::Minus).x_out) <= 1e-9);
}

TEST_CASE("entry-exit: Hopf abscissa is a fixed point") {
    const NormalFormParams p = koper_image(-4.0);
    const double x_dh = landmarks(p, Side::Minus, LandmarkMode::Numeric).p_dh.x;
    const EntryExitResult r = entry_exit(p, x_dh, Side::Minus);
    CHECK(r.x_out == x_dh);
    CHECK(r.residual == 0.0);
}

TEST_CASE("entry-exit: nodal entries leave near the upper degenerate node") {
    NormalFormParams p;
    p.f2 = 0.75;
    p.f3 = -0.25;
    p.alpha = 1.0;
    p.beta = -2.0;
    p.mu = 1.0;
    p.eps = 0.0025;
    const EntryExitResult r = entry_exit(p, -0.3, Side::Minus);
    CHECK(r.branch == EntryBranch::Nodal);
    CHECK(std::abs(r.x_out - 0.108910070692533) <= 1e-6);
    const double x_dnp = landmarks(p, Side::Minus, LandmarkMode::Numeric).p_dn_plus.x;
    CHECK(r.x_out < 2.0 * x_dnp);
    CHECK(r.x_out < x_dnp + 0.05);

    NormalFormParams q = p;
    q.eps = 1e-6;
    const EntryExitResult r2 = entry_exit(q, -0.3, Side::Minus);
    CHECK(std::abs(r2.x_out - 0.00287734405816211) <= 1e-6);
    const double x_dnp2 = landmarks(q, Side::Minus, LandmarkMode::Numeric).p_dn_plus.x;
    CHECK(r2.x_out < x_dnp2 + 0.01);  // the overshoot shrinks with eps
}

TEST_CASE("entry-exit: error contracts") {
    NormalFormParams p;
    p.f2 = 0.75;
    p.f3 = -0.25;
    p.alpha = 1.0;
    p.beta = -2.0;
    p.eps = 0.0025;

    // Entry on the repelling side of the Hopf abscissa.
    p.mu = 1.0;
    CHECK_THROWS_WITH_AS(entry_exit(p, 0.05, Side::Minus),
                         "entry point not in the attracting range", std::invalid_argument);

    // Negative drift at the entry point.
    p.mu = -0.05;
    CHECK_THROWS_WITH_AS(entry_exit(p, -0.3, Side::Minus), "slow flow vanishes on path",
                         std::runtime_error);

    // Drift positive at entry but crossing zero mid-path (at G(x) = -mu).
    p.mu = -0.05;
    p.phi = PhiSpec{0.0, 0.0, 0.0, -1.0, nullptr};
    CHECK_THROWS_WITH_AS(entry_exit(p, -0.3, Side::Minus), "slow flow vanishes on path",
                         std::runtime_error);

    // A drift that grows exponentially past the fold suppresses the available
    // expansion below the accumulated contraction.
    NormalFormParams q;
    q.f2 = 0.75;
    q.f3 = -0.25;
    q.alpha = 1.0;
    q.beta = -2.0;
    q.eps = 1e-6;
    q.mu = 1.0;
    q.phi.general = [](double x, double, double) { return std::exp(x / 0.001); };
    CHECK_THROWS_WITH_AS(entry_exit(q, -0.3, Side::Minus), "no balanced exit",
                         std::runtime_error);
}

TEST_CASE("entry-exit: plus side mirrors the minus side") {
    // k = -4, lambda = 0 is odd-symmetric, so the reflected system equals the
    // original and exits must mirror exactly through q+ = (2, 1, 0).
    const NormalFormParams p = koper_image(-4.0);
    const double a = 0.1;
    const EntryExitResult plus = entry_exit(p, 2.0 + a, Side::Plus);
    const EntryExitResult minus = entry_exit(p, 2.0 - (2.0 + a), Side::Minus);
    CHECK(plus.x_in == 2.0 + a);
    CHECK(std::abs((2.0 - plus.x_out) - minus.x_out) <= 1e-13);
    CHECK(plus.branch == minus.branch);
    CHECK(plus.x_out < 2.0);  // exits toward the repelling sheet, x < x_q+
}

TEST_CASE("sector exit returns the canard level") {
    const NormalFormParams p4 = koper_image(-4.0);
    CHECK(sector_exit(p4, Side::Minus) ==
          landmarks(p4, Side::Minus, LandmarkMode::Asymptotic).p_dh.z);

    const NormalFormParams p45 = koper_image(-4.5);
    CHECK(sector_exit(p45, Side::Minus) ==
          landmarks(p45, Side::Minus, LandmarkMode::Asymptotic).z_cn);
    CHECK(sector_exit(p45, Side::Plus) ==
          landmarks(p45, Side::Plus, LandmarkMode::Asymptotic).z_cn);

    NormalFormParams tiny = p45;
    tiny.eps = 1e-12;
    CHECK(std::abs(sector_exit(tiny, Side::Minus)) <= 1e-5);
}
