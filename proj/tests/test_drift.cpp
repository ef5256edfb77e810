#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <utility>

#include "mmo/drift.hpp"
#include "mmo/geometry.hpp"
#include "mmo/local.hpp"
#include "mmo/model.hpp"

using namespace mmo;

namespace {

NormalFormParams koper_nf(double k, double lambda = 0.0, double delta = 0.01) {
    return koper_to_normal_form({k, lambda, 0.01, delta});
}

// Independent fixed-step composite Simpson oracle over the raw integrand,
// written against the formulas rather than against g_drift's code paths.
double simpson_drift(const NormalFormParams& p, double x0, double x1,
                     double z0, int panels) {
    auto f = [&](double s) {
        const double F = p.f2 * s * s + p.f3 * s * s * s;
        const double Fd = 2.0 * p.f2 * s + 3.0 * p.f3 * s * s;
        const double G = p.alpha * s + p.beta * F;
        return Fd * (p.mu + p.phi(s, F, z0)) / (G - z0);
    };
    auto f0 = [&](double s) {
        const double F = p.f2 * s * s + p.f3 * s * s * s;
        const double q = p.alpha + p.beta * (p.f2 + p.f3 * s) * s;
        return (2.0 * p.f2 + 3.0 * p.f3 * s) * (p.mu + p.phi(s, F, 0.0)) / q;
    };
    const double h = (x1 - x0) / panels;
    double acc = 0.0;
    for (int i = 0; i < panels; ++i) {
        const double a = x0 + i * h;
        const double m = a + 0.5 * h;
        const double b = a + h;
        if (z0 == 0.0)
            acc += (f0(a) + 4.0 * f0(m) + f0(b)) * h / 6.0;
        else
            acc += (f(a) + 4.0 * f(m) + f(b)) * h / 6.0;
    }
    return acc;
}

} // namespace

TEST_CASE("drift endpoints: closed forms, ordering, degeneracy") {
    const auto e = drift_endpoints(koper_nf(-4.5));
    CHECK(e.x_max == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(e.x_star_max == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(e.x_0 == doctest::Approx(3.0).epsilon(1e-14));

    std::mt19937 rng(91);
    std::uniform_real_distribution<double> pos(0.2, 3.0);
    for (int i = 0; i < 20; ++i) {
        NormalFormParams p;
        p.f2 = pos(rng);
        p.f3 = -pos(rng);
        const auto r = drift_endpoints(p);
        CHECK(r.x_star_max < 0.0);
        CHECK(r.x_max > 0.0);
        CHECK(r.x_max < r.x_0);
        CHECK(r.x_max == doctest::Approx(2.0 / 3.0 * r.x_0).epsilon(1e-14));
    }

    NormalFormParams bad;
    bad.f3 = 0.0;
    CHECK_THROWS_WITH_AS(drift_endpoints(bad), "degenerate cubic",
                         std::invalid_argument);
}

TEST_CASE("g_drift: empty segment, orientation, recorded inputs") {
    const auto p = koper_nf(-4.5, 1.5);
    const auto zero = g_drift(p, 0.7, 0.7, 0.3);
    CHECK(zero.value == 0.0);
    CHECK(zero.error == 0.0);
    CHECK(zero.x0 == 0.7);
    CHECK(zero.x1 == 0.7);
    CHECK(zero.z0 == 0.3);
    CHECK(zero.mu == p.mu);

    const auto fwd = g_drift(p, -1.0, 0.0, 0.0);
    const auto rev = g_drift(p, 0.0, -1.0, 0.0);
    CHECK(fwd.value == -rev.value);
    CHECK(fwd.x0 == -1.0);
    CHECK(fwd.x1 == 0.0);
}

TEST_CASE("g_drift: frozen values and the independent Simpson route") {
    const auto p = koper_nf(-4.5, 1.5);
    REQUIRE(p.mu == doctest::Approx(2.0 / 9.0).epsilon(1e-15));

    const auto upper = g_drift(p, 3.0, 2.0, 0.0);
    CHECK(upper.value == doctest::Approx(-0.235532898056157).epsilon(1e-9));
    CHECK(upper.error <= 1e-10 * std::max(1.0, std::fabs(upper.value)));

    const auto lower = g_drift(p, -1.0, 0.0, 0.0);
    CHECK(lower.value == doctest::Approx(-0.0128440099024961).epsilon(1e-9));

    const auto off = g_drift(p, 2.5, 2.8, 0.1);
    CHECK(off.value == doctest::Approx(0.0988288819287145).epsilon(1e-9));
    CHECK(off.error <= 1e-10 * std::max(1.0, std::fabs(off.value)));

    CHECK(upper.value ==
          doctest::Approx(simpson_drift(p, 3.0, 2.0, 0.0, 1000000))
              .epsilon(1e-8));
    CHECK(off.value ==
          doctest::Approx(simpson_drift(p, 2.5, 2.8, 0.1, 1000000))
              .epsilon(1e-8));
}

TEST_CASE("g_drift: random pole-free segments match Simpson") {
    const auto p = koper_nf(-4.5, 1.5);
    std::mt19937 rng(137);
    std::uniform_real_distribution<double> xs(2.3, 2.9);
    std::uniform_real_distribution<double> zs(-0.3, 0.3);
    for (int i = 0; i < 5; ++i) {
        const double a = xs(rng);
        const double b = xs(rng);
        const double z0 = zs(rng);
        if (a == b) continue;
        const auto v = g_drift(p, a, b, z0);
        CHECK(v.value ==
              doctest::Approx(simpson_drift(p, a, b, z0, 1000000))
                  .epsilon(1e-8));
    }
}

TEST_CASE("g_drift: pole detection on both integrand forms") {
    const auto p = koper_nf(-4.5, 1.5);
    // the reduced denominator has an even-order zero at s = 1.5 for k = -4.5
    CHECK_THROWS_WITH_AS(g_drift(p, 0.0, 2.0, 0.0), "drift integrand pole",
                         std::runtime_error);
    // G - z0 changes sign inside (2.5, 2.8) when z0 = 1.5
    CHECK_THROWS_WITH_AS(g_drift(p, 2.5, 2.8, 1.5), "drift integrand pole",
                         std::runtime_error);
    CHECK_THROWS_WITH_AS(
        g_drift(p, std::numeric_limits<double>::quiet_NaN(), 1.0, 0.0),
        "non-finite drift segment", std::invalid_argument);
}

TEST_CASE("strong manifold graph: base point, frozen value, slow-rate scaling") {
    const auto p = koper_nf(-4.5, 1.5);
    CHECK(strong_manifold_graph(p, 0.0) == 0.0);
    CHECK(strong_manifold_graph(p, -0.5) ==
          doctest::Approx(-0.000919380253673135).epsilon(1e-8));

    auto half = p;
    half.delta = 0.005;
    CHECK(strong_manifold_graph(half, -0.5) ==
          0.5 * strong_manifold_graph(p, -0.5));

    CHECK_THROWS_WITH_AS(strong_manifold_graph(p, 2.0),
                         "drift integrand pole", std::runtime_error);
}

TEST_CASE("return kernel integrals: positive and ordered") {
    auto kernel = [](double k) {
        auto p = koper_nf(k);
        p.mu = 1.0;
        p.phi = PhiSpec::zero();
        const auto e = drift_endpoints(p);
        const double upper = g_drift(p, e.x_0, e.x_max, 0.0).value;
        const double lower = g_drift(p, e.x_star_max, 0.0, 0.0).value;
        return std::pair<double, double>{upper, lower};
    };

    const auto [d1, d2] = kernel(-4.5);
    CHECK(d1 == doctest::Approx(0.647918433002165).epsilon(1e-9));
    CHECK(d2 == doctest::Approx(0.966238435648986).epsilon(1e-9));
    CHECK(d1 > 0.0);
    CHECK(d1 < d2);

    for (double k : {-5.0, -8.0, -20.0}) {
        const auto [u, l] = kernel(k);
        CHECK(u > 0.0);
        CHECK(u < l);
    }
}

TEST_CASE("mu_r: frozen Koper values, balance residual, domain") {
    const auto p = koper_nf(-4.5);
    const double mur = mu_r_minus(p);
    CHECK(mur == doctest::Approx(0.376096305207853).epsilon(1e-8));
    CHECK(mu_r_minus(koper_nf(-5.0)) ==
          doctest::Approx(0.320134082642).epsilon(1e-8));

    // the net per-return drift vanishes at the balance value
    auto q = p;
    q.mu = mur;
    const auto e = drift_endpoints(q);
    const double residual = g_drift(q, e.x_0, e.x_max, 0.0).value +
                            g_drift(q, e.x_star_max, 0.0, 0.0).value;
    CHECK(std::fabs(residual) <= 1e-9);

    // independent of where mu sits in the supplied parameters
    CHECK(mu_r_minus(koper_nf(-4.5, 1.5)) == mur);

    // sits above the singular small-oscillation onset
    CHECK(mu_sh(p, Side::Minus, ShOrder::Singular) == 0.0);
    CHECK(mur > 0.0);

    // the phi part of the net drift at mu = 0 is negative for this model
    auto pn = p;
    pn.mu = 0.0;
    const double num = g_drift(pn, e.x_0, e.x_max, 0.0).value +
                       g_drift(pn, e.x_star_max, 0.0, 0.0).value;
    CHECK(num == doctest::Approx(-0.607078434325575).epsilon(1e-9));

    NormalFormParams zero_phi = p;
    zero_phi.phi = PhiSpec::zero();
    CHECK(mu_r_minus(zero_phi) == 0.0);

    CHECK_THROWS_WITH_AS(mu_r_minus(koper_nf(-3.6)),
                         "mu_r defined only for remote singularities",
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(mu_r_minus(koper_nf(-4.0)),
                         "mu_r defined only for remote singularities",
                         std::invalid_argument);
}

TEST_CASE("mu_r: generic feedback goes through root finding consistently") {
    auto p = koper_nf(-4.5);
    p.phi.general = [](double x, double y, double z) {
        return -y - z - 0.05 * std::sin(3.0 * x);
    };
    const double mur = mu_r_minus(p);
    CHECK(std::isfinite(mur));
    CHECK(mur == doctest::Approx(0.376096305207853).epsilon(0.25));

    auto q = p;
    q.mu = mur;
    const auto e = drift_endpoints(q);
    const double residual = g_drift(q, e.x_0, e.x_max, 0.0).value +
                            g_drift(q, e.x_star_max, 0.0, 0.0).value;
    CHECK(std::fabs(residual) <= 1e-9);
}

TEST_CASE("lambda_r: domain, frozen values, symmetry, threshold ordering") {
    CHECK_THROWS_WITH_AS(lambda_r({-4.0, 0.0, 0.01, 0.01}, Side::Minus),
                         "lambda_r requires k < -4", std::invalid_argument);
    CHECK_THROWS_WITH_AS(lambda_r({-3.9, 0.0, 0.01, 0.01}, Side::Minus),
                         "lambda_r requires k < -4", std::invalid_argument);

    const KoperParams k45{-4.5, 0.0, 0.01, 0.01};
    const double lrm = lambda_r(k45, Side::Minus);
    CHECK(lrm == doctest::Approx(0.807566626564661).epsilon(1e-8));
    CHECK(lambda_r(k45, Side::Plus) == -lrm);

    const KoperParams k5{-5.0, 0.0, 0.01, 0.01};
    CHECK(lambda_r(k5, Side::Minus) ==
          doctest::Approx(1.39932958679).epsilon(1e-8));
    const KoperParams k6{-6.0, 0.0, 0.01, 0.01};
    CHECK(lambda_r(k6, Side::Minus) ==
          doctest::Approx(2.48020125776).epsilon(1e-8));

    // at vanishing fast-rate correction the two canard thresholds bracket
    // the two balance thresholds
    for (double k : {-4.5, -5.0, -6.0, -20.0}) {
        const KoperParams kp{k, 0.0, 0.0, 0.01};
        const double sh_m = lambda_sh(kp, Side::Minus);
        const double sh_p = lambda_sh(kp, Side::Plus);
        const double r_m = lambda_r(kp, Side::Minus);
        const double r_p = lambda_r(kp, Side::Plus);
        CHECK(sh_p < r_p);
        CHECK(r_p < r_m);
        CHECK(r_m < sh_m);
    }

    // the balance threshold runs parallel to the canard threshold far out
    const double lr20 = lambda_r({-20.0, 0.0, 0.0, 0.01}, Side::Minus);
    const double lr40 = lambda_r({-40.0, 0.0, 0.0, 0.01}, Side::Minus);
    const double slope = (lr40 - lr20) / (-20.0);
    CHECK(std::fabs(slope - (-1.0)) <= 0.01);
}

TEST_CASE("lao_count: edge semantics, frozen counts, monotonicity") {
    const auto p = koper_nf(-4.5, 1.5, 0.001);
    REQUIRE(p.delta == 0.001);

    const auto below = lao_count(p, -0.005, 0.02);
    CHECK(below.count == 1);
    CHECK_FALSE(below.relaxation);

    const auto mid = lao_count(p, 0.01, 0.02);
    CHECK(mid.count == 81);
    CHECK_FALSE(mid.relaxation);

    CHECK(lao_count(p, 0.02, 0.02).relaxation);
    CHECK(lao_count(p, 0.03, 0.02).relaxation);

    CHECK_THROWS_WITH_AS(lao_count(p, 0.01, 0.0),
                         "lao_count requires z_out > 0",
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(lao_count(p, 0.01, -1.0),
                         "lao_count requires z_out > 0",
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(lao_count(koper_nf(-3.6), 0.01, 0.02),
                         "lao_count requires a remote configuration",
                         std::invalid_argument);

    // count climbs with the exit level
    long prev = 0;
    for (int j = 1; j <= 8; ++j) {
        const auto c = lao_count(p, 0.001, 0.005 * j);
        CHECK(c.count >= prev);
        prev = c.count;
    }

    // and falls as the slow rate grows
    const auto coarse = lao_count(koper_nf(-4.5, 1.5, 0.01), 0.01, 0.02);
    CHECK(coarse.count == 9);
    CHECK(mid.count >= coarse.count);

    // past the balance point the drift no longer returns the trajectory
    const auto runaway = lao_count(koper_nf(-4.5, 0.25, 0.001), 0.01, 0.02);
    CHECK(runaway.relaxation);
}
