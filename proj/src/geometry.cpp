#include "mmo/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mmo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_nondegenerate(const NormalFormParams& p) {
    if (p.f3 == 0.0) throw std::invalid_argument("degenerate cubic");
}

// Bisection for a root of f in [a,b] assuming a sign change; refines to
// machine-level interval width.
template <typename Fn>
double bisect(Fn&& f, double a, double b, double tol = 1e-14) {
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0.0) throw std::runtime_error("bisection bracket does not straddle a root");
    for (int i = 0; i < 200 && (b - a) > tol * std::max(1.0, std::fabs(a) + std::fabs(b)); ++i) {
        double m = 0.5 * (a + b);
        double fm = f(m);
        if (fm == 0.0) return m;
        if (fa * fm < 0.0) {
            b = m;
            fb = fm;
        } else {
            a = m;
            fa = fm;
        }
    }
    (void)fb;
    return 0.5 * (a + b);
}

// z-projection of { z = G(x) : x in (a,b) }, taking closure; infinite
// endpoints are resolved from the sign of the leading behaviour of G.
ZRange z_projection(const CubicG& G, double a, double b) {
    std::vector<double> vals;
    auto limit_at = [&](double sgn_x) {
        double lead = G.beta * G.F.f3;
        if (lead != 0.0) return (lead * sgn_x > 0.0) ? kInf : -kInf;  // cubic term dominates
        if (G.beta * G.F.f2 != 0.0) return G.beta * G.F.f2 > 0.0 ? kInf : -kInf;  // even power
        if (G.alpha != 0.0) return (G.alpha * sgn_x > 0.0) ? kInf : -kInf;
        return 0.0;
    };
    vals.push_back(std::isfinite(a) ? G(a) : limit_at(-1.0));
    vals.push_back(std::isfinite(b) ? G(b) : limit_at(+1.0));
    // interior critical points of G
    double qa = 3.0 * G.beta * G.F.f3, qb = 2.0 * G.beta * G.F.f2, qc = G.alpha;
    if (qa != 0.0) {
        double disc = qb * qb - 4.0 * qa * qc;
        if (disc >= 0.0) {
            double r = std::sqrt(disc);
            for (double x : {(-qb + r) / (2.0 * qa), (-qb - r) / (2.0 * qa)})
                if (x > a && x < b) vals.push_back(G(x));
        }
    } else if (qb != 0.0) {
        double x = -qc / qb;
        if (x > a && x < b) vals.push_back(G(x));
    }
    ZRange r;
    r.lo = *std::min_element(vals.begin(), vals.end());
    r.hi = *std::max_element(vals.begin(), vals.end());
    return r;
}

bool range_contains(const ZRange& r, double z) {
    double scale = std::max(1.0, std::fabs(z));
    if (std::isfinite(r.lo)) scale = std::max(scale, std::fabs(r.lo));
    if (std::isfinite(r.hi)) scale = std::max(scale, std::fabs(r.hi));
    double tol = 1e-12 * scale;
    return z >= r.lo - tol && z <= r.hi + tol;
}

// Landing point of the fast jump from the fold at x_from: the other
// intersection of { F = y_fold } with the cubic, on the opposite attracting
// sheet.  Closed forms: from L- (x=0) the jump lands at x0 = -f2/f3; from L+
// (x = -2 f2/(3 f3)) it lands at x*max = f2/(3 f3).
double jump_target(const CubicF& F, Side fold) {
    return fold == Side::Minus ? -F.f2 / F.f3 : F.f2 / (3.0 * F.f3);
}

std::vector<State3> line_polyline(const State3& a, const State3& b, int n) {
    std::vector<State3> pts;
    pts.reserve(n + 1);
    for (int i = 0; i <= n; ++i) {
        double t = static_cast<double>(i) / n;
        pts.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y), a.z + t * (b.z - a.z)});
    }
    return pts;
}

CycleSegment fast_segment(const CubicF&, double x_from, double x_to, double y, double z) {
    CycleSegment s;
    s.scale = CycleScale::Fast;
    s.from = {x_from, y, z};
    s.to = {x_to, y, z};
    s.polyline = line_polyline(s.from, s.to, 200);
    return s;
}

CycleSegment intermediate_segment(const CubicF& F, double x_from, double x_to, double z) {
    CycleSegment s;
    s.scale = CycleScale::Intermediate;
    s.from = {x_from, F(x_from), z};
    s.to = {x_to, F(x_to), z};
    s.polyline.reserve(201);
    for (int i = 0; i <= 200; ++i) {
        double x = x_from + (x_to - x_from) * i / 200.0;
        s.polyline.push_back({x, F(x), z});
    }
    return s;
}

CycleSegment slow_segment(const CubicF& F, const CubicG& G, double x_from, double x_to) {
    CycleSegment s;
    s.scale = CycleScale::Slow;
    s.from = {x_from, F(x_from), G(x_from)};
    s.to = {x_to, F(x_to), G(x_to)};
    s.polyline.reserve(201);
    for (int i = 0; i <= 200; ++i) {
        double x = x_from + (x_to - x_from) * i / 200.0;
        s.polyline.push_back({x, F(x), G(x)});
    }
    return s;
}

// Solve G(x) = z on the half-line of the given attracting sheet by bisection.
double branch_point(const CubicG& G, double z, Side sheet, double x_fold_plus) {
    double a, b;
    if (sheet == Side::Minus) {
        b = 0.0;
        a = -1.0;
        while ((G(a) > z) == (G(b) > z) && a > -1e8) a *= 2.0;
    } else {
        a = x_fold_plus;
        b = x_fold_plus + 1.0;
        while ((G(b) > z) == (G(a) > z) && b < 1e8) b = x_fold_plus + (b - x_fold_plus) * 2.0;
    }
    return bisect([&](double x) { return G(x) - z; }, a, b, 1e-15);
}

}  // namespace

CubicF cubic_f(const NormalFormParams& p) { return CubicF{p.f2, p.f3}; }
CubicG cubic_g(const NormalFormParams& p) { return CubicG{p.alpha, p.beta, cubic_f(p)}; }

std::vector<FoldLine> fold_lines(const NormalFormParams& p) {
    require_nondegenerate(p);
    CubicF F = cubic_f(p);
    double xp = -2.0 * p.f2 / (3.0 * p.f3);
    return {FoldLine{0.0, 0.0, Side::Minus}, FoldLine{xp, F(xp), Side::Plus}};
}

std::vector<FoldedSingularity> folded_singularities(const NormalFormParams& p) {
    require_nondegenerate(p);
    CubicF F = cubic_f(p);
    CubicG G = cubic_g(p);
    double xp = -2.0 * p.f2 / (3.0 * p.f3);
    return {FoldedSingularity{{0.0, 0.0, 0.0}, Side::Minus},
            FoldedSingularity{{xp, F(xp), G(xp)}, Side::Plus}};
}

M2FoldPoints m2_fold_points(const NormalFormParams& p) {
    require_nondegenerate(p);
    CubicF F = cubic_f(p);
    CubicG G = cubic_g(p);
    M2FoldPoints out;
    // critical points of G: 3 beta f3 x^2 + 2 beta f2 x + alpha = 0
    out.discriminant = p.beta * p.beta * p.f2 * p.f2 - 3.0 * p.alpha * p.beta * p.f3;
    if (p.beta == 0.0) {
        out.count = 0;
        out.note = "no fold points (beta = 0, M2 is a line without critical points)";
        return out;
    }
    double scale = std::max({1.0, std::fabs(p.beta * p.beta * p.f2 * p.f2),
                             std::fabs(3.0 * p.alpha * p.beta * p.f3)});
    double tol = 1e-12 * scale;
    if (out.discriminant < -tol) {
        out.count = 0;
        out.note = "no fold points (negative discriminant)";
        return out;
    }
    if (std::fabs(out.discriminant) <= tol) {
        out.count = 1;
        double x = -p.f2 / (3.0 * p.f3);
        out.points.push_back({x, F(x), G(x)});
        out.note = "degenerate double fold point";
        return out;
    }
    out.count = 2;
    double r = std::sqrt(out.discriminant);
    double x1 = (-p.beta * p.f2 + r) / (3.0 * p.beta * p.f3);
    double x2 = (-p.beta * p.f2 - r) / (3.0 * p.beta * p.f3);
    if (x1 > x2) std::swap(x1, x2);
    out.points.push_back({x1, F(x1), G(x1)});
    out.points.push_back({x2, F(x2), G(x2)});
    return out;
}

BranchStability branch_stability(const NormalFormParams& p) {
    M2FoldPoints fp = m2_fold_points(p);
    if (fp.count < 2) throw std::invalid_argument("no branch decomposition");
    bool outer_attracting = p.beta < 0.0;
    BranchStability bs;
    bs.branches.push_back({outer_attracting ? "Z^{a-}" : "Z^{r-}", -kInf, fp.points[0].x,
                           outer_attracting});
    bs.branches.push_back({outer_attracting ? "Z^{r}" : "Z^{a}", fp.points[0].x, fp.points[1].x,
                           !outer_attracting});
    bs.branches.push_back({outer_attracting ? "Z^{a+}" : "Z^{r+}", fp.points[1].x, kInf,
                           outer_attracting});
    return bs;
}

FoldPointSide fold_point_side(const NormalFormParams& p) {
    require_nondegenerate(p);
    if (p.alpha == 0.0) return FoldPointSide::OnFoldLines;
    if (p.beta == 0.0) throw std::invalid_argument("no fold points (beta = 0)");
    if (m2_fold_points(p).count == 0) throw std::invalid_argument("no fold points");
    return p.alpha * p.beta < 0.0 ? FoldPointSide::BothOnSr : FoldPointSide::OnSaMinusPlus;
}

RelativeConfig classify_relative_config(const NormalFormParams& p) {
    require_nondegenerate(p);
    if (p.alpha == 0.0 && p.beta == 0.0)
        throw std::invalid_argument("degenerate intermediate flow");
    CubicG G = cubic_g(p);
    auto q = folded_singularities(p);
    RelativeConfig rc;
    rc.z_q_minus = q[0].location.z;
    rc.z_q_plus = q[1].location.z;
    double x_fold_plus = q[1].location.x;
    rc.z_range_minus = z_projection(G, -kInf, 0.0);
    rc.z_range_plus = z_projection(G, x_fold_plus, kInf);
    rc.plane_minus_meets_z_plus = range_contains(rc.z_range_plus, rc.z_q_minus);
    rc.plane_plus_meets_z_minus = range_contains(rc.z_range_minus, rc.z_q_plus);
    double tol = 1e-9 * std::max({1.0, std::fabs(rc.z_q_plus), std::fabs(rc.z_q_minus)});
    if (std::fabs(rc.z_q_plus - rc.z_q_minus) <= tol)
        rc.kind = RelKind::Aligned;
    else if (rc.plane_minus_meets_z_plus && rc.plane_plus_meets_z_minus)
        rc.kind = RelKind::Connected;
    else
        rc.kind = RelKind::Remote;
    return rc;
}

std::vector<CycleSegment> singular_cycle(const NormalFormParams& p, double z_level) {
    require_nondegenerate(p);
    if (!(p.alpha > 0.0) || !(p.beta < 0.0))
        throw std::invalid_argument("singular cycle construction requires alpha > 0 and beta < 0");
    CubicF F = cubic_f(p);
    CubicG G = cubic_g(p);
    RelativeConfig rc = classify_relative_config(p);
    double x_lp = -2.0 * p.f2 / (3.0 * p.f3);  // fold line L+
    double y_lp = F(x_lp);
    double x0 = jump_target(F, Side::Minus);    // landing of the jump from L-
    double xs = jump_target(F, Side::Plus);     // landing of the jump from L+

    auto two_scale = [&](double z) {
        std::vector<CycleSegment> cyc;
        cyc.push_back(fast_segment(F, 0.0, x0, 0.0, z));
        cyc.push_back(intermediate_segment(F, x0, x_lp, z));
        cyc.push_back(fast_segment(F, x_lp, xs, y_lp, z));
        cyc.push_back(intermediate_segment(F, xs, 0.0, z));
        return cyc;
    };

    if (rc.kind == RelKind::Aligned) {
        double tol = 1e-9 * std::max(1.0, std::fabs(rc.z_q_minus));
        if (std::fabs(z_level - rc.z_q_minus) > tol)
            throw std::invalid_argument("no singular cycle at this level");
        return two_scale(rc.z_q_minus);
    }

    if (rc.kind == RelKind::Remote) {
        double lo = std::min(rc.z_q_minus, rc.z_q_plus);
        double hi = std::max(rc.z_q_minus, rc.z_q_plus);
        double tol = 1e-12 * std::max({1.0, std::fabs(lo), std::fabs(hi)});
        if (z_level < lo - tol || z_level > hi + tol)
            throw std::invalid_argument("no singular cycle at this level");
        // intermediate flow must run toward the folds on both outer sheets
        return two_scale(z_level);
    }

    // connected: unique three-scale cycle through both folded singularities
    double lo = std::min(rc.z_q_minus, rc.z_q_plus);
    double hi = std::max(rc.z_q_minus, rc.z_q_plus);
    double tol = 1e-12 * std::max({1.0, std::fabs(lo), std::fabs(hi)});
    if (z_level < lo - tol || z_level > hi + tol)
        throw std::invalid_argument("no singular cycle at this level");
    double h_qm = p.mu + p.phi(0.0, 0.0, rc.z_q_minus);
    double h_qp = p.mu + p.phi(x_lp, y_lp, rc.z_q_plus);
    if (!(h_qm > 0.0) || !(h_qp < 0.0))
        throw std::invalid_argument(
            "no singular cycle at this level (slow flow does not connect the folded "
            "singularities)");
    double x_zp = branch_point(G, rc.z_q_minus, Side::Plus, x_lp);   // Z^{a+} at z_q^-
    double x_zm = branch_point(G, rc.z_q_plus, Side::Minus, x_lp);   // Z^{a-} at z_q^+
    std::vector<CycleSegment> cyc;
    cyc.push_back(fast_segment(F, 0.0, x0, 0.0, rc.z_q_minus));
    cyc.push_back(intermediate_segment(F, x0, x_zp, rc.z_q_minus));
    cyc.push_back(slow_segment(F, G, x_zp, x_lp));
    cyc.push_back(fast_segment(F, x_lp, xs, y_lp, rc.z_q_plus));
    cyc.push_back(intermediate_segment(F, xs, x_zm, rc.z_q_plus));
    cyc.push_back(slow_segment(F, G, x_zm, 0.0));
    return cyc;
}

GeometryReport geometry_report(const NormalFormParams& p) {
    GeometryReport r;
    r.params = p;
    r.folds = fold_lines(p);
    r.folded_singularities = folded_singularities(p);
    r.m2_folds = m2_fold_points(p);
    if (r.m2_folds.count == 2) r.stability = branch_stability(p);
    try {
        r.fold_side = fold_point_side(p);
    } catch (const std::invalid_argument&) {
        r.fold_side.reset();
    }
    r.config = classify_relative_config(p);
    return r;
}

}  // namespace mmo
