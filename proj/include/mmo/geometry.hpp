#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mmo/model.hpp"

namespace mmo {

enum class Side { Minus, Plus };

// Critical-manifold cubic y = F(x) = f2 x^2 + f3 x^3 and the intermediate
// nullcline value G(x) = alpha x + beta F(x), so M2 = { y = F(x), z = G(x) }.
struct CubicF {
    double f2 = 1.0;
    double f3 = -1.0;
    double operator()(double x) const { return f2 * x * x + f3 * x * x * x; }
    double d(double x) const { return 2.0 * f2 * x + 3.0 * f3 * x * x; }
    double d2(double x) const { return 2.0 * f2 + 6.0 * f3 * x; }
};

struct CubicG {
    double alpha = 1.0;
    double beta = -1.0;
    CubicF F;
    double operator()(double x) const { return alpha * x + beta * F(x); }
    double d(double x) const { return alpha + beta * F.d(x); }
};

CubicF cubic_f(const NormalFormParams& p);
CubicG cubic_g(const NormalFormParams& p);

// Fold lines of M1 are vertical lines in (x,y) swept along z.
struct FoldLine {
    double x = 0.0;
    double y = 0.0;
    Side which = Side::Minus;
};

struct FoldedSingularity {
    State3 location;
    Side which = Side::Minus;
};

// Fold points of M2 (critical points of G), at most two.
struct M2FoldPoints {
    int count = 0;
    std::vector<State3> points;  // sorted by increasing x
    double discriminant = 0.0;
    std::string note;
};

struct Branch {
    std::string name;  // "Z^{a-}", "Z^{r}", ...
    double x_lo = 0.0;  // -inf encoded as -HUGE_VAL
    double x_hi = 0.0;
    bool attracting = false;
};

struct BranchStability {
    std::vector<Branch> branches;  // ordered by x
};

enum class FoldPointSide { BothOnSr, OnSaMinusPlus, OnFoldLines };

enum class RelKind { Remote, Aligned, Connected };

struct ZRange {
    double lo = 0.0;
    double hi = 0.0;
};

struct RelativeConfig {
    RelKind kind = RelKind::Remote;
    double z_q_minus = 0.0;
    double z_q_plus = 0.0;
    ZRange z_range_minus;  // z-projection of M2 over the left attracting sheet
    ZRange z_range_plus;   // ... over the right attracting sheet
    bool plane_minus_meets_z_plus = false;
    bool plane_plus_meets_z_minus = false;
};

enum class CycleScale { Fast, Intermediate, Slow };

struct CycleSegment {
    CycleScale scale = CycleScale::Fast;
    State3 from;
    State3 to;
    std::vector<State3> polyline;
};

struct GeometryReport {
    NormalFormParams params;
    std::vector<FoldLine> folds;
    std::vector<FoldedSingularity> folded_singularities;
    M2FoldPoints m2_folds;
    std::optional<BranchStability> stability;
    std::optional<FoldPointSide> fold_side;
    RelativeConfig config;
};

// All throw std::invalid_argument("degenerate cubic") when f3 = 0.
std::vector<FoldLine> fold_lines(const NormalFormParams& p);
std::vector<FoldedSingularity> folded_singularities(const NormalFormParams& p);
M2FoldPoints m2_fold_points(const NormalFormParams& p);

// Stability of the branches of M2 cut by its fold points; requires two fold
// points, otherwise throws std::invalid_argument("no branch decomposition").
BranchStability branch_stability(const NormalFormParams& p);

// Which sheets of M1 carry the fold points of M2 (keyed on sign(alpha*beta),
// with alpha = 0 handled explicitly).  Throws when no fold points exist.
FoldPointSide fold_point_side(const NormalFormParams& p);

// Remote / aligned / connected classification of the folded singularities,
// with the z-projection witnesses used to decide it.  Throws
// std::invalid_argument("degenerate intermediate flow") when alpha = beta = 0.
RelativeConfig classify_relative_config(const NormalFormParams& p);

// Singular cycle in the double singular limit.  Remote: the two-scale cycle
// on the plane z = z_level (one per level between the folded singularities).
// Aligned: the unique two-scale cycle on the shared plane.  Connected: the
// unique three-scale cycle (z_level must lie within its z-extent).  Throws
// std::invalid_argument("no singular cycle at this level") outside those
// ranges.  Requires the orientation alpha > 0, beta < 0.
std::vector<CycleSegment> singular_cycle(const NormalFormParams& p, double z_level);

GeometryReport geometry_report(const NormalFormParams& p);

}  // namespace mmo
