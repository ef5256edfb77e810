#pragma once

#include <map>
#include <string>
#include <vector>

#include "mmo/classify.hpp"

namespace mmo {

// Rectangular lattice in the (k, lambda) parameter plane with fixed
// perturbation sizes and one integration and classification setup shared by
// every point.
struct GridSpec {
    double k_min = -5.5;
    double k_max = -2.5;
    int k_steps = 13;  // lattice points along k (1 pins the value at k_min)
    double lambda_min = -3.0;
    double lambda_max = 3.0;
    int lambda_steps = 13;
    double eps_hat = 0.01;
    double delta = 0.01;
    State3 initial = {-1.0, 2.0, 0.1};
    double t_end = 0.0;  // 0 picks 50/delta
    double strip_fraction = 0.5;
    IntegratorConfig config;
    ClassifyOptions classify;

    std::vector<double> k_values() const;
    std::vector<double> lambda_values() const;
};

struct SweepPoint {
    double k = 0.0;
    double lambda = 0.0;
    RegimeLabel regime = RegimeLabel::Exotic;
    std::string farey;
    double runtime_seconds = 0.0;
    bool ok = false;
    std::string error;
};

// Lattice labels in row-major order (k outer, lambda inner) plus analytic
// boundary overlays sampled at the grid's k values.  Overlay entries are NaN
// where the curve is not defined (the relaxation boundary needs k < -4).
struct SweepResult {
    GridSpec grid;
    std::vector<SweepPoint> points;
    std::vector<double> overlay_k;
    std::vector<double> lambda_sh_minus;
    std::vector<double> lambda_sh_plus;
    std::vector<double> lambda_r_minus;
    std::vector<double> lambda_r_plus;
    double divider_k = -4.0;  // leading-order single/double epoch divider
};

// Simulates and classifies every lattice point.  Points are independent;
// workers pull indices from a shared counter and write to disjoint slots, so
// the result does not depend on the worker count (0 means hardware
// concurrency).  Per-point failures are recorded and never abort the sweep.
SweepResult sweep_koper(const GridSpec& grid, unsigned workers = 0);

struct HHSweepPoint {
    double current = 0.0;
    RegimeLabel regime = RegimeLabel::Exotic;
    std::string farey;
    double runtime_seconds = 0.0;
    bool ok = false;
    std::string error;
};

// h-level of the supercritical curve (the v-nullcline restricted to
// n = n_inf(v)) at membrane voltage v, in the order-1 voltage units.
double hh_supercritical_h(const HHParams& hp, double v);

// Oscillation frame for the membrane model: the fold abscissae are the two
// knees of the fast nullcline n(v) at the frozen inactivation level h_ref.
OscillationFrame hh_frame(const HHParams& hp, double h_ref);

// Classifies the attractor for each applied current; the frame is rebuilt
// per current at the tail-median inactivation level.
std::vector<HHSweepPoint> sweep_hh(const std::vector<double>& currents,
                                   const HHParams& base);

// Writes the lattice as CSV with columns k,lambda,regime,farey in grid
// order (failed points carry the literal regime "Failed" and an empty
// farey), plus a companion "<stem>_overlays.json" with the boundary curves.
// Returns the overlay path.
std::string emit_diagram(const SweepResult& res, const std::string& csv_path);

// Plain key=value settings file; '#' starts a comment, blank lines are
// skipped, later duplicates win.
std::map<std::string, std::string> load_key_values(const std::string& path);

}  // namespace mmo
