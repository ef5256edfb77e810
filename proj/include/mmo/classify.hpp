#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "mmo/geometry.hpp"
#include "mmo/integrate.hpp"
#include "mmo/local.hpp"

namespace mmo {

enum class ExtremumKind { Max, Min };

// Which attracting branch an oscillation hugs, split at the midpoint between
// the two fold abscissae.  Lower reads "below" and Upper reads "above" in the
// Farey notation.
enum class BranchSide { Lower, Upper };

struct OscillationEvent {
    double time = 0.0;
    ExtremumKind kind = ExtremumKind::Max;
    double x = 0.0;           // oscillating coordinate at the extremum
    double swing_in = 0.0;    // peak-to-peak swing arriving at the extremum
    double swing_out = 0.0;   // peak-to-peak swing leaving it
    double amplitude = 0.0;   // the larger of the two swings
    BranchSide side = BranchSide::Lower;
};

// One block of a Farey decomposition: L large excursions followed by s small
// oscillations near one branch; rendered "L^s" (above) or "L_s" (below).
struct FareySegment {
    long L = 0;
    long s = 0;
    BranchSide position = BranchSide::Upper;
};

bool operator==(const FareySegment& a, const FareySegment& b);

enum class RegimeLabel {
    SteadyState,
    MmoSingleAbove,
    MmoSingleBelow,
    MmoDouble,
    RelaxationTwoScale,
    RelaxationThreeScale,
    Exotic,
};

std::string regime_name(RegimeLabel label);

// Tunable cutoffs for the epoch decomposition and the regime rules.  The
// amplitude thresholds are fractions of the fold-to-fold x-width, so the same
// numbers work across parameter regimes.
struct ClassifyOptions {
    double theta_lao = 0.75;
    double theta_sao = 0.25;
    double dwell_speed_factor = 5.0;  // dwell when speed < factor*delta*typical
    double dwell_tube = 0.1;          // (x,z) distance to the slow curve
    double steady_speed = 1e-8;
    double equilibrium_ball = 0.05;   // accept equilibria this close to the tail
    int periods = 3;                  // recurrence windows used for labelling
};

// Strict local extrema of x(t).  Integrator-recorded extremum events are used
// verbatim when present; otherwise sample triples are scanned and refined with
// a local parabola.  branch_midpoint, when finite, fixes the side labels; the
// epoch splitter reassigns them anyway from its own geometry.
std::vector<OscillationEvent> detect_events(
    const Trajectory& traj,
    double branch_midpoint = std::numeric_limits<double>::quiet_NaN());

// Compress extrema into Farey segments.  A maximum whose smaller adjacent
// swing stays within theta_sao*(width) is a small oscillation near its branch
// (a single entry wiggle right before a jump has a tiny inbound swing even
// though the jump that follows is large); a maximum whose swings both exceed
// that and whose larger one reaches theta_lao*(width) is a large excursion.
// The in-between cases join the adjacent small-oscillation epoch and are
// reported through ambiguity_flags.
std::vector<FareySegment> split_epochs(
    const std::vector<OscillationEvent>& events, const GeometryReport& geometry,
    const ClassifyOptions& opts = {},
    std::vector<std::string>* ambiguity_flags = nullptr);

// Geometry distilled to what the regime rules need, so non-normal-form
// systems (membrane models) can reuse the classifier with their own knees.
struct OscillationFrame {
    double fold_lower = 0.0;
    double fold_upper = 1.0;
    double delta = 0.01;
    // z-level of the super-slow curve as a function of x; empty disables the
    // dwell test (no three-timescale labels).
    std::function<double(double)> slow_curve;
    // right-hand side for terminal-speed checks; empty falls back to finite
    // differences on the samples.
    std::function<Vec3(const State3&)> rhs;
    // jacobian for the equilibrium refinement; optional.
    std::function<Mat3(const State3&)> jacobian;
    double width() const { return fold_upper - fold_lower; }
    double midpoint() const { return 0.5 * (fold_lower + fold_upper); }
};

OscillationFrame frame_from_geometry(const GeometryReport& geometry);

// Regime label over the last few recurrence periods of the section
// x = midpoint crossed downward; non-recurrent oscillating tails and
// structurally irregular decompositions fall to Exotic.  The landmark
// argument fixes the public signature; the current rules derive everything
// they need from the geometry.
RegimeLabel classify_regime(const std::vector<FareySegment>& segments,
                            const Trajectory& traj,
                            const GeometryReport& geometry,
                            const LocalLandmarks& landmarks,
                            const ClassifyOptions& opts = {});

RegimeLabel classify_regime_frame(const std::vector<FareySegment>& segments,
                                  const Trajectory& traj,
                                  const OscillationFrame& frame,
                                  const ClassifyOptions& opts = {},
                                  std::vector<std::string>* notes = nullptr);

// Renders segments in the compact notation, space separated.  A decomposition
// whose epochs carry no small oscillations at all collapses to the literal
// "{L^0}"; parse maps that back to a single zero segment, so the round trip
// is exact except for the large-excursion count hidden by the collapse.
std::string farey_string(const std::vector<FareySegment>& segments);
std::vector<FareySegment> farey_parse(const std::string& text);

// Full pipeline for one trajectory: events, segments over the analysis
// window, label, and the mean recurrence period when one exists.
struct ClassifyResult {
    RegimeLabel regime = RegimeLabel::Exotic;
    std::vector<FareySegment> segments;
    std::string farey;
    std::vector<OscillationEvent> events;
    std::vector<std::string> ambiguity_flags;
    double period = std::numeric_limits<double>::quiet_NaN();
};

ClassifyResult classify_trajectory(const NormalFormParams& p,
                                   const Trajectory& traj,
                                   const ClassifyOptions& opts = {});

ClassifyResult classify_trajectory_frame(const Trajectory& traj,
                                         const OscillationFrame& frame,
                                         const ClassifyOptions& opts = {});

}  // namespace mmo
