#pragma once

#include <array>
#include <complex>
#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "mmo/model.hpp"

namespace mmo {

// A first-order system in the intermediate time scale, bundled with its
// Jacobian.  When `section_x` is finite, downward crossings of the plane
// x = section_x are recorded as trajectory events.
struct OdeSystem {
    std::function<Vec3(const State3&)> rhs;
    std::function<Mat3(const State3&)> jacobian;
    std::string name;
    double section_x = std::numeric_limits<double>::quiet_NaN();
};

OdeSystem make_system(const NormalFormParams& p);
OdeSystem make_system(const KoperParams& p);
OdeSystem make_system(const HHParams& p);

struct IntegratorConfig {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double max_step = 0.0;  // 0 selects one tenth of the time span
    double min_step = 1e-12;
    long max_steps = 20000000;
    int stride = 1;  // store every stride-th accepted step
};

enum class IntegrationStatus { Ok, MaxStepsExceeded, NonFiniteState };

enum class EventKind { Max, Min, SectionDown };

struct TrajectoryEvent {
    double t = 0.0;
    State3 s;
    EventKind kind = EventKind::Max;
};

// Stored samples are a subset of the accepted steps (per config stride); the
// first and the last accepted state are always present.  `h` records the step
// size that produced each sample (0 for the initial state).  On abnormal
// termination the final sample is the last good state and `note` says why.
struct Trajectory {
    std::vector<double> t;
    std::vector<State3> states;
    std::vector<double> h;
    std::vector<TrajectoryEvent> events;
    IntegrationStatus status = IntegrationStatus::Ok;
    bool used_implicit_fallback = false;
    std::string note;
};

// Adaptive integration from t0 to t1 with an explicit embedded 5(4) pair
// under PI step control.  When the controller pushes the step below min_step
// for 20 consecutive proposals, stepping switches to an L-stable second-order
// implicit scheme with step-doubling error control.  Local extrema of x and
// downward section crossings are refined on the dense interpolant and stored
// as events.  Identical inputs produce bitwise-identical output.
Trajectory integrate(const OdeSystem& sys, const State3& s0, double t0,
                     double t1, const IntegratorConfig& cfg = {});

struct EquilibriumReport {
    State3 location;
    std::array<std::complex<double>, 3> eigenvalues;  // descending real part
    bool stable = false;
    double residual = 0.0;
};

// Damped Newton search for rhs = 0 (at most 200 iterations, residual target
// 1e-12 in the maximum norm), followed by an eigenvalue analysis of the
// Jacobian at the root.  Throws std::runtime_error with the final residual
// when the iteration fails to converge.
EquilibriumReport find_equilibrium(const OdeSystem& sys, const State3& guess);

// Drops the leading fraction of the trajectory's time span (default 30%) or
// everything before an absolute time.  Fewer than two surviving samples
// raise std::runtime_error.
Trajectory transient_strip(const Trajectory& traj, double fraction = 0.3);
Trajectory transient_strip_from(const Trajectory& traj, double t_start);

// CSV of t, three state columns, and the step-size record, 17 significant
// digits, one header line.
void write_trajectory_csv(const Trajectory& traj, std::ostream& os,
                          const std::array<std::string, 3>& cols = {
                              "x", "y", "z"});
Trajectory read_trajectory_csv(std::istream& is);

}  // namespace mmo
