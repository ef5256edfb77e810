#include "mmo/classify.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <stdexcept>

namespace mmo {

namespace {

double comp(const State3& s, int i) { return i == 0 ? s.x : (i == 1 ? s.y : s.z); }

double state_dist(const State3& a, const State3& b) {
    double m = 0.0;
    for (int i = 0; i < 3; ++i)
        m = std::max(m, std::fabs(comp(a, i) - comp(b, i)));
    return m;
}

// Speed at sample i from a backward difference; used when no rhs is known.
double fd_speed(const Trajectory& traj, std::size_t i) {
    if (i == 0 || traj.t[i] <= traj.t[i - 1]) return 0.0;
    return state_dist(traj.states[i], traj.states[i - 1]) /
           (traj.t[i] - traj.t[i - 1]);
}

double sample_speed(const Trajectory& traj, std::size_t i,
                    const std::function<Vec3(const State3&)>& rhs) {
    if (!rhs) return fd_speed(traj, i);
    const Vec3 f = rhs(traj.states[i]);
    return std::max({std::fabs(f[0]), std::fabs(f[1]), std::fabs(f[2])});
}

// Rate of the intermediate variable alone; its window maximum sets the
// intermediate speed scale without being polluted by the fast jumps (which
// inflate the x-rate) or by long dwells (which would drag a median down).
double y_rate(const Trajectory& traj, std::size_t i,
              const std::function<Vec3(const State3&)>& rhs) {
    if (rhs) return std::fabs(rhs(traj.states[i])[1]);
    if (i == 0 || traj.t[i] <= traj.t[i - 1]) return 0.0;
    return std::fabs(traj.states[i].y - traj.states[i - 1].y) /
           (traj.t[i] - traj.t[i - 1]);
}

// Downward crossings of x = c located by linear interpolation on the samples.
std::vector<double> section_crossings(const Trajectory& traj, double c) {
    std::vector<double> out;
    for (std::size_t i = 1; i < traj.t.size(); ++i) {
        const double a = traj.states[i - 1].x;
        const double b = traj.states[i].x;
        if (a > c && b <= c) {
            const double u = (a - c) / (a - b);
            out.push_back(traj.t[i - 1] + u * (traj.t[i] - traj.t[i - 1]));
        }
    }
    return out;
}

void assign_amplitudes(std::vector<OscillationEvent>& evs,
                       const Trajectory& traj) {
    if (evs.empty()) return;
    const double x_first = traj.states.front().x;
    const double x_last = traj.states.back().x;
    for (std::size_t i = 0; i < evs.size(); ++i) {
        const double prev = i == 0 ? x_first : evs[i - 1].x;
        const double next = i + 1 == evs.size() ? x_last : evs[i + 1].x;
        evs[i].swing_in = std::fabs(evs[i].x - prev);
        evs[i].swing_out = std::fabs(evs[i].x - next);
        evs[i].amplitude = std::max(evs[i].swing_in, evs[i].swing_out);
    }
}

// Merge violations of max/min alternation, keeping the more extreme of two
// consecutive events of the same kind.
void enforce_alternation(std::vector<OscillationEvent>& evs) {
    std::vector<OscillationEvent> out;
    for (const auto& e : evs) {
        if (!out.empty() && out.back().kind == e.kind) {
            const bool replace = e.kind == ExtremumKind::Max
                                     ? e.x > out.back().x
                                     : e.x < out.back().x;
            if (replace) out.back() = e;
            continue;
        }
        out.push_back(e);
    }
    evs.swap(out);
}

struct WindowAnalysis {
    RegimeLabel label = RegimeLabel::Exotic;
    std::vector<FareySegment> segments;
    double period = std::numeric_limits<double>::quiet_NaN();
};

std::vector<FareySegment> build_segments(
    const std::vector<OscillationEvent>& events, double width,
    const ClassifyOptions& opts, std::vector<std::string>* flags) {
    std::vector<FareySegment> out;
    const double lao_bar = opts.theta_lao * width;
    const double sao_bar = opts.theta_sao * width;
    // An upward large excursion peaks in a maximum, a downward one bottoms
    // out in a minimum, and a full loop leaves one of each, so the loop count
    // of a gap is the larger of the two tallies.
    long pending_max = 0;
    long pending_min = 0;
    bool run_open = false;
    BranchSide run_side = BranchSide::Lower;
    long run_count = 0;
    auto close_run = [&]() {
        out.push_back({std::max(pending_max, pending_min), run_count, run_side});
        pending_max = 0;
        pending_min = 0;
        run_open = false;
        run_count = 0;
    };
    for (const auto& e : events) {
        const double small_swing = std::min(e.swing_in, e.swing_out);
        if (small_swing > sao_bar && e.amplitude >= lao_bar) {
            if (run_open) close_run();
            if (e.kind == ExtremumKind::Max)
                ++pending_max;
            else
                ++pending_min;
            continue;
        }
        // small and ambiguous minima ride along with their maxima
        if (e.kind != ExtremumKind::Max) continue;
        if (small_swing > sao_bar && flags) {
            std::ostringstream os;
            os << "ambiguous swing of amplitude " << e.amplitude << " at t = "
               << e.time << " attached to the small-oscillation epoch";
            flags->push_back(os.str());
        }
        if (run_open && e.side != run_side) close_run();
        if (!run_open) {
            run_open = true;
            run_side = e.side;
        }
        ++run_count;
    }
    if (run_open)
        close_run();
    else if (pending_max > 0 || pending_min > 0)
        out.push_back({std::max(pending_max, pending_min), 0,
                       BranchSide::Upper});
    return out;
}

WindowAnalysis analyse_window(const std::vector<FareySegment>& segments,
                              const Trajectory& traj,
                              const OscillationFrame& frame,
                              const ClassifyOptions& opts,
                              std::vector<std::string>* notes) {
    WindowAnalysis wa;
    wa.segments = segments;
    if (traj.t.size() < 2)
        throw std::invalid_argument("trajectory too short to classify");
    const double t0 = traj.t.front();
    const double t1 = traj.t.back();

    // Converged tails beat every oscillation rule.  The raw terminal speed
    // floors near the integration error, so a quiet tail is also accepted
    // when a stable equilibrium sits right next to it.
    const double end_speed =
        sample_speed(traj, traj.t.size() - 1, frame.rhs);
    bool steady = end_speed <= opts.steady_speed;
    std::vector<OscillationEvent> evs = detect_events(traj, frame.midpoint());
    if (!steady && frame.rhs && frame.jacobian &&
        end_speed <= 1e4 * opts.steady_speed) {
        // a tail slower than any slow drift that also hugs a stable
        // equilibrium has converged; decaying wiggles at the integration
        // error level keep emitting events, so no quiet-tail demand here
        OdeSystem sys;
        sys.rhs = frame.rhs;
        sys.jacobian = frame.jacobian;
        sys.name = "classify";
        try {
            const auto rep = find_equilibrium(sys, traj.states.back());
            steady = rep.stable &&
                     state_dist(rep.location, traj.states.back()) <=
                         opts.equilibrium_ball;
        } catch (const std::runtime_error&) {
            steady = false;
        }
    }
    if (steady) {
        wa.label = RegimeLabel::SteadyState;
        wa.segments.clear();  // a converged tail has no periodic pattern
        return wa;
    }
    if (evs.empty()) return wa;  // drifts without oscillating: Exotic

    // Periodicity from downward crossings of the fold midpoint; a tail that
    // never recurs cannot be assigned a periodic pattern.
    const auto crossings = section_crossings(traj, frame.midpoint());
    double win_lo = t0;
    double win_hi = t1;
    if (crossings.size() >= 2) {
        const std::size_t m = crossings.size();
        const std::size_t span = std::min<std::size_t>(
            static_cast<std::size_t>(std::max(1, opts.periods)), m - 1);
        win_lo = crossings[m - 1 - span];
        win_hi = crossings[m - 1];
        wa.period = (win_hi - win_lo) / static_cast<double>(span);
        std::vector<OscillationEvent> wevs;
        for (const auto& e : evs)
            if (e.time >= win_lo && e.time <= win_hi) wevs.push_back(e);
        wa.segments = build_segments(wevs, frame.width(), opts, notes);
    } else {
        wa.label = RegimeLabel::Exotic;
        return wa;
    }

    long total_l = 0;
    bool sao_above = false;
    bool sao_below = false;
    for (const auto& seg : wa.segments) {
        total_l += seg.L;
        if (seg.s > 0) {
            if (seg.position == BranchSide::Upper)
                sao_above = true;
            else
                sao_below = true;
        }
    }
    if (total_l == 0) {
        wa.label = RegimeLabel::Exotic;
        return wa;
    }
    if (sao_above && sao_below) {
        wa.label = RegimeLabel::MmoDouble;
        return wa;
    }
    if (sao_above) {
        wa.label = RegimeLabel::MmoSingleAbove;
        return wa;
    }
    if (sao_below) {
        wa.label = RegimeLabel::MmoSingleBelow;
        return wa;
    }

    // No small oscillations at all: a relaxation cycle.  It is three-scale
    // when the orbit also creeps along the super-slow curve on both
    // attracting branches.
    bool dwell_lower = false;
    bool dwell_upper = false;
    if (frame.slow_curve) {
        std::vector<double> speeds;
        std::vector<std::size_t> idx;
        for (std::size_t i = 1; i < traj.t.size(); ++i) {
            if (traj.t[i] < win_lo || traj.t[i] > win_hi) continue;
            idx.push_back(i);
            speeds.push_back(sample_speed(traj, i, frame.rhs));
        }
        if (!speeds.empty()) {
            double typical = 0.0;
            for (std::size_t i : idx)
                typical = std::max(typical, y_rate(traj, i, frame.rhs));
            const double bar =
                opts.dwell_speed_factor * frame.delta * typical;
            for (std::size_t j = 0; j < idx.size(); ++j) {
                if (speeds[j] >= bar) continue;
                const State3& s = traj.states[idx[j]];
                if (std::fabs(s.z - frame.slow_curve(s.x)) > opts.dwell_tube)
                    continue;
                if (s.x < frame.fold_lower) dwell_lower = true;
                if (s.x > frame.fold_upper) dwell_upper = true;
            }
        }
    }
    wa.label = (dwell_lower && dwell_upper)
                   ? RegimeLabel::RelaxationThreeScale
                   : RegimeLabel::RelaxationTwoScale;
    return wa;
}

}  // namespace

bool operator==(const FareySegment& a, const FareySegment& b) {
    return a.L == b.L && a.s == b.s && a.position == b.position;
}

std::string regime_name(RegimeLabel label) {
    switch (label) {
        case RegimeLabel::SteadyState: return "SteadyState";
        case RegimeLabel::MmoSingleAbove: return "MmoSingleAbove";
        case RegimeLabel::MmoSingleBelow: return "MmoSingleBelow";
        case RegimeLabel::MmoDouble: return "MmoDouble";
        case RegimeLabel::RelaxationTwoScale: return "RelaxationTwoScale";
        case RegimeLabel::RelaxationThreeScale: return "RelaxationThreeScale";
        case RegimeLabel::Exotic: return "Exotic";
    }
    return "Exotic";
}

std::vector<OscillationEvent> detect_events(const Trajectory& traj,
                                            double branch_midpoint) {
    if (traj.t.size() != traj.states.size())
        throw std::invalid_argument("trajectory samples are inconsistent");
    std::vector<OscillationEvent> evs;
    bool have_recorded = false;
    for (const auto& e : traj.events) {
        if (e.kind != EventKind::Max && e.kind != EventKind::Min) continue;
        have_recorded = true;
        OscillationEvent oe;
        oe.time = e.t;
        oe.kind = e.kind == EventKind::Max ? ExtremumKind::Max
                                           : ExtremumKind::Min;
        oe.x = e.s.x;
        evs.push_back(oe);
    }
    if (!have_recorded && traj.t.size() >= 3) {
        for (std::size_t i = 1; i + 1 < traj.t.size(); ++i) {
            const double a = traj.states[i - 1].x;
            const double b = traj.states[i].x;
            const double c = traj.states[i + 1].x;
            const bool is_max = b > a && b > c;
            const bool is_min = b < a && b < c;
            if (!is_max && !is_min) continue;
            // refine with the vertex of the parabola through the triple
            const double ta = traj.t[i - 1], tb = traj.t[i], tc = traj.t[i + 1];
            const double d1 = (b - a) / (tb - ta);
            const double d2 = (c - b) / (tc - tb);
            const double dd = (d2 - d1) / (tc - ta);
            double tv = tb;
            double xv = b;
            if (dd != 0.0) {
                tv = std::clamp(0.5 * (ta + tb) - 0.5 * d1 / dd, ta, tc);
                xv = a + d1 * (tv - ta) + dd * (tv - ta) * (tv - tb);
            }
            OscillationEvent oe;
            oe.time = tv;
            oe.kind = is_max ? ExtremumKind::Max : ExtremumKind::Min;
            oe.x = xv;
            evs.push_back(oe);
        }
    }
    std::sort(evs.begin(), evs.end(),
              [](const OscillationEvent& l, const OscillationEvent& r) {
                  return l.time < r.time;
              });
    enforce_alternation(evs);
    assign_amplitudes(evs, traj);
    if (std::isfinite(branch_midpoint))
        for (auto& e : evs)
            e.side = e.x < branch_midpoint ? BranchSide::Lower
                                           : BranchSide::Upper;
    return evs;
}

std::vector<FareySegment> split_epochs(
    const std::vector<OscillationEvent>& events, const GeometryReport& geometry,
    const ClassifyOptions& opts, std::vector<std::string>* ambiguity_flags) {
    const OscillationFrame frame = frame_from_geometry(geometry);
    std::vector<OscillationEvent> evs = events;
    for (auto& e : evs)
        e.side = e.x < frame.midpoint() ? BranchSide::Lower : BranchSide::Upper;
    return build_segments(evs, frame.width(), opts, ambiguity_flags);
}

OscillationFrame frame_from_geometry(const GeometryReport& geometry) {
    const NormalFormParams p = geometry.params;
    if (p.f3 == 0.0) throw std::invalid_argument("degenerate cubic");
    OscillationFrame frame;
    frame.fold_lower = 0.0;
    frame.fold_upper = -2.0 * p.f2 / (3.0 * p.f3);
    frame.delta = p.delta;
    const CubicG G = cubic_g(p);
    frame.slow_curve = [G](double x) { return G(x); };
    const OdeSystem sys = make_system(p);
    frame.rhs = sys.rhs;
    frame.jacobian = sys.jacobian;
    return frame;
}

RegimeLabel classify_regime(const std::vector<FareySegment>& segments,
                            const Trajectory& traj,
                            const GeometryReport& geometry,
                            const LocalLandmarks&,
                            const ClassifyOptions& opts) {
    return classify_regime_frame(segments, traj, frame_from_geometry(geometry),
                                 opts);
}

RegimeLabel classify_regime_frame(const std::vector<FareySegment>& segments,
                                  const Trajectory& traj,
                                  const OscillationFrame& frame,
                                  const ClassifyOptions& opts,
                                  std::vector<std::string>* notes) {
    return analyse_window(segments, traj, frame, opts, notes).label;
}

std::string farey_string(const std::vector<FareySegment>& segments) {
    if (segments.empty()) return "";
    const bool any_small = std::any_of(
        segments.begin(), segments.end(),
        [](const FareySegment& s) { return s.s > 0; });
    if (!any_small) return "{L^0}";
    std::ostringstream os;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        if (i) os << ' ';
        os << segments[i].L
           << (segments[i].position == BranchSide::Upper ? '^' : '_')
           << segments[i].s;
    }
    return os.str();
}

std::vector<FareySegment> farey_parse(const std::string& text) {
    std::vector<FareySegment> out;
    std::istringstream is(text);
    std::string tok;
    while (is >> tok) {
        if (tok == "{L^0}") {
            out.push_back({0, 0, BranchSide::Upper});
            continue;
        }
        const std::size_t up = tok.find('^');
        const std::size_t down = tok.find('_');
        if ((up == std::string::npos) == (down == std::string::npos))
            throw std::invalid_argument("malformed farey token: " + tok);
        const std::size_t sep = up != std::string::npos ? up : down;
        FareySegment seg;
        seg.position =
            up != std::string::npos ? BranchSide::Upper : BranchSide::Lower;
        try {
            std::size_t used = 0;
            seg.L = std::stol(tok.substr(0, sep), &used);
            if (used != sep) throw std::invalid_argument(tok);
            seg.s = std::stol(tok.substr(sep + 1), &used);
            if (used != tok.size() - sep - 1) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw std::invalid_argument("malformed farey token: " + tok);
        }
        if (seg.L < 0 || seg.s < 0)
            throw std::invalid_argument("malformed farey token: " + tok);
        out.push_back(seg);
    }
    return out;
}

ClassifyResult classify_trajectory(const NormalFormParams& p,
                                   const Trajectory& traj,
                                   const ClassifyOptions& opts) {
    return classify_trajectory_frame(
        traj, frame_from_geometry(geometry_report(p)), opts);
}

ClassifyResult classify_trajectory_frame(const Trajectory& traj,
                                         const OscillationFrame& frame,
                                         const ClassifyOptions& opts) {
    ClassifyResult res;
    res.events = detect_events(traj, frame.midpoint());
    std::vector<FareySegment> full =
        build_segments(res.events, frame.width(), opts, &res.ambiguity_flags);
    const WindowAnalysis wa =
        analyse_window(full, traj, frame, opts, &res.ambiguity_flags);
    res.regime = wa.label;
    res.segments = wa.segments;
    res.period = wa.period;
    res.farey = farey_string(res.segments);
    return res;
}

}  // namespace mmo
