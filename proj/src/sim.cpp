// Copyright 2026 The spinebound Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "spinebound/sim.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace spinebound {
namespace {

constexpr std::size_t kMaxEventsPerReturn = 64;
constexpr int kMaxEventBurst = 16;  // events within 1e-9 s of each other
// A swing foot deeper than this below ground never touches down; it started
// there rather than arriving.
constexpr double kContactSlack = 1e-9;

using Vec8 = std::array<double, 8>;

Vec8 pack(const GenCoords& q) {
  return {q.x, q.y, q.theta, q.phi, q.xdot, q.ydot, q.thetadot, q.phidot};
}

GenCoords unpack(const Vec8& v) {
  return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]};
}

// Smooth vector field on one branch of the spine spring.
struct VectorField {
  const ModelParams& p;
  const ContactMode& mode;
  double spine_k;

  Vec8 operator()(const Vec8& v) const {
    const auto a = dynamics(unpack(v), mode, p, spine_k);
    return {v[4], v[5], v[6], v[7], a.xddot, a.yddot, a.thetaddot, a.phiddot};
  }
};

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

struct RkStep {
  Vec8 y;
  Vec8 err;
};

RkStep dopri_step(const VectorField& f, const Vec8& y0, const Vec8& k1, double h) {
  auto stage = [&](auto&&... terms) {
    Vec8 out = y0;
    for (std::size_t i = 0; i < 8; ++i) out[i] += h * (0.0 + ... + (terms.first * (*terms.second)[i]));
    return out;
  };
  using P = std::pair<double, const Vec8*>;
  const Vec8 k2 = f(stage(P{a21, &k1}));
  const Vec8 k3 = f(stage(P{a31, &k1}, P{a32, &k2}));
  const Vec8 k4 = f(stage(P{a41, &k1}, P{a42, &k2}, P{a43, &k3}));
  const Vec8 k5 = f(stage(P{a51, &k1}, P{a52, &k2}, P{a53, &k3}, P{a54, &k4}));
  const Vec8 k6 = f(stage(P{a61, &k1}, P{a62, &k2}, P{a63, &k3}, P{a64, &k4}, P{a65, &k5}));
  RkStep s;
  s.y = stage(P{b1, &k1}, P{b3, &k3}, P{b4, &k4}, P{b5, &k5}, P{b6, &k6});
  const Vec8 k7 = f(s.y);
  for (std::size_t i = 0; i < 8; ++i) {
    s.err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
  }
  return s;
}

double error_norm(const Vec8& err, const Vec8& y0, const Vec8& y1, const Tolerances& tol) {
  double norm = 0.0;
  for (std::size_t i = 0; i < 8; ++i) {
    const double scale = tol.atol + tol.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    norm = std::max(norm, std::abs(err[i]) / scale);
  }
  return norm;
}

bool stiff_branch(const GenCoords& q) { return q.phi > 0.0 || (q.phi == 0.0 && q.phidot > 0.0); }

// Candidate event watched over one step. `before`/`after` partition the
// values of the event function on either side of the crossing.
enum class Watch { Liftoff, Touchdown, Switch, Apex, Ground };

struct Watcher {
  Watch what;
  std::optional<Leg> leg;
};

double event_value(const Watcher& w, const HybridState& s, const ModelParams& p) {
  switch (w.what) {
    case Watch::Touchdown:
      return foot_position(s, *w.leg, p).y;
    case Watch::Liftoff:
      return leg_length_and_angle(s, *w.leg, p).length - p.l0;
    case Watch::Switch:
      return s.q.phi;
    case Watch::Apex:
      return s.q.ydot;
    case Watch::Ground:
      return s.q.y;
  }
  return 0.0;
}

// True when the value lies on the post-event side.
bool crossed(const Watcher& w, double value, bool stiff) {
  switch (w.what) {
    case Watch::Touchdown:
    case Watch::Apex:
    case Watch::Ground:
      return value <= 0.0;
    case Watch::Liftoff:
      return value >= 0.0;
    case Watch::Switch:
      return stiff ? value <= 0.0 : value > 0.0;
  }
  return false;
}

GaitEvent make_event(const Watcher& w, HybridState s, const ModelParams& p) {
  GaitEvent ev;
  ev.t = s.t;
  ev.leg = w.leg;
  switch (w.what) {
    case Watch::Touchdown: {
      ev.kind = EventKind::Touchdown;
      ev.leg_angle = s.mode.td_angle[index(*w.leg)];
      s.mode.touch_down(*w.leg, foot_position(s, *w.leg, p).x);
      break;
    }
    case Watch::Liftoff:
      ev.kind = EventKind::Liftoff;
      ev.leg_angle = leg_length_and_angle(s, *w.leg, p).angle;
      s.mode.lift_off(*w.leg);
      break;
    case Watch::Switch:
      ev.kind = EventKind::StiffnessSwitch;
      break;
    case Watch::Apex:
      ev.kind = EventKind::Apex;
      break;
    case Watch::Ground:
      ev.kind = EventKind::Fault;
      ev.reason = "body hits ground";
      break;
  }
  ev.state = s;
  return ev;
}

GaitEvent fault_event(const HybridState& s, std::string reason) {
  GaitEvent ev;
  ev.t = s.t;
  ev.kind = EventKind::Fault;
  ev.reason = std::move(reason);
  ev.state = s;
  return ev;
}

}  // namespace

const char* event_kind_name(EventKind kind) {
  switch (kind) {
    case EventKind::Touchdown:
      return "touchdown";
    case EventKind::Liftoff:
      return "liftoff";
    case EventKind::Apex:
      return "apex";
    case EventKind::StiffnessSwitch:
      return "stiffness_switch";
    case EventKind::Fault:
      return "fault";
  }
  return "unknown";
}

HybridIntegrator::HybridIntegrator(ModelParams params, Tolerances tol)
    : params_(params), tol_(tol) {}

std::optional<GaitEvent> HybridIntegrator::step(HybridState& state, double dt_max,
                                                bool detect_apex) {
  const ModelParams& p = params_;

  // Events sitting exactly on the boundary at the start of the step.
  for (Leg leg : kLegs) {
    if (state.mode.in_stance(leg) &&
        leg_length_and_angle(state, leg, p).length - p.l0 >= 0.0 &&
        stance_leg_length_rate(state, leg, p) > 0.0) {
      auto ev = make_event({Watch::Liftoff, leg}, state, p);
      state = ev.state;
      return ev;
    }
  }
  for (Leg leg : kLegs) {
    const double foot_y = foot_position(state, leg, p).y;
    if (!state.mode.in_stance(leg) && foot_y <= 0.0 && foot_y > -kContactSlack &&
        swing_foot_height_rate(state, leg, p) < 0.0) {
      auto ev = make_event({Watch::Touchdown, leg}, state, p);
      state = ev.state;
      return ev;
    }
  }

  const bool stiff = stiff_branch(state.q);
  const VectorField f{p, state.mode, stiff ? p.kappa * p.k0 : p.k0};

  std::vector<Watcher> watchers;
  watchers.reserve(5);
  for (Leg leg : kLegs) {
    if (state.mode.in_stance(leg)) watchers.push_back({Watch::Liftoff, leg});
  }
  for (Leg leg : kLegs) {
    if (!state.mode.in_stance(leg)) watchers.push_back({Watch::Touchdown, leg});
  }
  watchers.push_back({Watch::Switch, std::nullopt});
  if (detect_apex && state.mode.full_flight()) watchers.push_back({Watch::Apex, std::nullopt});
  watchers.push_back({Watch::Ground, std::nullopt});

  const Vec8 y0 = pack(state.q);
  std::vector<bool> armed(watchers.size());
  for (std::size_t i = 0; i < watchers.size(); ++i) {
    armed[i] = !crossed(watchers[i], event_value(watchers[i], state, p), stiff);
  }

  try {
    const Vec8 k1 = f(y0);
    double h = std::min(h_, dt_max);
    RkStep rk;
    for (;;) {
      if (h < tol_.min_step) return fault_event(state, "step size underflow");
      rk = dopri_step(f, y0, k1, h);
      const double err = error_norm(rk.err, y0, rk.y, tol_);
      if (std::isfinite(err) && err <= 1.0) {
        const double grow = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        h_ = h * std::clamp(grow, 0.2, 5.0);
        break;
      }
      const double shrink = std::isfinite(err) ? 0.9 * std::pow(err, -0.25) : 0.1;
      h *= std::clamp(shrink, 0.1, 0.5);
    }

    auto state_at = [&](double s) {
      HybridState out = state;
      out.t = state.t + s;
      out.q = unpack(s == h ? rk.y : dopri_step(f, y0, k1, s).y);
      return out;
    };

    const HybridState end = state_at(h);
    std::optional<std::size_t> first;
    double first_s = std::numeric_limits<double>::infinity();
    HybridState first_state;
    for (std::size_t i = 0; i < watchers.size(); ++i) {
      if (!armed[i] || !crossed(watchers[i], event_value(watchers[i], end, p), stiff)) continue;
      // Illinois-modified regula falsi on the bracket (lo before, hi after),
      // falling back to bisection when the interpolant stalls near an end.
      double lo = 0.0, hi = h;
      double w_lo = event_value(watchers[i], state, p);
      HybridState at_hi = end;
      double g_hi = event_value(watchers[i], at_hi, p);
      double w_hi = g_hi;
      int last_side = 0;
      while (hi - lo > tol_.event_time && std::abs(g_hi) >= tol_.event_value) {
        double mid = w_hi != w_lo ? hi - w_hi * (hi - lo) / (w_hi - w_lo) : 0.5 * (lo + hi);
        const double guard = 1e-3 * (hi - lo);
        if (!(mid > lo + guard && mid < hi - guard)) mid = 0.5 * (lo + hi);
        const HybridState at_mid = state_at(mid);
        const double g_mid = event_value(watchers[i], at_mid, p);
        if (crossed(watchers[i], g_mid, stiff)) {
          hi = mid;
          at_hi = at_mid;
          g_hi = w_hi = g_mid;
          if (last_side == 1) w_lo *= 0.5;
          last_side = 1;
        } else {
          lo = mid;
          w_lo = g_mid;
          if (last_side == -1) w_hi *= 0.5;
          last_side = -1;
        }
      }
      // Watchers are listed in tie-break order, so strict < keeps the earlier kind.
      if (hi < first_s) {
        first = i;
        first_s = hi;
        first_state = at_hi;
      }
    }

    if (!first) {
      state = end;
      return std::nullopt;
    }
    auto ev = make_event(watchers[*first], first_state, p);
    state = ev.state;
    return ev;
  } catch (const SimulationFault& e) {
    return fault_event(state, e.what());
  }
}

StepResult integrate_step(const HybridState& state, double dt_max, const Tolerances& tol,
                          const ModelParams& params, double initial_step) {
  HybridIntegrator integrator(params, tol);
  integrator.set_step_size(initial_step);
  StepResult r{state, std::nullopt};
  r.event = integrator.step(r.state, dt_max);
  return r;
}

GenCoords integrate_fixed_step(const GenCoords& q, const ContactMode& mode,
                               const ModelParams& params, double spine_k, double duration,
                               double dt) {
  const VectorField f{params, mode, spine_k};
  Vec8 y = pack(q);
  const auto n = static_cast<long>(std::llround(duration / dt));
  const double h = duration / static_cast<double>(n);
  auto axpy = [](const Vec8& a, double s, const Vec8& b) {
    Vec8 out;
    for (std::size_t i = 0; i < 8; ++i) out[i] = a[i] + s * b[i];
    return out;
  };
  for (long step = 0; step < n; ++step) {
    const Vec8 k1 = f(y);
    const Vec8 k2 = f(axpy(y, h / 2, k1));
    const Vec8 k3 = f(axpy(y, h / 2, k2));
    const Vec8 k4 = f(axpy(y, h, k3));
    for (std::size_t i = 0; i < 8; ++i) y[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  }
  return unpack(y);
}

Trajectory simulate(const HybridState& initial, const ModelParams& params, double duration,
                    const SimConfig& config) {
  Trajectory traj;
  traj.params = params;
  traj.samples.push_back(initial);
  HybridIntegrator integrator(params, config.tol);
  HybridState s = initial;
  const double t_end = initial.t + duration;
  int burst = 0;
  while (s.t < t_end) {
    auto ev = integrator.step(s, std::min(config.sample_interval, t_end - s.t));
    if (config.record_samples || ev) traj.samples.push_back(s);
    if (!ev) continue;
    if (ev->kind == EventKind::Touchdown) ++traj.structure.stances[index(*ev->leg)];
    burst = !traj.events.empty() && ev->t - traj.events.back().t < 1e-9 ? burst + 1 : 0;
    traj.events.push_back(std::move(*ev));
    if (traj.events.back().kind == EventKind::Fault) break;
    if (burst > kMaxEventBurst) {
      traj.events.push_back(fault_event(s, "event chatter"));
      break;
    }
  }
  if (!config.record_samples && traj.samples.back().t != s.t) traj.samples.push_back(s);
  return traj;
}

ApexReturn simulate_until_apex(const HybridState& on_section, const ModelParams& params,
                               const SimConfig& config) {
  ApexReturn out;
  Trajectory& traj = out.trajectory;
  traj.params = params;
  traj.samples.push_back(on_section);
  HybridIntegrator integrator(params, config.tol);
  HybridState s = on_section;
  std::array<bool, 2> completed{false, false};
  const double t_end = on_section.t + config.max_time;
  for (;;) {
    if (s.t >= t_end) {
      throw SimulationTimeout("no apex return within " + std::to_string(config.max_time) + " s");
    }
    const bool armed = completed[0] && completed[1];
    auto ev = integrator.step(s, std::min(config.sample_interval, t_end - s.t), armed);
    if (config.record_samples || ev) traj.samples.push_back(s);
    if (!ev) continue;
    switch (ev->kind) {
      case EventKind::Touchdown:
        ++traj.structure.stances[index(*ev->leg)];
        break;
      case EventKind::Liftoff:
        completed[index(*ev->leg)] = true;
        break;
      case EventKind::Fault:
        throw SimulationFault(ev->reason);
      default:
        break;
    }
    const bool done = ev->kind == EventKind::Apex;
    traj.events.push_back(std::move(*ev));
    if (done) break;
    if (traj.events.size() > kMaxEventsPerReturn) {
      throw SimulationFault("event chatter: more than " + std::to_string(kMaxEventsPerReturn) +
                            " events before apex");
    }
  }
  out.apex = s;
  return out;
}

std::vector<ProfileRow> gait_cycle_profile(const Trajectory& trajectory, int points) {
  const auto& samples = trajectory.samples;
  const auto& p = trajectory.params;
  if (samples.size() < 2 || trajectory.events.empty() ||
      trajectory.events.back().kind != EventKind::Apex ||
      !samples.front().mode.full_flight() ||
      std::abs(samples.front().q.ydot) > 1e-6) {
    throw std::invalid_argument("gait cycle profile needs an apex-to-apex trajectory");
  }
  if (points < 2) throw std::invalid_argument("profile needs at least two points");

  const double t0 = samples.front().t;
  const double period = samples.back().t - t0;
  std::vector<ProfileRow> rows;
  rows.reserve(static_cast<std::size_t>(points));
  std::size_t j = 0;
  for (int n = 0; n < points; ++n) {
    const double pct = 100.0 * n / (points - 1);
    const double t = n == points - 1 ? samples.back().t : t0 + period * pct / 100.0;
    while (j + 2 < samples.size() && samples[j + 1].t <= t) ++j;
    const HybridState& a = samples[j];
    const HybridState& b = samples[j + 1];
    const double span = b.t - a.t;
    const double w = span > 0.0 ? std::clamp((t - a.t) / span, 0.0, 1.0) : 1.0;
    auto lerp = [w](double u, double v) { return u + w * (v - u); };

    ProfileRow row;
    row.percent = pct;
    row.t = t;
    row.q = {lerp(a.q.x, b.q.x),         lerp(a.q.y, b.q.y),
             lerp(a.q.theta, b.q.theta), lerp(a.q.phi, b.q.phi),
             lerp(a.q.xdot, b.q.xdot),   lerp(a.q.ydot, b.q.ydot),
             lerp(a.q.thetadot, b.q.thetadot), lerp(a.q.phidot, b.q.phidot)};
    for (Leg leg : kLegs) {
      const auto i = index(leg);
      row.grf[i] = lerp(ground_reaction_force(a, leg, p), ground_reaction_force(b, leg, p));
      row.psi[i] = a.mode.in_stance(leg) && b.mode.in_stance(leg)
                       ? lerp(relative_leg_angle(a, leg, p), relative_leg_angle(b, leg, p))
                       : std::numeric_limits<double>::quiet_NaN();
    }
    rows.push_back(row);
  }
  return rows;
}

namespace {

const char* phase_name(LegPhase phase) { return phase == LegPhase::Stance ? "stance" : "swing"; }

void put(std::ostream& out, double v) {
  if (std::isnan(v)) {
    out << "nan";
  } else {
    out << v;
  }
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  const auto& p = trajectory.params;
  out << std::setprecision(17);
  out << "t,x,y,theta,phi,xdot,ydot,thetadot,phidot,l1,l2,gamma1,gamma2,grf1,grf2,mode1,mode2\n";
  for (const auto& s : trajectory.samples) {
    const auto fore = leg_length_and_angle(s, Leg::Fore, p);
    const auto hind = leg_length_and_angle(s, Leg::Hind, p);
    out << s.t << ',' << s.q.x << ',' << s.q.y << ',' << s.q.theta << ',' << s.q.phi << ','
        << s.q.xdot << ',' << s.q.ydot << ',' << s.q.thetadot << ',' << s.q.phidot << ','
        << fore.length << ',' << hind.length << ',' << fore.angle << ',' << hind.angle << ','
        << ground_reaction_force(s, Leg::Fore, p) << ','
        << ground_reaction_force(s, Leg::Hind, p) << ','
        << phase_name(s.mode.phase[0]) << ',' << phase_name(s.mode.phase[1]) << '\n';
  }
}

void write_events_csv(std::ostream& out, const Trajectory& trajectory) {
  out << std::setprecision(17);
  out << "t,kind,leg\n";
  for (const auto& ev : trajectory.events) {
    out << ev.t << ',' << event_kind_name(ev.kind) << ',';
    if (ev.leg) out << leg_number(*ev.leg);
    out << '\n';
  }
}

void write_profile_csv(std::ostream& out, const std::vector<ProfileRow>& profile) {
  out << std::setprecision(17);
  out << "percent,t,x,y,theta,phi,xdot,ydot,thetadot,phidot,psi1,psi2,grf1,grf2\n";
  for (const auto& r : profile) {
    out << r.percent << ',' << r.t << ',' << r.q.x << ',' << r.q.y << ',' << r.q.theta << ','
        << r.q.phi << ',' << r.q.xdot << ',' << r.q.ydot << ',' << r.q.thetadot << ','
        << r.q.phidot << ',';
    put(out, r.psi[0]);
    out << ',';
    put(out, r.psi[1]);
    out << ',' << r.grf[0] << ',' << r.grf[1] << '\n';
  }
}

}  // namespace spinebound
