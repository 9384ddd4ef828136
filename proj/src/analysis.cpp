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

#include "spinebound/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace spinebound {
namespace {

struct Interval {
  double begin = 0.0;
  double end = 0.0;
  bool flight = false;
  std::optional<Leg> opener;
};

std::vector<Interval> contact_intervals(const Trajectory& traj) {
  std::vector<Interval> out;
  ContactMode mode = traj.samples.front().mode;
  Interval cur{traj.t_start(), traj.t_start(), mode.full_flight(), std::nullopt};
  for (const auto& ev : traj.events) {
    if (ev.kind != EventKind::Touchdown && ev.kind != EventKind::Liftoff) continue;
    cur.end = ev.t;
    out.push_back(cur);
    if (ev.kind == EventKind::Touchdown) {
      mode.touch_down(*ev.leg, 0.0);
    } else {
      mode.lift_off(*ev.leg);
    }
    cur = {ev.t, ev.t, mode.full_flight(),
           ev.kind == EventKind::Liftoff ? ev.leg : std::optional<Leg>{}};
  }
  cur.end = traj.t_end();
  out.push_back(cur);
  return out;
}

// Largest-|phi| local extremum among the samples, located by sign changes of
// phidot; falls back to the largest |phi| if phi is monotone.
double phi_extremum(const std::vector<const HybridState*>& pts) {
  double best = 0.0;
  bool found = false;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double a = pts[i - 1]->q.phidot, b = pts[i]->q.phidot;
    if ((a > 0.0 && b <= 0.0) || (a < 0.0 && b >= 0.0)) {
      const double v = std::abs(pts[i - 1]->q.phi) > std::abs(pts[i]->q.phi) ? pts[i - 1]->q.phi
                                                                              : pts[i]->q.phi;
      if (!found || std::abs(v) > std::abs(best)) best = v;
      found = true;
    }
  }
  if (found) return best;
  for (const auto* s : pts) {
    if (std::abs(s->q.phi) > std::abs(best)) best = s->q.phi;
  }
  return best;
}

void append_samples(const Trajectory& traj, double begin, double end,
                    std::vector<const HybridState*>& out) {
  for (const auto& s : traj.samples) {
    if (s.t >= begin && s.t <= end) out.push_back(&s);
  }
}

void require_periodic(const Trajectory& traj, double tol) {
  if (traj.samples.size() < 2 || !(traj.t_end() > traj.t_start())) {
    throw std::invalid_argument("trajectory does not span a cycle");
  }
  const auto& a = traj.samples.front();
  const auto& b = traj.samples.back();
  const double gap = std::max({std::abs(a.q.y - b.q.y), std::abs(a.q.theta - b.q.theta),
                               std::abs(a.q.phi - b.q.phi), std::abs(a.q.xdot - b.q.xdot),
                               std::abs(a.q.ydot - b.q.ydot),
                               std::abs(a.q.thetadot - b.q.thetadot),
                               std::abs(a.q.phidot - b.q.phidot)});
  if (a.mode.phase != b.mode.phase || !(gap <= tol)) {
    throw std::invalid_argument("trajectory is not periodic (end-to-start mismatch " +
                                std::to_string(gap) + ")");
  }
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double pop_std(const std::vector<double>& v, double mu) {
  double s = 0.0;
  for (double x : v) s += (x - mu) * (x - mu);
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

std::vector<FlightPhase> flight_phases(const Trajectory& traj, const ClassifierOptions& options) {
  auto intervals = contact_intervals(traj);
  std::vector<FlightPhase> out;
  const bool wrap = intervals.size() > 1 && intervals.front().flight && intervals.back().flight;
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    const auto& iv = intervals[i];
    if (!iv.flight) continue;
    if (wrap && i == 0) continue;  // handled together with the last interval
    std::vector<const HybridState*> pts;
    FlightPhase fp;
    fp.duration = iv.end - iv.begin;
    fp.preceded_by = iv.opener;
    append_samples(traj, iv.begin, iv.end, pts);
    if (wrap && i + 1 == intervals.size()) {
      fp.duration += intervals.front().end - intervals.front().begin;
      append_samples(traj, intervals.front().begin, intervals.front().end, pts);
    }
    if (fp.duration <= options.min_flight) continue;
    fp.phi_extremum = phi_extremum(pts);
    out.push_back(fp);
  }
  return out;
}

SolutionType classify(const Trajectory& traj, const ClassifierOptions& options) {
  require_periodic(traj, options.periodicity);
  const auto flights = flight_phases(traj, options);
  auto sign = [&](const FlightPhase& f) {
    if (f.phi_extremum > options.min_extremum) return 1;
    if (f.phi_extremum < -options.min_extremum) return -1;
    return 0;
  };
  if (flights.size() == 1) {
    return sign(flights[0]) > 0 ? SolutionType::E : SolutionType::Other;
  }
  if (flights.size() != 2) return SolutionType::Other;
  const auto& a = flights[0];
  const auto& b = flights[1];
  if (!a.preceded_by || !b.preceded_by || *a.preceded_by == *b.preceded_by) {
    return SolutionType::Other;
  }
  const auto& after_fore = *a.preceded_by == Leg::Fore ? a : b;
  const auto& after_hind = *a.preceded_by == Leg::Fore ? b : a;
  const int fore = sign(after_fore), hind = sign(after_hind);
  if (hind > 0 && fore < 0) return SolutionType::EG;
  if (fore > 0 && hind < 0) return SolutionType::GE;
  if (fore > 0 && hind > 0) return SolutionType::EE;
  return SolutionType::Other;
}

double max_grf(const Trajectory& traj) {
  double best = 0.0;
  for (const auto& s : traj.samples) {
    for (Leg leg : kLegs) best = std::max(best, ground_reaction_force(s, leg, traj.params));
  }
  return best;
}

double avg_velocity(const Trajectory& traj) {
  if (traj.samples.size() < 2) throw std::invalid_argument("trajectory has zero duration");
  const double period = traj.t_end() - traj.t_start();
  if (!(period > 0.0)) throw std::invalid_argument("trajectory has zero duration");
  return (traj.samples.back().q.x - traj.samples.front().q.x) / period;
}

TouchdownStatistics touchdown_statistics(const Trajectory& traj) {
  const auto& p = traj.params;
  TouchdownStatistics st;
  std::array<bool, 2> touched{false, false}, lifted{false, false};
  std::array<double, 2> lo{}, hi{};
  auto psi_at = [](const HybridState& s, Leg leg, double gamma) {
    const double pitch = leg == Leg::Fore ? s.q.theta + s.q.phi : s.q.theta - s.q.phi;
    return std::numbers::pi / 2.0 + pitch - gamma;
  };
  auto widen = [&](Leg leg, double psi) {
    const auto i = index(leg);
    if (!touched[i] && !lifted[i]) {
      lo[i] = hi[i] = psi;
    } else {
      lo[i] = std::min(lo[i], psi);
      hi[i] = std::max(hi[i], psi);
    }
  };
  for (const auto& ev : traj.events) {
    if (ev.kind != EventKind::Touchdown && ev.kind != EventKind::Liftoff) continue;
    const Leg leg = *ev.leg;
    const double psi = psi_at(ev.state, leg, ev.leg_angle);
    widen(leg, psi);
    if (ev.kind == EventKind::Touchdown) {
      if (!touched[index(leg)]) {
        if (leg == Leg::Fore) {
          st.phi_td1 = ev.state.q.phi;
          st.psi_td1 = psi;
        } else {
          st.psi_td2 = psi;
        }
      }
      touched[index(leg)] = true;
    } else {
      if (!lifted[index(leg)]) (leg == Leg::Fore ? st.psi_lo1 : st.psi_lo2) = psi;
      lifted[index(leg)] = true;
    }
  }
  if (!touched[0] || !lifted[0]) {
    throw std::invalid_argument("trajectory has no complete fore stance");
  }
  for (const auto& s : traj.samples) {
    for (Leg leg : kLegs) {
      if (s.mode.in_stance(leg)) widen(leg, relative_leg_angle(s, leg, p));
    }
  }
  for (Leg leg : kLegs) st.psi_range[index(leg)] = {lo[index(leg)], hi[index(leg)]};
  return st;
}

Trajectory mirror_trajectory(const Trajectory& traj) {
  auto mirror_state = [](const HybridState& s) {
    HybridState m = s;
    m.q.x = -s.q.x;
    m.q.theta = -s.q.theta;
    m.q.xdot = -s.q.xdot;
    m.q.thetadot = -s.q.thetadot;
    for (Leg leg : kLegs) {
      const auto i = index(leg), j = index(other(leg));
      m.mode.phase[i] = s.mode.phase[j];
      m.mode.td_angle[i] = -s.mode.td_angle[j];
      m.mode.toe_x[i] = s.mode.toe_x[j] ? std::optional<double>(-*s.mode.toe_x[j]) : std::nullopt;
    }
    return m;
  };
  Trajectory out = traj;
  for (auto& s : out.samples) s = mirror_state(s);
  for (auto& ev : out.events) {
    ev.state = mirror_state(ev.state);
    if (ev.leg) ev.leg = other(*ev.leg);
    ev.leg_angle = -ev.leg_angle;
  }
  std::swap(out.structure.stances[0], out.structure.stances[1]);
  return out;
}

FixedPointRecord evaluate_record(FixedPointRecord record, const ModelParams& params,
                                 const StabilityOptions& options) {
  ModelParams p = params;
  p.kappa = record.kappa;
  const ReturnResult cycle = return_map(record.z_star, record.td_angles, p);
  const Trajectory& traj = cycle.cycle.trajectory;
  record.solution_type = classify(traj);
  record.criteria.max_grf = max_grf(traj);
  record.criteria.avg_velocity = avg_velocity(traj);
  const auto st = touchdown_statistics(traj);
  record.criteria.phi_td1 = st.phi_td1;
  record.criteria.psi_td1 = st.psi_td1;
  const auto stab = stability_eigenvalues(record, p, options);
  record.eigenvalues = stab.eigenvalues;
  record.trivial_eigenvalue = stab.trivial;
  record.criteria.max_abs_eigenvalue = stab.max_abs;
  record.criteria.stable = stab.stable;
  return record;
}

AggregateResult aggregate(const std::vector<FixedPointRecord>& records, double cell_area,
                          const std::vector<SolutionType>& expected_types) {
  struct Group {
    std::vector<double> grf, v, phi, psi;
    int stable = 0;
  };
  std::map<std::pair<double, int>, Group> groups;
  std::vector<double> kappas;
  for (const auto& r : records) {
    auto& g = groups[{r.kappa, static_cast<int>(r.solution_type)}];
    g.grf.push_back(r.criteria.max_grf);
    g.v.push_back(r.criteria.avg_velocity);
    g.phi.push_back(r.criteria.phi_td1);
    g.psi.push_back(r.criteria.psi_td1);
    if (r.criteria.stable) ++g.stable;
    if (std::find(kappas.begin(), kappas.end(), r.kappa) == kappas.end()) {
      kappas.push_back(r.kappa);
    }
  }
  AggregateResult out;
  std::sort(kappas.begin(), kappas.end());
  for (double kappa : kappas) {
    for (SolutionType t : expected_types) {
      if (!groups.count({kappa, static_cast<int>(t)})) {
        std::ostringstream note;
        note << "no " << solution_type_name(t) << " records at kappa=" << kappa;
        out.notes.push_back(note.str());
      }
    }
  }
  for (const auto& [key, g] : groups) {
    AggregateRow row;
    row.kappa = key.first;
    row.type = static_cast<SolutionType>(key.second);
    row.n = static_cast<int>(g.grf.size());
    row.grf_mean = mean(g.grf);
    row.grf_std = pop_std(g.grf, row.grf_mean);
    row.v_mean = mean(g.v);
    row.v_std = pop_std(g.v, row.v_mean);
    row.phi_td1_mean = mean(g.phi);
    row.phi_td1_std = pop_std(g.phi, row.phi_td1_mean);
    row.psi_td1_mean = mean(g.psi);
    row.psi_td1_std = pop_std(g.psi, row.psi_td1_mean);
    row.stable_area = g.stable * cell_area;
    out.rows.push_back(row);
  }
  return out;
}

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << std::setprecision(17);
  out << "kappa,type,n,grf_mean,grf_std,v_mean,v_std,phi_td1_mean,phi_td1_std,psi_td1_mean,"
         "psi_td1_std,stable_area\n";
  for (const auto& r : rows) {
    out << r.kappa << ',' << solution_type_name(r.type) << ',' << r.n << ',' << r.grf_mean << ','
        << r.grf_std << ',' << r.v_mean << ',' << r.v_std << ',' << r.phi_td1_mean << ','
        << r.phi_td1_std << ',' << r.psi_td1_mean << ',' << r.psi_td1_std << ','
        << r.stable_area << '\n';
  }
}

}  // namespace spinebound
