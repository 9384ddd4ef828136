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
// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "states.hpp"
#include "spinebound/analysis.hpp"
#include "spinebound/model.hpp"
#include "spinebound/sim.hpp"
#include "spinebound/solver.hpp"
#include "spinebound/sweep.hpp"

using namespace spinebound;

namespace {

const double kSqrt10 = std::sqrt(10.0);

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

int failures = 0;

void report(bool ok, const std::string& name, const std::string& detail) {
  std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int workers() { return std::max(1u, std::thread::hardware_concurrency()); }

struct Solved {
  std::optional<FixedPointRecord> record;
  std::string error;
  double seconds = 0.0;
};

Solved solve(double y, double thd, double kappa) {
  Stopwatch sw;
  Solved out;
  ModelParams p;
  p.kappa = kappa;
  try {
    const auto seed = symmetric_seed(y, thd, p);
    if (!seed) throw std::runtime_error("no symmetric seed");
    out.record = evaluate_record(find_fixed_point(y, thd, kappa, *seed, p), p);
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  out.seconds = sw.seconds();
  return out;
}

std::optional<Leg> first_touchdown(const Trajectory& t) {
  for (const auto& e : t.events) {
    if (e.kind == EventKind::Touchdown) return e.leg;
  }
  return std::nullopt;
}

Trajectory cycle(const FixedPointRecord& r) {
  ModelParams p;
  p.kappa = r.kappa;
  return return_map(r.z_star, r.td_angles, p).cycle.trajectory;
}

void energy(const FixedPointRecord& a2) {
  Stopwatch sw;
  const Trajectory cyc = cycle(a2);
  const double t = sw.seconds();
  double worst = 0.0;
  for (const auto& s : cyc.samples) {
    worst = std::max(worst, std::abs(total_energy(s, cyc.params) - 4500.0) / 4500.0);
  }
  for (const auto& e : cyc.events) {
    worst = std::max(worst, std::abs(total_energy(e.state, cyc.params) - 4500.0) / 4500.0);
  }
  report(!cyc.faulted() && worst < 1e-6 && t < 1.0, "energy-conservation",
         fmt("max |E-4500|/4500 = %.3e over %zu samples and %zu events (< 1e-6), %.3f s (< 1 s)",
             worst, cyc.samples.size(), cyc.events.size(), t));
}

void ballistic() {
  const ModelParams p;
  HybridState s0;
  s0.q.y = 10.0;
  s0.q.xdot = 15.0;
  s0.q.ydot = 1.0;
  s0.q.thetadot = 2.0;
  s0.mode.td_angle = {std::numbers::pi / 2, -std::numbers::pi / 2};
  const Trajectory traj = simulate(s0, p, 0.5);
  auto rel = [](double got, double want) {
    return std::abs(got - want) / std::max(std::abs(want), 1.0);
  };
  double worst = 0.0;
  for (const auto& s : traj.samples) {
    const double t = s.t;
    worst = std::max({worst, rel(s.q.x, s0.q.xdot * t), rel(s.q.xdot, s0.q.xdot),
                      rel(s.q.y, s0.q.y + s0.q.ydot * t - 0.5 * p.g * t * t),
                      rel(s.q.ydot, s0.q.ydot - p.g * t), rel(s.q.theta, s0.q.thetadot * t),
                      rel(s.q.thetadot, s0.q.thetadot), rel(s.q.phi, 0.0)});
  }
  const bool full = std::abs(traj.t_end() - 0.5) < 1e-12;
  report(!traj.faulted() && full && worst < 1e-8, "ballistic-oracle",
         fmt("max relative error %.3e over %.3f s (< 1e-8)", worst, traj.t_end()));
}

void derivatives() {
  double grad_worst = 0.0;
  {
    const ModelParams p;
    std::mt19937_64 rng(13);
    for (int n = 0; n < 1000; ++n) {
      const auto rs = states::random_state(rng, p, true, true);
      for (Leg leg : kLegs) {
        const double toe = *rs.stance.toe[index(leg)];
        const auto g = leg_length_gradient(rs.state.q, toe, leg, p);
        const oracle::Vec4 x0 = oracle::positions(rs.state.q);
        const oracle::Vec4 v0 = oracle::velocities(rs.state.q);
        oracle::Vec4 fd, an;
        for (int i = 0; i < 4; ++i) {
          oracle::Vec4 e = oracle::Vec4::Zero();
          e[i] = 1.0;
          const double h = 1e-7;
          const double lp =
              oracle::leg_length(oracle::with(rs.state.q, x0 + h * e, v0), toe, leg, p);
          const double lm =
              oracle::leg_length(oracle::with(rs.state.q, x0 - h * e, v0), toe, leg, p);
          fd[i] = (lp - lm) / (2 * h);
          an[i] = g[i];
        }
        grad_worst = std::max(grad_worst, states::rel_err(an, fd));
      }
    }
  }
  double dyn_worst = 0.0;
  {
    ModelParams p;
    p.kappa = 3.0;
    std::mt19937_64 rng(14);
    for (int n = 0; n < 100; ++n) {
      const int pattern = n % 4;
      const auto rs = states::random_state(rng, p, pattern & 1, pattern & 2);
      const auto acc = dynamics(rs.state, p);
      const oracle::Vec4 got{acc.xddot, acc.yddot, acc.thetaddot, acc.phiddot};
      dyn_worst = std::max(
          dyn_worst, states::rel_err(got, oracle::lagrange_accelerations(rs.state.q, rs.stance, p)));
    }
  }
  report(grad_worst < 1e-5 && dyn_worst < 1e-6, "derivative-oracle",
         fmt("leg gradient %.3e on 1000 stance states (< 1e-5), dynamics %.3e on 100 states (< "
             "1e-6)",
             grad_worst, dyn_worst));
}

bool fixed_point(const Solved& s, const char* label, SolutionType want, Leg lead) {
  if (!s.record) {
    report(false, std::string("fixed-point-") + label, "no solution: " + s.error);
    return false;
  }
  const auto& r = *s.record;
  const auto first = first_touchdown(cycle(r));
  const bool ok = r.residual_norm < 1e-9 && r.solution_type == want && first == lead &&
                  std::abs(r.z_star.theta) < 1e-6 && std::abs(r.z_star.phidot) < 1e-6 &&
                  s.seconds < 30.0;
  report(ok, std::string("fixed-point-") + label,
         fmt("y*=%.2f thetadot*=%+.1f kappa=sqrt(10): |R|=%.2e (< 1e-9), type %s (want %s), first "
             "touchdown %s (want %s), |theta*|=%.1e |phidot*|=%.1e (< 1e-6), %.2f s (< 30 s)",
             r.y_star, r.thetadot_star, r.residual_norm, solution_type_name(r.solution_type),
             solution_type_name(want), first ? leg_name(*first) : "none", leg_name(lead),
             std::abs(r.z_star.theta), std::abs(r.z_star.phidot), s.seconds));
  return ok;
}

int trivial_count(const FixedPointRecord& r) {
  return static_cast<int>(std::count_if(r.eigenvalues.begin(), r.eigenvalues.end(),
                                        [](const auto& l) { return std::abs(l - 1.0) < 1e-3; }));
}

bool is_eg_ge(SolutionType t) { return t == SolutionType::EG || t == SolutionType::GE; }

}  // namespace

int main() {
  std::printf("acceptance run with %d worker(s)\n", workers());

  const Solved a2 = solve(0.67, -1.0, kSqrt10);
  const Solved b2 = solve(0.67, 1.0, kSqrt10);

  if (a2.record) {
    energy(*a2.record);
  } else {
    report(false, "energy-conservation", "a2 did not converge: " + a2.error);
  }
  ballistic();
  derivatives();
  const bool have_a2 = fixed_point(a2, "a2", SolutionType::EG, Leg::Fore);
  const bool have_b2 = fixed_point(b2, "b2", SolutionType::GE, Leg::Hind);

  // Continuation of a2 and b2.
  Stopwatch cont_sw;
  ModelParams base;
  ContinuationOptions copt;
  copt.workers = workers();
  const std::vector<double> samples{1.0, 2.0, kSqrt10, 5.0, 10.0};
  const auto tracks =
      run_continuation({named_anchor("a2"), named_anchor("b2")}, samples, base, copt);
  const double cont_seconds = cont_sw.seconds();

  // Sweep.
  Stopwatch sweep_sw;
  SweepConfig sc;
  sc.y_range = {0.60, 0.72, 21};
  sc.thetadot_range = {-3.0, 3.0, 41};
  sc.kappa_list = {1.0, kSqrt10, 10.0};
  sc.worker_count = workers();
  const SweepResult sweep = run_grid_sweep(sc, base);
  const double sweep_seconds = sweep_sw.seconds();

  // Trivial multiplier over every converged record.
  {
    std::vector<FixedPointRecord> all = sweep.records();
    for (const auto& tr : tracks) {
      for (const auto& pt : tr.points) {
        if (pt.record) all.push_back(*pt.record);
      }
    }
    for (const auto* s : {&a2, &b2}) {
      if (s->record) all.push_back(*s->record);
    }
    int bad = 0;
    double worst = 0.0;
    std::string offenders;
    for (const auto& r : all) {
      if (trivial_count(r) != 1) {
        ++bad;
        offenders += fmt(" [kappa=%.4g y*=%.3f thetadot*=%+.2f %s: %d]", r.kappa, r.y_star,
                         r.thetadot_star, solution_type_name(r.solution_type), trivial_count(r));
      }
      if (r.trivial_eigenvalue) worst = std::max(worst, std::abs(*r.trivial_eigenvalue - 1.0));
    }
    int missing = 0;
    for (const auto& ks : sweep.sweeps) {
      for (const auto& c : ks.cells) {
        if (c.status == CellStatus::Failed &&
            c.message.find("Floquet multiplier") != std::string::npos) {
          ++missing;
        }
      }
    }
    report(!all.empty() && bad == 0 && missing == 0, "trivial-eigenvalue",
           fmt("%zu converged records, %d without exactly one multiplier within 1e-3 of 1, %d "
               "orbits rejected for lacking one; worst |lambda_trivial - 1| = %.2e",
               all.size(), bad, missing, worst) +
               offenders);

    double vmin = 1e300, vmax = -1e300;
    int outside = 0;
    for (const auto& r : all) {
      vmin = std::min(vmin, r.criteria.avg_velocity);
      vmax = std::max(vmax, r.criteria.avg_velocity);
      if (std::abs(r.criteria.avg_velocity - 18.0) > 3.0) ++outside;
    }
    report(!all.empty() && outside == 0, "velocity-scale",
           fmt("avg_velocity in [%.3f, %.3f] m/s over %zu records, %d outside 18 +- 3", vmin,
               vmax, all.size(), outside));
  }

  // Orderings.
  {
    bool ok = have_a2 && have_b2;
    std::ostringstream d;
    if (ok) {
      const auto& ra = a2.record->criteria;
      const auto& rb = b2.record->criteria;
      ok = ra.max_grf < rb.max_grf && ra.avg_velocity > rb.avg_velocity;
      d << fmt("kappa=sqrt(10): max_grf a2 %.1f < b2 %.1f, avg_velocity a2 %.4f > b2 %.4f; ",
               ra.max_grf, rb.max_grf, ra.avg_velocity, rb.avg_velocity);
    }
    std::map<std::string, std::optional<std::pair<double, double>>> loss;
    for (const auto& tr : tracks) {
      std::vector<double> grf;
      for (double k : samples) {
        const auto it = std::find_if(tr.points.begin(), tr.points.end(),
                                     [&](const TrackPoint& pt) { return pt.kappa == k; });
        if (it == tr.points.end() || !it->record) {
          ok = false;
          d << tr.label << " missing at kappa=" << k << "; ";
          continue;
        }
        grf.push_back(it->record->criteria.max_grf);
      }
      d << tr.label << " max_grf";
      for (double g : grf) d << fmt(" %.1f", g);
      for (std::size_t i = 1; i < grf.size(); ++i) {
        if (!(grf[i] < grf[i - 1])) ok = false;
      }
      loss[tr.label] = tr.stability_loss();
      if (loss[tr.label]) {
        d << fmt(", loses stability in (%.4f, %.4f); ", loss[tr.label]->first,
                 loss[tr.label]->second);
      } else {
        d << ", no stability loss in [1, 10]; ";
      }
    }
    // A track that never loses stability on [1, 10] loses it beyond 10.
    const double a_loss = loss["a2"] ? loss["a2"]->first : 1e300;
    const bool b_first = loss["b2"] && loss["b2"]->second <= a_loss;
    ok = ok && b_first && cont_seconds < 600.0;
    d << fmt("continuation %.1f s (< 600 s)", cont_seconds);
    report(ok, "ordering", d.str());
  }

  // Sweep map.
  {
    using Counts = std::map<SolutionType, int>;
    std::vector<Counts> counts;
    std::vector<int> stable;
    bool separated = true, ee_only_1 = true, e_small = true, each_has_both = true;
    std::ostringstream d;
    for (const auto& ks : sweep.sweeps) {
      Counts c;
      int st = 0, eg_wrong = 0, ge_wrong = 0, ee = 0;
      double e_sum = 0.0, g_sum = 0.0;
      int e_n = 0, g_n = 0;
      for (const auto& cell : ks.cells) {
        if (!cell.record) continue;
        const auto& r = *cell.record;
        ++c[r.solution_type];
        if (r.criteria.stable) ++st;
        const double td = r.thetadot_star;
        if (r.solution_type == SolutionType::EG && !(td < 0)) ++eg_wrong;
        if (r.solution_type == SolutionType::GE && !(td > 0)) ++ge_wrong;
        if (r.solution_type == SolutionType::EE) ++ee;
        if (r.solution_type == SolutionType::E) e_sum += std::abs(td), ++e_n;
        if (is_eg_ge(r.solution_type)) g_sum += std::abs(td), ++g_n;
      }
      const bool k1 = std::abs(ks.kappa - 1.0) < 1e-12;
      if (eg_wrong || ge_wrong) separated = false;
      if (!k1 && ee > 0) ee_only_1 = false;
      if (k1 && ee == 0) ee_only_1 = false;
      const double e_mean = e_n ? e_sum / e_n : 0.0, g_mean = g_n ? g_sum / g_n : 0.0;
      if (!(e_n > 0 && g_n > 0 && e_mean < g_mean)) e_small = false;
      if (!(c[SolutionType::EG] > 0 && c[SolutionType::GE] > 0)) each_has_both = false;
      stable.push_back(st);
      d << fmt("kappa=%.4g: EG %d GE %d EE %d E %d other %d, stable %d, EG at thetadot>=0 %d, "
               "GE at thetadot<=0 %d, mean |thetadot*| E %.3f vs EG/GE %.3f; ",
               ks.kappa, c[SolutionType::EG], c[SolutionType::GE], ee, c[SolutionType::E],
               c[SolutionType::Other], st, eg_wrong, ge_wrong, e_mean, g_mean);
    }
    bool decreasing = stable.size() == 3;
    for (std::size_t i = 1; i < stable.size(); ++i) {
      if (!(stable[i] < stable[i - 1])) decreasing = false;
    }
    std::printf("sweep 21x41 at kappa {1, sqrt(10), 10}: %s%.1f s\n", d.str().c_str(),
                sweep_seconds);
    report(separated && each_has_both, "sweep-eg-ge-separated-by-thetadot-sign",
           separated ? "EG only at thetadot* < 0 and GE only at thetadot* > 0"
                     : "EG/GE found on the wrong side of thetadot* = 0");
    report(ee_only_1, "sweep-ee-only-at-kappa-1",
           ee_only_1 ? "EE cells present at kappa=1 only" : "EE cells counted per kappa above");
    report(e_small, "sweep-e-at-small-thetadot",
           "E cells present at every kappa with mean |thetadot*| below that of EG/GE cells");
    report(decreasing, "sweep-stable-area-decreasing",
           fmt("stable cells %d, %d, %d (cell area %.4g)", stable.size() > 0 ? stable[0] : -1,
               stable.size() > 1 ? stable[1] : -1, stable.size() > 2 ? stable[2] : -1,
               sweep.cell_area()));
    report(sweep_seconds < 1800.0, "sweep-runtime", fmt("%.1f s (< 1800 s)", sweep_seconds));
  }

  // Touchdown statistics.
  {
    bool ok = true;
    std::ostringstream d;
    for (const auto& ks : sweep.sweeps) {
      double phi[2] = {0, 0}, psi[2] = {0, 0};
      int n[2] = {0, 0};
      for (const auto& cell : ks.cells) {
        if (!cell.record || !is_eg_ge(cell.record->solution_type)) continue;
        const int g = cell.record->solution_type == SolutionType::EG ? 0 : 1;
        phi[g] += cell.record->criteria.phi_td1;
        psi[g] += cell.record->criteria.psi_td1;
        ++n[g];
      }
      if (!n[0] || !n[1]) {
        ok = false;
        d << fmt("kappa=%.4g: EG %d GE %d records; ", ks.kappa, n[0], n[1]);
        continue;
      }
      for (int g = 0; g < 2; ++g) phi[g] /= n[g], psi[g] /= n[g];
      const double h = std::numbers::pi / 2;
      const bool k_ok =
          std::abs(phi[0]) < std::abs(phi[1]) && std::abs(psi[0] - h) < std::abs(psi[1] - h);
      ok = ok && k_ok;
      d << fmt("kappa=%.4g: mean phi_td1 EG %+.4f GE %+.4f, mean psi_td1 EG %.4f GE %.4f; ",
               ks.kappa, phi[0], phi[1], psi[0], psi[1]);
    }
    report(ok, "touchdown-statistics", d.str());
  }

  std::printf("%d criterion line(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
