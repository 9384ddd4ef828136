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

#include "spinebound/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

namespace spinebound {
namespace {

using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat5 = Eigen::Matrix<double, 5, 5>;

double max_norm(const Vec5& v) { return v.cwiseAbs().maxCoeff(); }

Vec5 to_eigen(const SectionVector& v) { return Vec5(v.data()); }

// Unknown vector u = (theta, phi, phidot, gamma_fore, gamma_hind).
Vec5 pack_guess(const FixedPointGuess& g) {
  Vec5 u;
  u << g.theta, g.phi, g.phidot, g.td.fore, g.td.hind;
  return u;
}

struct Evaluation {
  Vec5 residual;
  StanceStructure structure;
};

Evaluation shooting_residual(double y_star, double thetadot_star, const Vec5& u,
                             const ModelParams& p, const SimConfig& sim) {
  const SectionState z{y_star, u[0], u[1], thetadot_star, u[2]};
  const ReturnResult r = return_map(z, {u[3], u[4]}, p, sim);
  return {to_eigen(to_vector(r.next)) - to_eigen(to_vector(z)), r.structure};
}

FailureKind classify_exception(const SimulationFault& e) {
  return dynamic_cast<const SimulationTimeout*>(&e) ? FailureKind::Timeout
                                                    : FailureKind::SimulationFault;
}

}  // namespace

const char* failure_kind_name(FailureKind kind) {
  switch (kind) {
    case FailureKind::InfeasibleEnergy:
      return "infeasible_energy";
    case FailureKind::NewtonDivergence:
      return "newton_divergence";
    case FailureKind::StructureMismatch:
      return "structure_mismatch";
    case FailureKind::NonPositivePhi:
      return "non_positive_phi";
    case FailureKind::SimulationFault:
      return "simulation_fault";
    case FailureKind::Timeout:
      return "timeout";
    case FailureKind::Consistency:
      return "consistency";
  }
  return "unknown";
}

SectionVector to_vector(const SectionState& z) {
  return {z.y, z.theta, z.phi, z.thetadot, z.phidot};
}

SectionState to_section(const SectionVector& v) { return {v[0], v[1], v[2], v[3], v[4]}; }

double close_energy(const SectionState& z, const ModelParams& p) {
  const double cp = std::cos(z.phi), sp = std::sin(z.phi);
  const double mr2 = p.m * p.r * p.r;
  const double residual = p.E - 2.0 * p.m * p.g * z.y -
                          2.0 * spine_stiffness(z.phi, p) * z.phi * z.phi -
                          (p.J + mr2 * cp * cp) * z.thetadot * z.thetadot -
                          (p.J + mr2 * sp * sp) * z.phidot * z.phidot;
  if (residual < 0.0 || !std::isfinite(residual)) {
    throw SolverError(FailureKind::InfeasibleEnergy,
                      "section state exceeds the energy budget by " +
                          std::to_string(-residual) + " J");
  }
  return std::sqrt(residual / p.m);
}

HybridState lift_section(const SectionState& z, const TouchdownAngles& td, const ModelParams& p) {
  HybridState s;
  s.q.y = z.y;
  s.q.theta = z.theta;
  s.q.phi = z.phi;
  s.q.thetadot = z.thetadot;
  s.q.phidot = z.phidot;
  s.q.xdot = close_energy(z, p);
  s.mode.td_angle = {td.fore, td.hind};
  return s;
}

SectionState project_to_section(const HybridState& apex) {
  return {apex.q.y, apex.q.theta, apex.q.phi, apex.q.thetadot, apex.q.phidot};
}

ReturnResult return_map(const SectionState& z, const TouchdownAngles& td, const ModelParams& p,
                        const SimConfig& config) {
  const HybridState start = lift_section(z, td, p);
  try {
    ReturnResult r;
    r.cycle = simulate_until_apex(start, p, config);
    r.structure = r.cycle.trajectory.structure;
    r.next = project_to_section(r.cycle.apex);
    return r;
  } catch (const SimulationFault& e) {
    throw SolverError(classify_exception(e), e.what());
  }
}

FixedPointGuess guess_from_record(const FixedPointRecord& record) {
  return {record.z_star.theta, record.z_star.phi, record.z_star.phidot, record.td_angles};
}

FixedPointRecord find_fixed_point(double y_star, double thetadot_star, double kappa,
                                  const FixedPointGuess& guess, const ModelParams& params,
                                  const NewtonOptions& options) {
  ModelParams p = params;
  p.kappa = kappa;
  p.validate();

  Vec5 u = pack_guess(guess);
  // Feasibility of the starting point is checked before any simulation.
  close_energy({y_star, u[0], u[1], thetadot_star, u[2]}, p);

  auto evaluate = [&](const Vec5& at) -> std::optional<Evaluation> {
    try {
      auto e = shooting_residual(y_star, thetadot_star, at, p, options.sim);
      if (!e.residual.allFinite()) return std::nullopt;
      return e;
    } catch (const SolverError&) {
      return std::nullopt;
    }
  };

  Evaluation current = shooting_residual(y_star, thetadot_star, u, p, options.sim);
  double norm = max_norm(current.residual);
  int iteration = 0;
  while (!(norm < options.tolerance)) {
    if (iteration >= options.max_iterations) {
      throw SolverError(FailureKind::NewtonDivergence,
                        "no convergence after " + std::to_string(iteration) +
                            " iterations, |R| = " + std::to_string(norm));
    }
    ++iteration;

    Mat5 jac;
    for (int j = 0; j < 5; ++j) {
      const double h = options.fd_step * std::max(1.0, std::abs(u[j]));
      Vec5 shifted = u;
      shifted[j] += h;
      auto e = evaluate(shifted);
      double step = h;
      if (!e) {
        shifted[j] = u[j] - h;
        e = evaluate(shifted);
        step = -h;
      }
      if (!e) {
        throw SolverError(FailureKind::SimulationFault,
                          "return map failed while building the Newton Jacobian");
      }
      jac.col(j) = (e->residual - current.residual) / step;
    }

    const Vec5 delta = jac.fullPivLu().solve(-current.residual);
    if (!delta.allFinite()) {
      throw SolverError(FailureKind::NewtonDivergence, "singular Newton Jacobian");
    }

    bool accepted = false;
    double lambda = 1.0;
    for (int halving = 0; halving <= options.max_halvings; ++halving, lambda *= 0.5) {
      const Vec5 trial = u + lambda * delta;
      auto e = evaluate(trial);
      if (!e) continue;
      const double trial_norm = max_norm(e->residual);
      if (trial_norm < norm) {
        u = trial;
        current = *e;
        norm = trial_norm;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      throw SolverError(FailureKind::NewtonDivergence,
                        "line search failed at |R| = " + std::to_string(norm));
    }
  }

  if (!current.structure.one_stance_per_leg()) {
    throw SolverError(FailureKind::StructureMismatch,
                      "converged orbit has " + std::to_string(current.structure.stances[0]) +
                          " fore and " + std::to_string(current.structure.stances[1]) +
                          " hind stances");
  }
  if (!(u[1] > 0.0)) {
    throw SolverError(FailureKind::NonPositivePhi, "converged to phi* <= 0");
  }

  FixedPointRecord record;
  record.y_star = y_star;
  record.thetadot_star = thetadot_star;
  record.z_star = {y_star, u[0], u[1], thetadot_star, u[2]};
  record.td_angles = {u[3], u[4]};
  record.kappa = kappa;
  record.residual_norm = norm;
  record.iterations = iteration;
  return record;
}

StabilityResult stability_eigenvalues(const FixedPointRecord& record, const ModelParams& params,
                                      const StabilityOptions& options) {
  using Vec6 = Eigen::Matrix<double, 6, 1>;
  using Mat6 = Eigen::Matrix<double, 6, 6>;
  ModelParams p = params;
  p.kappa = record.kappa;
  const HybridState base = lift_section(record.z_star, record.td_angles, p);

  auto pack = [](const GenCoords& q) {
    Vec6 w;
    w << q.y, q.theta, q.phi, q.xdot, q.thetadot, q.phidot;
    return w;
  };
  auto map = [&](const Vec6& w) {
    HybridState s = base;
    s.q.y = w[0];
    s.q.theta = w[1];
    s.q.phi = w[2];
    s.q.xdot = w[3];
    s.q.thetadot = w[4];
    s.q.phidot = w[5];
    try {
      return pack(simulate_until_apex(s, p, options.sim).apex.q);
    } catch (const SimulationFault& e) {
      throw SolverError(classify_exception(e), e.what());
    }
  };

  const Vec6 w0 = pack(base.q);
  StabilityResult out;
  Mat6 jac;
  for (int j = 0; j < 6; ++j) {
    const double h = options.perturbation * std::max(1.0, std::abs(w0[j]));
    Vec6 plus = w0, minus = w0;
    plus[j] += h;
    minus[j] -= h;
    jac.col(j) = (map(plus) - map(minus)) / (2.0 * h);
  }
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) out.jacobian[i][j] = jac(i, j);
  }

  Eigen::EigenSolver<Mat6> solver(jac, false);
  if (solver.info() != Eigen::Success) {
    throw SolverError(FailureKind::Consistency, "eigen-decomposition failed");
  }
  const auto values = solver.eigenvalues();
  out.eigenvalues.assign(values.data(), values.data() + values.size());
  std::sort(out.eigenvalues.begin(), out.eigenvalues.end(),
            [](const auto& a, const auto& b) {
              if (std::abs(a) != std::abs(b)) return std::abs(a) > std::abs(b);
              return a.imag() > b.imag();
            });

  std::size_t trivial = 0;
  for (std::size_t i = 1; i < out.eigenvalues.size(); ++i) {
    if (std::abs(out.eigenvalues[i] - 1.0) < std::abs(out.eigenvalues[trivial] - 1.0)) {
      trivial = i;
    }
  }
  out.trivial = out.eigenvalues[trivial];
  if (!(std::abs(out.trivial - 1.0) < options.trivial_tolerance)) {
    throw SolverError(FailureKind::Consistency,
                      "no Floquet multiplier within tolerance of 1 (closest |lambda - 1| = " +
                          std::to_string(std::abs(out.trivial - 1.0)) + ")");
  }
  for (std::size_t i = 0; i < out.eigenvalues.size(); ++i) {
    if (i != trivial) out.max_abs = std::max(out.max_abs, std::abs(out.eigenvalues[i]));
  }
  out.stable = out.max_abs <= 1.0 + options.stability_margin;
  return out;
}

namespace {

// Swing angle putting the foot level with its root, so the leg cannot land.
constexpr double kTuckedAngle = std::numbers::pi / 2.0;

struct HalfShot {
  double theta = 0.0;
  double phidot = 0.0;
  double liftoff_angle = 0.0;
};

std::optional<HalfShot> half_shot(double y_star, double thetadot_star, double phi, Leg lead,
                                  double gamma, const ModelParams& p, const SimConfig& sim) {
  TouchdownAngles td{kTuckedAngle, kTuckedAngle};
  (lead == Leg::Fore ? td.fore : td.hind) = gamma;
  HybridState s;
  try {
    s = lift_section({y_star, 0.0, phi, thetadot_star, 0.0}, td, p);
  } catch (const SolverError&) {
    return std::nullopt;
  }
  HybridIntegrator integrator(p, sim.tol);
  bool lifted = false;
  int touchdowns = 0;
  HalfShot out;
  while (s.t < sim.max_time) {
    auto ev = integrator.step(s, sim.sample_interval, lifted);
    if (!ev) continue;
    switch (ev->kind) {
      case EventKind::Fault:
        return std::nullopt;
      case EventKind::Touchdown:
        if (*ev->leg != lead || ++touchdowns > 1) return std::nullopt;
        break;
      case EventKind::Liftoff:
        lifted = true;
        out.liftoff_angle = ev->leg_angle;
        break;
      case EventKind::Apex:
        out.theta = s.q.theta;
        out.phidot = s.q.phidot;
        return out;
      default:
        break;
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<FixedPointGuess> symmetric_seed(double y_star, double thetadot_star,
                                              const ModelParams& params,
                                              const SeedSearchOptions& options) {
  struct Candidate {
    double score;
    Leg lead;
    double phi;
    double gamma;
  };
  std::vector<Candidate> scan;
  for (Leg lead : kLegs) {
    for (int i = 0; i < options.phi_points; ++i) {
      const double phi = options.phi_min + (options.phi_max - options.phi_min) * i /
                                               std::max(1, options.phi_points - 1);
      for (int j = 0; j < options.gamma_points; ++j) {
        const double gamma = options.gamma_min + (options.gamma_max - options.gamma_min) * j /
                                                     std::max(1, options.gamma_points - 1);
        auto shot = half_shot(y_star, thetadot_star, phi, lead, gamma, params, options.sim);
        if (!shot) continue;
        // phidot is ~30x more sensitive than theta; weight so both count.
        const double score = std::hypot(shot->theta, shot->phidot / 30.0);
        scan.push_back({score, lead, phi, gamma});
      }
    }
  }
  std::sort(scan.begin(), scan.end(), [](const Candidate& a, const Candidate& b) {
    return a.score < b.score;
  });

  const int n = std::min<int>(options.candidates, static_cast<int>(scan.size()));
  for (int c = 0; c < n; ++c) {
    const Leg lead = scan[static_cast<std::size_t>(c)].lead;
    double phi = scan[static_cast<std::size_t>(c)].phi;
    double gamma = scan[static_cast<std::size_t>(c)].gamma;
    auto residual = [&](double ph, double ga) -> std::optional<std::pair<Eigen::Vector2d, double>> {
      auto shot = half_shot(y_star, thetadot_star, ph, lead, ga, params, options.sim);
      if (!shot) return std::nullopt;
      return std::make_pair(Eigen::Vector2d(shot->theta, shot->phidot), shot->liftoff_angle);
    };
    auto cur = residual(phi, gamma);
    for (int it = 0; cur && it < 30; ++it) {
      if (cur->first.cwiseAbs().maxCoeff() < options.tolerance) {
        if (phi <= 0.0) break;
        FixedPointGuess g;
        g.phi = phi;
        TouchdownAngles td;
        (lead == Leg::Fore ? td.fore : td.hind) = gamma;
        (lead == Leg::Fore ? td.hind : td.fore) = -cur->second;
        g.td = td;
        return g;
      }
      Eigen::Matrix2d jac;
      const double h = 1e-7;
      auto dp = residual(phi + h, gamma);
      auto dg = residual(phi, gamma + h);
      if (!dp || !dg) break;
      jac.col(0) = (dp->first - cur->first) / h;
      jac.col(1) = (dg->first - cur->first) / h;
      const Eigen::Vector2d delta = jac.fullPivLu().solve(-cur->first);
      if (!delta.allFinite()) break;
      bool accepted = false;
      double lambda = 1.0;
      for (int k = 0; k < 10; ++k, lambda *= 0.5) {
        auto trial = residual(phi + lambda * delta[0], gamma + lambda * delta[1]);
        if (trial && trial->first.norm() < cur->first.norm()) {
          phi += lambda * delta[0];
          gamma += lambda * delta[1];
          cur = trial;
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
    }
  }
  return std::nullopt;
}

}  // namespace spinebound
