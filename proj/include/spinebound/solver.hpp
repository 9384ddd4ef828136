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

#pragma once

#include <array>
#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "spinebound/params.hpp"
#include "spinebound/record.hpp"
#include "spinebound/sim.hpp"

namespace spinebound {

// Reason a section computation did not produce a usable fixed point. Sweeps
// record these as per-cell failure markers.
enum class FailureKind {
  InfeasibleEnergy,
  NewtonDivergence,
  StructureMismatch,
  NonPositivePhi,
  SimulationFault,
  Timeout,
  Consistency,
};

const char* failure_kind_name(FailureKind kind);

class SolverError : public std::runtime_error {
 public:
  SolverError(FailureKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  FailureKind kind() const { return kind_; }

 private:
  FailureKind kind_;
};

using SectionVector = std::array<double, 5>;  // (y, theta, phi, thetadot, phidot)

SectionVector to_vector(const SectionState& z);
SectionState to_section(const SectionVector& v);

// Positive xdot closing the energy budget at apex (ydot = 0, full flight).
// Throws SolverError(InfeasibleEnergy) if the residual kinetic energy is negative.
double close_energy(const SectionState& z, const ModelParams& p);

// Full-flight hybrid state on the section at t = 0, x = 0.
HybridState lift_section(const SectionState& z, const TouchdownAngles& td, const ModelParams& p);

SectionState project_to_section(const HybridState& apex);

struct ReturnResult {
  SectionState next;
  StanceStructure structure;
  ApexReturn cycle;
};

// One application of the Poincare map. Simulation faults and timeouts are
// rethrown as SolverError; the stance structure is reported, not enforced.
ReturnResult return_map(const SectionState& z, const TouchdownAngles& td, const ModelParams& p,
                        const SimConfig& config = {});

struct NewtonOptions {
  double tolerance = 1e-9;  // on the max-norm of return_map(z) - z
  int max_iterations = 50;
  int max_halvings = 8;
  double fd_step = 1e-7;  // forward-difference step, scaled by max(1, |u|)
  SimConfig sim{.record_samples = false};
};

// Unknowns of the shooting problem at fixed (y*, thetadot*).
struct FixedPointGuess {
  double theta = 0.0;
  double phi = 0.0;
  double phidot = 0.0;
  TouchdownAngles td;
};

FixedPointGuess guess_from_record(const FixedPointRecord& record);

// Damped Newton-Raphson on R(theta, phi, phidot, gamma1, gamma2) =
// return_map(z) - z with y* and thetadot* held fixed. The returned record has
// z_star, td_angles, kappa, residual_norm and iterations filled; type,
// criteria and eigenvalues are left for the analysis stage.
FixedPointRecord find_fixed_point(double y_star, double thetadot_star, double kappa,
                                  const FixedPointGuess& guess, const ModelParams& params,
                                  const NewtonOptions& options = {});

struct StabilityOptions {
  double perturbation = 1e-6;       // central-difference step, scaled by max(1, |z|)
  double trivial_tolerance = 1e-3;  // |lambda - 1| bound for the conserved direction
  double stability_margin = 1e-6;
  SimConfig sim{.record_samples = false};
};

struct StabilityResult {
  // Rows/columns ordered (y, theta, phi, xdot, thetadot, phidot).
  std::array<std::array<double, 6>, 6> jacobian{};
  std::vector<std::complex<double>> eigenvalues;
  std::complex<double> trivial;
  double max_abs = 0.0;  // over eigenvalues other than the trivial one
  bool stable = false;
};

// Central-difference Jacobian of the apex map at z* (touchdown angles fixed)
// and its spectrum. The Jacobian is taken on the full apex section
// (y, theta, phi, xdot, thetadot, phidot) without energy closure, so energy
// conservation shows up as one multiplier at 1; the remaining five are the
// multipliers of the energy-restricted map. Throws SolverError(Consistency)
// when no eigenvalue lies within trivial_tolerance of 1.
StabilityResult stability_eigenvalues(const FixedPointRecord& record, const ModelParams& params,
                                      const StabilityOptions& options = {});

// Seed search for scissor-symmetric orbits (theta* = phidot* = 0). Shoots
// half a cycle, apex to the mid-cycle apex over one stance of a single leg,
// and solves theta = phidot = 0 there for (phi*, gamma_first); the trailing
// leg's touchdown angle is the mirror of the leading leg's liftoff angle.
// Only orbits with two flight phases have a mid-cycle apex. Returns nullopt if
// no candidate converges.
struct SeedSearchOptions {
  double phi_min = 0.02, phi_max = 0.8;
  int phi_points = 40;
  double gamma_min = 0.1, gamma_max = 1.4;
  int gamma_points = 40;
  int candidates = 6;  // best scan cells polished by Newton
  double tolerance = 1e-10;
  SimConfig sim{.max_time = 1.0, .record_samples = false};
};

std::optional<FixedPointGuess> symmetric_seed(double y_star, double thetadot_star,
                                              const ModelParams& params,
                                              const SeedSearchOptions& options = {});

}  // namespace spinebound
