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
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spinebound/record.hpp"
#include "spinebound/sim.hpp"
#include "spinebound/solver.hpp"

namespace spinebound {

struct ClassifierOptions {
  double min_flight = 1e-4;     // shorter flights are grazing contacts [s]
  double min_extremum = 1e-4;   // |phi| an extremum must exceed [rad]
  double periodicity = 1e-6;    // end-to-start mismatch allowed (all but x)
};

// One full-flight phase of a periodic cycle.
struct FlightPhase {
  double duration = 0.0;
  double phi_extremum = 0.0;
  std::optional<Leg> preceded_by;  // leg whose liftoff opened the flight
};

// Flight phases of a one-period trajectory, treating the cycle as periodic
// (a flight cut by the trajectory ends is merged into one).
std::vector<FlightPhase> flight_phases(const Trajectory& trajectory,
                                       const ClassifierOptions& options = {});

// Throws std::invalid_argument if the trajectory does not close on itself.
SolutionType classify(const Trajectory& trajectory, const ClassifierOptions& options = {});

double max_grf(const Trajectory& trajectory);

// (x(T) - x(0)) / T; throws std::invalid_argument for a zero-length trajectory.
double avg_velocity(const Trajectory& trajectory);

struct TouchdownStatistics {
  double phi_td1 = 0.0;
  double psi_td1 = 0.0;
  double psi_lo1 = 0.0;
  double psi_td2 = 0.0;
  double psi_lo2 = 0.0;
  // (min, max) of psi_i over the stance of leg i.
  std::array<std::pair<double, double>, 2> psi_range{};
};

// Throws std::invalid_argument if the trajectory has no complete fore stance.
TouchdownStatistics touchdown_statistics(const Trajectory& trajectory);

// Mirror image in x: fore and hind swap, theta and the leg angles flip sign.
// A forward-running orbit becomes a backward-running one.
Trajectory mirror_trajectory(const Trajectory& trajectory);

// Simulates the cycle of a converged record and fills in solution type,
// criteria and Floquet multipliers.
FixedPointRecord evaluate_record(FixedPointRecord record, const ModelParams& params,
                                 const StabilityOptions& options = {});

struct AggregateRow {
  double kappa = 0.0;
  SolutionType type = SolutionType::Other;
  int n = 0;
  double grf_mean = 0.0, grf_std = 0.0;
  double v_mean = 0.0, v_std = 0.0;
  double phi_td1_mean = 0.0, phi_td1_std = 0.0;
  double psi_td1_mean = 0.0, psi_td1_std = 0.0;
  double stable_area = 0.0;
};

struct AggregateResult {
  std::vector<AggregateRow> rows;
  std::vector<std::string> notes;
};

// Population mean/std per (kappa, type) and stable-region area counted as
// stable cells times cell_area. Groups listed in `expected_types` that have no
// records for a kappa are reported in notes instead of as NaN rows.
AggregateResult aggregate(const std::vector<FixedPointRecord>& records, double cell_area,
                          const std::vector<SolutionType>& expected_types = {});

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows);

}  // namespace spinebound
