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
#include <vector>

#include "spinebound/model.hpp"

namespace spinebound {

enum class EventKind { Touchdown, Liftoff, Apex, StiffnessSwitch, Fault };

const char* event_kind_name(EventKind kind);

struct GaitEvent {
  double t = 0.0;
  EventKind kind = EventKind::Apex;
  std::optional<Leg> leg;  // set for Touchdown and Liftoff
  std::string reason;      // set for Fault
  double leg_angle = 0.0;  // Touchdown/Liftoff: leg angle at the event, before any swing reset
  HybridState state;       // snapshot after the discrete transition
};

struct Tolerances {
  double rtol = 1e-10;
  double atol = 1e-12;
  double event_value = 1e-13;  // |event function| at which localization stops
  double event_time = 1e-15;   // bracket width at which localization stops [s]
  double min_step = 1e-14;     // below this the step size has underflowed [s]
};

struct SimConfig {
  Tolerances tol;
  double sample_interval = 1e-3;  // also the maximum step size [s]
  double max_time = 2.0;          // horizon for simulate_until_apex [s]
  bool record_samples = true;
};

// Stance bookkeeping for one apex-to-apex return.
struct StanceStructure {
  std::array<int, 2> stances{0, 0};

  bool one_stance_per_leg() const { return stances[0] == 1 && stances[1] == 1; }
};

struct Trajectory {
  std::vector<HybridState> samples;
  std::vector<GaitEvent> events;
  ModelParams params;
  StanceStructure structure;

  double t_start() const { return samples.front().t; }
  double t_end() const { return samples.back().t; }
  bool faulted() const { return !events.empty() && events.back().kind == EventKind::Fault; }
};

// Adaptive Dormand-Prince 5(4) stepper for the hybrid system. Each call to
// step() advances to the end of one accepted step or to the first event
// inside it, whichever comes first; the discrete transition of the event is
// already applied to the returned state.
class HybridIntegrator {
 public:
  HybridIntegrator(ModelParams params, Tolerances tol = {});

  // Apex detection is only performed when detect_apex is set and the body is
  // in full flight.
  std::optional<GaitEvent> step(HybridState& state, double dt_max, bool detect_apex = true);

  double step_size() const { return h_; }
  void set_step_size(double h) { h_ = h; }

 private:
  ModelParams params_;
  Tolerances tol_;
  double h_ = 1e-4;
};

// Single advance of the hybrid state (see HybridIntegrator::step) starting
// from the given step-size guess.
struct StepResult {
  HybridState state;
  std::optional<GaitEvent> event;
};
StepResult integrate_step(const HybridState& state, double dt_max, const Tolerances& tol,
                          const ModelParams& params, double initial_step = 1e-4);

// Fixed-step classical RK4 over smooth dynamics with the given spine branch.
// Test reference only: no event handling.
GenCoords integrate_fixed_step(const GenCoords& q, const ContactMode& mode,
                               const ModelParams& params, double spine_k, double duration,
                               double dt);

// Runs for a fixed duration recording every event, including all apexes.
// Stops early (with a terminal Fault event) if the model faults.
Trajectory simulate(const HybridState& initial, const ModelParams& params, double duration,
                    const SimConfig& config = {});

class SimulationTimeout : public SimulationFault {
 public:
  using SimulationFault::SimulationFault;
};

struct ApexReturn {
  Trajectory trajectory;
  HybridState apex;
};

// Integrates from an apex state until the next apex in full flight that
// follows a completed stance of every leg. Apex crossings before that (e.g.
// the mid-cycle flight of a bound) are not section hits and are not logged.
// Throws SimulationFault on a fault and SimulationTimeout past max_time.
ApexReturn simulate_until_apex(const HybridState& on_section, const ModelParams& params,
                               const SimConfig& config = {});

// Resampled one-cycle profile on percent-of-cycle.
struct ProfileRow {
  double percent = 0.0;
  double t = 0.0;
  GenCoords q;
  std::array<double, 2> psi{};  // NaN when the leg is in swing
  std::array<double, 2> grf{};
};

// Requires samples spanning apex to apex (last event is an Apex at t_end and
// the first sample is in full flight with ydot ~ 0).
std::vector<ProfileRow> gait_cycle_profile(const Trajectory& trajectory, int points = 201);

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);
void write_events_csv(std::ostream& out, const Trajectory& trajectory);
void write_profile_csv(std::ostream& out, const std::vector<ProfileRow>& profile);

}  // namespace spinebound
