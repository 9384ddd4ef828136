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
#include <optional>
#include <stdexcept>
#include <string>

#include "spinebound/params.hpp"

namespace spinebound {

enum class Leg { Fore = 0, Hind = 1 };
inline constexpr std::array<Leg, 2> kLegs{Leg::Fore, Leg::Hind};

constexpr std::size_t index(Leg leg) { return static_cast<std::size_t>(leg); }
constexpr Leg other(Leg leg) { return leg == Leg::Fore ? Leg::Hind : Leg::Fore; }

// Maps the 1-based leg numbering (1 = fore, 2 = hind) onto Leg.
Leg leg_from_number(int number);
int leg_number(Leg leg);
const char* leg_name(Leg leg);

enum class LegPhase { Swing, Stance };

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

// Generalized coordinates q = (x, y, theta, phi) and their rates. theta is the
// mean pitch of the two segments, phi half their relative pitch (phi > 0 is
// the extended, V-shaped spine).
struct GenCoords {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double phi = 0.0;
  double xdot = 0.0;
  double ydot = 0.0;
  double thetadot = 0.0;
  double phidot = 0.0;

  bool operator==(const GenCoords&) const = default;
};

// Discrete part of the hybrid state. toe_x[i] is engaged iff leg i is in
// stance; td_angle[i] is the swing posture (CCW from vertical-down).
struct ContactMode {
  std::array<LegPhase, 2> phase{LegPhase::Swing, LegPhase::Swing};
  std::array<std::optional<double>, 2> toe_x{};
  std::array<double, 2> td_angle{0.0, 0.0};

  bool in_stance(Leg leg) const { return phase[index(leg)] == LegPhase::Stance; }
  bool full_flight() const { return !in_stance(Leg::Fore) && !in_stance(Leg::Hind); }

  void touch_down(Leg leg, double toe);
  void lift_off(Leg leg);

  bool operator==(const ContactMode&) const = default;
};

struct HybridState {
  double t = 0.0;
  GenCoords q;
  ContactMode mode;
};

// Raised when the body reaches a configuration the model cannot continue
// from (leg compressed to zero length, COM on the ground, step underflow).
class SimulationFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Asymmetric torsional spring: kappa*k0 in extension (phi > 0),
// k0 otherwise.
double spine_stiffness(double phi, const ModelParams& p);

// Leg root relative to the COM, and its partials with respect to theta and
// phi. Offsets do not depend on (x, y).
struct RootKinematics {
  Vec2 offset;
  Vec2 d_theta;
  Vec2 d_phi;
};
RootKinematics leg_root_kinematics(double theta, double phi, Leg leg, const ModelParams& p);

Vec2 leg_root_position(const GenCoords& q, Leg leg, const ModelParams& p);
Vec2 leg_root_velocity(const GenCoords& q, Leg leg, const ModelParams& p);

struct LegGeometry {
  double length = 0.0;
  double angle = 0.0;  // CCW from vertical-down
};

// Swing legs report (l0, td_angle); stance legs the root-to-toe vector.
LegGeometry leg_length_and_angle(const HybridState& s, Leg leg, const ModelParams& p);

// Foot position: pinned toe in stance, root + l0 (sin g, -cos g) in swing.
Vec2 foot_position(const HybridState& s, Leg leg, const ModelParams& p);

// d/dt of the swing foot height (rigidly attached to the root).
double swing_foot_height_rate(const HybridState& s, Leg leg, const ModelParams& p);

// dl/dt for a stance leg.
double stance_leg_length_rate(const HybridState& s, Leg leg, const ModelParams& p);

// Partials of the stance leg length with respect to (x, y, theta, phi).
std::array<double, 4> leg_length_gradient(const GenCoords& q, double toe_x, Leg leg,
                                          const ModelParams& p);

struct Accelerations {
  double xddot = 0.0;
  double yddot = 0.0;
  double thetaddot = 0.0;
  double phiddot = 0.0;
};

// Solves M(q) qdd + h(q, qd) + G(q) = 0 with the spine stiffness chosen from
// the current sign of phi.
Accelerations dynamics(const HybridState& s, const ModelParams& p);

// Same system with an explicit spine stiffness, used by the integrator to
// stay on one smooth branch between switch events.
Accelerations dynamics(const GenCoords& q, const ContactMode& mode, const ModelParams& p,
                       double spine_k);

double total_energy(const HybridState& s, const ModelParams& p);

// Leg spring compression force k (l0 - l) in stance, 0 in swing.
double ground_reaction_force(const HybridState& s, Leg leg, const ModelParams& p);

// psi_i = pi/2 + theta_i - gamma_i with theta_1 = theta + phi, theta_2 = theta - phi.
// Throws std::domain_error for a swing leg.
double relative_leg_angle(const HybridState& s, Leg leg, const ModelParams& p);

}  // namespace spinebound
