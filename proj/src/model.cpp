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

#include "spinebound/model.hpp"

#include <cmath>
#include <numbers>

namespace spinebound {

Leg leg_from_number(int number) {
  if (number == 1) return Leg::Fore;
  if (number == 2) return Leg::Hind;
  throw std::invalid_argument("leg index must be 1 (fore) or 2 (hind), got " +
                              std::to_string(number));
}

int leg_number(Leg leg) { return leg == Leg::Fore ? 1 : 2; }

const char* leg_name(Leg leg) { return leg == Leg::Fore ? "fore" : "hind"; }

void ContactMode::touch_down(Leg leg, double toe) {
  phase[index(leg)] = LegPhase::Stance;
  toe_x[index(leg)] = toe;
}

void ContactMode::lift_off(Leg leg) {
  phase[index(leg)] = LegPhase::Swing;
  toe_x[index(leg)].reset();
}

double spine_stiffness(double phi, const ModelParams& p) {
  return phi > 0.0 ? p.kappa * p.k0 : p.k0;
}

RootKinematics leg_root_kinematics(double theta, double phi, Leg leg, const ModelParams& p) {
  // Fore root = joint + (r+d)(cos th1, sin th1), hind root = joint - (r+d)(cos th2, sin th2),
  // joint = COM + r (sin th sin ph, -cos th sin ph).
  const double s = leg == Leg::Fore ? 1.0 : -1.0;
  const double rd = p.r + p.d;
  const double ct = std::cos(theta), st = std::sin(theta);
  const double cp = std::cos(phi), sp = std::sin(phi);
  RootKinematics k;
  k.offset = {s * rd * ct * cp - p.d * st * sp, s * rd * st * cp + p.d * ct * sp};
  k.d_theta = {-k.offset.y, k.offset.x};
  k.d_phi = {-s * rd * ct * sp - p.d * st * cp, -s * rd * st * sp + p.d * ct * cp};
  return k;
}

Vec2 leg_root_position(const GenCoords& q, Leg leg, const ModelParams& p) {
  const auto k = leg_root_kinematics(q.theta, q.phi, leg, p);
  return {q.x + k.offset.x, q.y + k.offset.y};
}

Vec2 leg_root_velocity(const GenCoords& q, Leg leg, const ModelParams& p) {
  const auto k = leg_root_kinematics(q.theta, q.phi, leg, p);
  return {q.xdot + k.d_theta.x * q.thetadot + k.d_phi.x * q.phidot,
          q.ydot + k.d_theta.y * q.thetadot + k.d_phi.y * q.phidot};
}

LegGeometry leg_length_and_angle(const HybridState& s, Leg leg, const ModelParams& p) {
  if (!s.mode.in_stance(leg)) return {p.l0, s.mode.td_angle[index(leg)]};
  const Vec2 root = leg_root_position(s.q, leg, p);
  const double vx = *s.mode.toe_x[index(leg)] - root.x;
  const double vy = -root.y;
  return {std::hypot(vx, vy), std::atan2(vx, -vy)};
}

Vec2 foot_position(const HybridState& s, Leg leg, const ModelParams& p) {
  if (s.mode.in_stance(leg)) return {*s.mode.toe_x[index(leg)], 0.0};
  const Vec2 root = leg_root_position(s.q, leg, p);
  const double gamma = s.mode.td_angle[index(leg)];
  return {root.x + p.l0 * std::sin(gamma), root.y - p.l0 * std::cos(gamma)};
}

double swing_foot_height_rate(const HybridState& s, Leg leg, const ModelParams& p) {
  return leg_root_velocity(s.q, leg, p).y;
}

double stance_leg_length_rate(const HybridState& s, Leg leg, const ModelParams& p) {
  const Vec2 root = leg_root_position(s.q, leg, p);
  const Vec2 v = leg_root_velocity(s.q, leg, p);
  const double dx = root.x - *s.mode.toe_x[index(leg)];
  const double dy = root.y;
  const double l = std::hypot(dx, dy);
  return (dx * v.x + dy * v.y) / l;
}

std::array<double, 4> leg_length_gradient(const GenCoords& q, double toe_x, Leg leg,
                                          const ModelParams& p) {
  const auto k = leg_root_kinematics(q.theta, q.phi, leg, p);
  const double dx = q.x + k.offset.x - toe_x;
  const double dy = q.y + k.offset.y;
  const double l = std::hypot(dx, dy);
  if (!(l > 1e-9)) throw SimulationFault("stance leg compressed to zero length");
  const double ux = dx / l, uy = dy / l;
  return {ux, uy, ux * k.d_theta.x + uy * k.d_theta.y, ux * k.d_phi.x + uy * k.d_phi.y};
}

Accelerations dynamics(const GenCoords& q, const ContactMode& mode, const ModelParams& p,
                       double spine_k) {
  const double cp = std::cos(q.phi), sp = std::sin(q.phi);
  const double mr2 = p.m * p.r * p.r;

  // Velocity-product terms from the Euler-Lagrange equations of
  // T = m(xd^2 + yd^2) + (J + m r^2 cos^2 phi) thd^2 + (J + m r^2 sin^2 phi) phd^2.
  const double h_theta = -4.0 * mr2 * q.thetadot * q.phidot * cp * sp;
  const double h_phi =
      2.0 * mr2 * (q.thetadot * q.thetadot + q.phidot * q.phidot) * cp * sp;

  std::array<double, 4> G{0.0, 2.0 * p.m * p.g, 0.0, 4.0 * spine_k * q.phi};
  for (Leg leg : kLegs) {
    if (!mode.in_stance(leg)) continue;
    const double toe = *mode.toe_x[index(leg)];
    const auto k = leg_root_kinematics(q.theta, q.phi, leg, p);
    const double l = std::hypot(q.x + k.offset.x - toe, q.y + k.offset.y);
    const auto grad = leg_length_gradient(q, toe, leg, p);
    const double f = p.k * (l - p.l0);
    for (std::size_t i = 0; i < 4; ++i) G[i] += f * grad[i];
  }

  Accelerations a;
  a.xddot = -G[0] / (2.0 * p.m);
  a.yddot = -G[1] / (2.0 * p.m);
  a.thetaddot = -(h_theta + G[2]) / (2.0 * p.J + 2.0 * mr2 * cp * cp);
  a.phiddot = -(h_phi + G[3]) / (2.0 * p.J + 2.0 * mr2 * sp * sp);
  return a;
}

Accelerations dynamics(const HybridState& s, const ModelParams& p) {
  return dynamics(s.q, s.mode, p, spine_stiffness(s.q.phi, p));
}

double total_energy(const HybridState& s, const ModelParams& p) {
  const auto& q = s.q;
  const double cp = std::cos(q.phi), sp = std::sin(q.phi);
  const double mr2 = p.m * p.r * p.r;
  double e = p.m * (q.xdot * q.xdot + q.ydot * q.ydot) +
             (p.J + mr2 * cp * cp) * q.thetadot * q.thetadot +
             (p.J + mr2 * sp * sp) * q.phidot * q.phidot + 2.0 * p.m * p.g * q.y +
             2.0 * spine_stiffness(q.phi, p) * q.phi * q.phi;
  for (Leg leg : kLegs) {
    if (!s.mode.in_stance(leg)) continue;
    const double dl = leg_length_and_angle(s, leg, p).length - p.l0;
    e += 0.5 * p.k * dl * dl;
  }
  return e;
}

double ground_reaction_force(const HybridState& s, Leg leg, const ModelParams& p) {
  if (!s.mode.in_stance(leg)) return 0.0;
  return p.k * (p.l0 - leg_length_and_angle(s, leg, p).length);
}

double relative_leg_angle(const HybridState& s, Leg leg, const ModelParams& p) {
  if (!s.mode.in_stance(leg)) {
    throw std::domain_error(std::string("relative leg angle undefined for swing leg ") +
                            leg_name(leg));
  }
  const double body_pitch = leg == Leg::Fore ? s.q.theta + s.q.phi : s.q.theta - s.q.phi;
  return std::numbers::pi / 2.0 + body_pitch - leg_length_and_angle(s, leg, p).angle;
}

}  // namespace spinebound
