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

// Reference computations for the tests, written from the body-chain
// description of the model rather than from the library's closed forms.

#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <random>

#include <Eigen/Dense>

#include "spinebound/model.hpp"
#include "spinebound/params.hpp"
#include "spinebound/solver.hpp"

namespace oracle {

using spinebound::GenCoords;
using spinebound::Leg;
using spinebound::ModelParams;

struct P2 {
  double x, y;
};

// Body i pitch: fore theta + phi, hind theta - phi.
inline double body_pitch(double theta, double phi, Leg leg) {
  return leg == Leg::Fore ? theta + phi : theta - phi;
}

// Joint sits between the bodies, COM is the midpoint of the body COMs.
inline P2 joint(const GenCoords& q, const ModelParams& p) {
  const double a1 = body_pitch(q.theta, q.phi, Leg::Fore);
  const double a2 = body_pitch(q.theta, q.phi, Leg::Hind);
  return {q.x - 0.5 * p.r * (std::cos(a1) - std::cos(a2)),
          q.y - 0.5 * p.r * (std::sin(a1) - std::sin(a2))};
}

inline P2 body_com(const GenCoords& q, Leg leg, const ModelParams& p) {
  const P2 j = joint(q, p);
  const double a = body_pitch(q.theta, q.phi, leg);
  const double s = leg == Leg::Fore ? 1.0 : -1.0;
  return {j.x + s * p.r * std::cos(a), j.y + s * p.r * std::sin(a)};
}

inline P2 root(const GenCoords& q, Leg leg, const ModelParams& p) {
  const P2 j = joint(q, p);
  const double a = body_pitch(q.theta, q.phi, leg);
  const double s = leg == Leg::Fore ? 1.0 : -1.0;
  return {j.x + s * (p.r + p.d) * std::cos(a), j.y + s * (p.r + p.d) * std::sin(a)};
}

inline double leg_length(const GenCoords& q, double toe_x, Leg leg, const ModelParams& p) {
  const P2 r = root(q, leg, p);
  return std::hypot(r.x - toe_x, r.y);
}

// Velocity of a body COM by the chain rule on the two body pitches.
inline P2 body_velocity(const GenCoords& q, Leg leg, const ModelParams& p) {
  const double a1 = q.theta + q.phi, a2 = q.theta - q.phi;
  const double w1 = q.thetadot + q.phidot, w2 = q.thetadot - q.phidot;
  const double s = leg == Leg::Fore ? 1.0 : -1.0;
  // body COM = COM +- (r/2)(cos a1 + cos a2, sin a1 + sin a2)
  return {q.xdot + s * 0.5 * p.r * (-std::sin(a1) * w1 - std::sin(a2) * w2),
          q.ydot + s * 0.5 * p.r * (std::cos(a1) * w1 + std::cos(a2) * w2)};
}

struct Stance {
  std::array<std::optional<double>, 2> toe;
};

inline double lagrangian(const GenCoords& q, const Stance& st, const ModelParams& p) {
  double T = 0.0, V = 0.0;
  for (Leg leg : spinebound::kLegs) {
    const P2 v = body_velocity(q, leg, p);
    const double w = leg == Leg::Fore ? q.thetadot + q.phidot : q.thetadot - q.phidot;
    T += 0.5 * p.m * (v.x * v.x + v.y * v.y) + 0.5 * p.J * w * w;
    V += p.m * p.g * body_com(q, leg, p).y;
    if (const auto& toe = st.toe[spinebound::index(leg)]) {
      const double l = leg_length(q, *toe, leg, p);
      V += 0.5 * p.k * (l - p.l0) * (l - p.l0);
    }
  }
  const double kt = q.phi > 0.0 ? p.kappa * p.k0 : p.k0;
  const double rel = 2.0 * q.phi;  // angle between the bodies
  V += 0.5 * kt * rel * rel;
  return T - V;
}

using Vec4 = Eigen::Vector4d;

inline GenCoords with(const GenCoords& q, const Vec4& pos, const Vec4& vel) {
  GenCoords o = q;
  o.x = pos[0];
  o.y = pos[1];
  o.theta = pos[2];
  o.phi = pos[3];
  o.xdot = vel[0];
  o.ydot = vel[1];
  o.thetadot = vel[2];
  o.phidot = vel[3];
  return o;
}

inline Vec4 positions(const GenCoords& q) { return {q.x, q.y, q.theta, q.phi}; }
inline Vec4 velocities(const GenCoords& q) { return {q.xdot, q.ydot, q.thetadot, q.phidot}; }

// Richardson-extrapolated central difference of a smooth scalar function.
template <class F>
double derivative(F&& f, double h) {
  const double d1 = (f(h) - f(-h)) / (2 * h);
  const double d2 = (f(h / 2) - f(-h / 2)) / h;
  return (4 * d2 - d1) / 3;
}

// Accelerations from the Euler-Lagrange equations evaluated by finite
// differences of the Lagrangian above. L is quadratic in the velocities, so
// velocity differences with unit steps are exact.
inline Vec4 lagrange_accelerations(const GenCoords& q, const Stance& st, const ModelParams& p) {
  const Vec4 x0 = positions(q), v0 = velocities(q);
  auto L = [&](const Vec4& x, const Vec4& v) { return lagrangian(with(q, x, v), st, p); };
  auto momentum = [&](const Vec4& x, const Vec4& v) {
    Vec4 out;
    for (int i = 0; i < 4; ++i) {
      Vec4 e = Vec4::Zero();
      e[i] = 1.0;
      out[i] = 0.5 * (L(x, v + e) - L(x, v - e));
    }
    return out;
  };
  Eigen::Matrix4d M;
  for (int j = 0; j < 4; ++j) {
    Vec4 e = Vec4::Zero();
    e[j] = 1.0;
    M.col(j) = 0.5 * (momentum(x0, v0 + e) - momentum(x0, v0 - e));
  }
  Vec4 dLdq, dpdt;
  const double h = 1e-3;
  for (int i = 0; i < 4; ++i) {
    Vec4 e = Vec4::Zero();
    e[i] = 1.0;
    dLdq[i] = derivative([&](double s) { return L(x0 + s * e, v0); }, h);
  }
  for (int i = 0; i < 4; ++i) {
    dpdt[i] = derivative([&](double s) { return momentum(x0 + s * v0, v0)[i]; }, h);
  }
  return M.fullPivLu().solve(dLdq - dpdt);
}

inline double total_energy(const GenCoords& q, const Stance& st, const ModelParams& p) {
  // E = T + V; with L = T - V and T quadratic, T = L(v) - L(0) at fixed q.
  GenCoords still = q;
  still.xdot = still.ydot = still.thetadot = still.phidot = 0.0;
  const double minus_v = lagrangian(still, st, p);
  const double T = lagrangian(q, st, p) - minus_v;
  return T - minus_v;
}

}  // namespace oracle
