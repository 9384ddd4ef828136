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
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "states.hpp"
#include "spinebound/model.hpp"

using namespace spinebound;

using states::random_state;
using states::rel_err;

TEST_CASE("leg roots match the body-chain composition") {
  const ModelParams p;
  std::mt19937_64 rng(11);
  for (int n = 0; n < 200; ++n) {
    const auto rs = random_state(rng, p, false, false);
    for (Leg leg : kLegs) {
      const Vec2 got = leg_root_position(rs.state.q, leg, p);
      const oracle::P2 want = oracle::root(rs.state.q, leg, p);
      CHECK(got.x == doctest::Approx(want.x).epsilon(1e-13));
      CHECK(got.y == doctest::Approx(want.y).epsilon(1e-13));
    }
  }
}

TEST_CASE("root partials and velocity agree with finite differences") {
  const ModelParams p;
  std::mt19937_64 rng(12);
  for (int n = 0; n < 200; ++n) {
    const auto q = random_state(rng, p, false, false).state.q;
    for (Leg leg : kLegs) {
      const auto kin = leg_root_kinematics(q.theta, q.phi, leg, p);
      const double h = 1e-6;
      const auto tp = leg_root_kinematics(q.theta + h, q.phi, leg, p).offset;
      const auto tm = leg_root_kinematics(q.theta - h, q.phi, leg, p).offset;
      const auto pp = leg_root_kinematics(q.theta, q.phi + h, leg, p).offset;
      const auto pm = leg_root_kinematics(q.theta, q.phi - h, leg, p).offset;
      CHECK(kin.d_theta.x == doctest::Approx((tp.x - tm.x) / (2 * h)).epsilon(1e-7));
      CHECK(kin.d_theta.y == doctest::Approx((tp.y - tm.y) / (2 * h)).epsilon(1e-7));
      CHECK(kin.d_phi.x == doctest::Approx((pp.x - pm.x) / (2 * h)).epsilon(1e-7));
      CHECK(kin.d_phi.y == doctest::Approx((pp.y - pm.y) / (2 * h)).epsilon(1e-7));

      GenCoords fwd = q, bwd = q;
      for (GenCoords* g : {&fwd, &bwd}) {
        const double s = g == &fwd ? h : -h;
        g->x += s * q.xdot;
        g->y += s * q.ydot;
        g->theta += s * q.thetadot;
        g->phi += s * q.phidot;
      }
      const Vec2 v = leg_root_velocity(q, leg, p);
      const Vec2 a = leg_root_position(fwd, leg, p), b = leg_root_position(bwd, leg, p);
      CHECK(v.x == doctest::Approx((a.x - b.x) / (2 * h)).epsilon(1e-7));
      CHECK(v.y == doctest::Approx((a.y - b.y) / (2 * h)).epsilon(1e-7));
    }
  }
}

TEST_CASE("leg length gradient matches central differences on 1000 stance states") {
  const ModelParams p;
  std::mt19937_64 rng(13);
  double worst = 0.0;
  for (int n = 0; n < 1000; ++n) {
    const auto rs = random_state(rng, p, true, true);
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
        const double lp = oracle::leg_length(oracle::with(rs.state.q, x0 + h * e, v0), toe, leg, p);
        const double lm = oracle::leg_length(oracle::with(rs.state.q, x0 - h * e, v0), toe, leg, p);
        fd[i] = (lp - lm) / (2 * h);
        an[i] = g[i];
      }
      worst = std::max(worst, rel_err(an, fd));
    }
  }
  MESSAGE("worst relative error " << worst);
  CHECK(worst < 1e-5);
}

TEST_CASE("dynamics match the Lagrangian oracle on 100 states") {
  ModelParams p;
  p.kappa = 3.0;
  std::mt19937_64 rng(14);
  double worst = 0.0;
  for (int n = 0; n < 100; ++n) {
    const int pattern = n % 4;
    const auto rs = random_state(rng, p, pattern & 1, pattern & 2);
    const auto acc = dynamics(rs.state, p);
    const oracle::Vec4 got{acc.xddot, acc.yddot, acc.thetaddot, acc.phiddot};
    worst = std::max(worst, rel_err(got, oracle::lagrange_accelerations(rs.state.q, rs.stance, p)));
  }
  MESSAGE("worst relative error " << worst);
  CHECK(worst < 1e-6);
}

TEST_CASE("energy matches the oracle Hamiltonian") {
  ModelParams p;
  p.kappa = 10.0;
  std::mt19937_64 rng(15);
  for (int n = 0; n < 100; ++n) {
    const auto rs = random_state(rng, p, n % 2, n % 3 == 0);
    CHECK(total_energy(rs.state, p) ==
          doctest::Approx(oracle::total_energy(rs.state.q, rs.stance, p)).epsilon(1e-11));
  }
}

TEST_CASE("spine stiffness is asymmetric") {
  ModelParams p;
  p.kappa = 3.1622776601683795;
  CHECK(spine_stiffness(0.1, p) == doctest::Approx(316.22776601683795));
  CHECK(spine_stiffness(-0.1, p) == doctest::Approx(100.0));
  CHECK(spine_stiffness(0.0, p) == doctest::Approx(100.0));
  p.kappa = 1.0;
  CHECK(spine_stiffness(0.2, p) == spine_stiffness(-0.2, p));
}

TEST_CASE("ground reaction force is the leg spring force") {
  const ModelParams p;
  HybridState s;
  s.q.y = 1.0;
  const Vec2 root = leg_root_position(s.q, Leg::Fore, p);
  s.q.y += (p.l0 - 0.05) - root.y;  // 5 cm compression with the toe straight below
  const Vec2 moved = leg_root_position(s.q, Leg::Fore, p);
  s.mode.touch_down(Leg::Fore, moved.x);
  CHECK(ground_reaction_force(s, Leg::Fore, p) == doctest::Approx(750.0));
  CHECK(ground_reaction_force(s, Leg::Hind, p) == 0.0);
}

TEST_CASE("relative leg angle") {
  const ModelParams p;
  HybridState s;
  s.q.y = 0.6;
  for (Leg leg : kLegs) {
    const Vec2 root = leg_root_position(s.q, leg, p);
    s.mode.touch_down(leg, root.x);
  }
  CHECK(relative_leg_angle(s, Leg::Fore, p) == doctest::Approx(std::numbers::pi / 2));
  CHECK(relative_leg_angle(s, Leg::Hind, p) == doctest::Approx(std::numbers::pi / 2));

  // Toe ahead of the root by the root height: gamma = pi/4.
  HybridState t;
  t.q.y = 0.6;
  const Vec2 root = leg_root_position(t.q, Leg::Fore, p);
  t.mode.touch_down(Leg::Fore, root.x + root.y);
  CHECK(leg_length_and_angle(t, Leg::Fore, p).angle == doctest::Approx(std::numbers::pi / 4));
  CHECK(relative_leg_angle(t, Leg::Fore, p) == doctest::Approx(std::numbers::pi / 4));

  // Pitch enters with opposite signs through the two bodies.
  t.q.phi = 0.1;
  const double psi = relative_leg_angle(t, Leg::Fore, p);
  const double gamma = leg_length_and_angle(t, Leg::Fore, p).angle;
  CHECK(psi == doctest::Approx(std::numbers::pi / 2 + 0.1 - gamma));

  CHECK_THROWS_AS(relative_leg_angle(t, Leg::Hind, p), std::domain_error);
}

TEST_CASE("swing foot hangs l0 from the root at the touchdown angle") {
  const ModelParams p;
  HybridState s;
  s.q.y = 0.7;
  s.q.theta = 0.1;
  s.mode.td_angle = {0.3, -0.2};
  for (Leg leg : kLegs) {
    const Vec2 root = leg_root_position(s.q, leg, p);
    const Vec2 foot = foot_position(s, leg, p);
    const double g = s.mode.td_angle[index(leg)];
    CHECK(foot.x == doctest::Approx(root.x + p.l0 * std::sin(g)));
    CHECK(foot.y == doctest::Approx(root.y - p.l0 * std::cos(g)));
    CHECK(leg_length_and_angle(s, leg, p).length == p.l0);
  }
}

TEST_CASE("degenerate leg faults") {
  const ModelParams p;
  GenCoords q;
  q.y = 0.5;
  const Vec2 root = leg_root_position(q, Leg::Fore, p);
  q.y -= root.y;
  CHECK_THROWS_AS(leg_length_gradient(q, leg_root_position(q, Leg::Fore, p).x, Leg::Fore, p),
                  SimulationFault);
}
