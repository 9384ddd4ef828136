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

#include <cmath>
#include <stdexcept>

#include "spinebound/analysis.hpp"
#include "spinebound/solver.hpp"

namespace fixtures {

inline const double kSqrt10 = std::sqrt(10.0);

// Converged and evaluated orbit at (y*, thetadot*) for the given kappa.
inline spinebound::FixedPointRecord solve(double y, double thd, double kappa) {
  spinebound::ModelParams p;
  p.kappa = kappa;
  const auto seed = spinebound::symmetric_seed(y, thd, p);
  if (!seed) throw std::runtime_error("no symmetric seed");
  return spinebound::evaluate_record(spinebound::find_fixed_point(y, thd, kappa, *seed, p), p);
}

inline const spinebound::FixedPointRecord& a2() {
  static const auto r = solve(0.67, -1.0, kSqrt10);
  return r;
}

inline const spinebound::FixedPointRecord& b2() {
  static const auto r = solve(0.67, 1.0, kSqrt10);
  return r;
}

inline spinebound::Trajectory cycle(const spinebound::FixedPointRecord& r) {
  spinebound::ModelParams p;
  p.kappa = r.kappa;
  return spinebound::return_map(r.z_star, r.td_angles, p).cycle.trajectory;
}

}  // namespace fixtures
