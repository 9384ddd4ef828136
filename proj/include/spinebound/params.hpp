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

#include <string>
#include <string_view>

#include <nlohmann/json_fwd.hpp>

namespace spinebound {

// Physical constants of the two-segment bounding model. All SI, angles in rad.
// Defaults are the cheetah-calibrated values; E is the fixed energy budget
// used on the Poincare section.
struct ModelParams {
  double m = 19.0;      // mass of one segment [kg]
  double J = 0.53;      // pitch inertia of one segment about its COM [kg m^2]
  double r = 0.29;      // half-length of one segment [m]
  double d = 0.06;      // segment COM to leg root [m]
  double l0 = 0.69;     // nominal leg length [m]
  double k = 15000.0;   // leg spring constant [N/m]
  double k0 = 100.0;    // base (flexion) spine stiffness [N m/rad]
  double kappa = 1.0;   // extension/flexion stiffness ratio
  double g = 9.81;      // gravity [m/s^2]
  double E = 4500.0;    // total mechanical energy [J]

  // Throws std::invalid_argument naming the first violated constraint.
  void validate() const;

  bool operator==(const ModelParams&) const = default;
};

// Flat JSON object with keys m, J, r, d, l0, k, k0, kappa, g, E. Missing keys
// keep their defaults; unknown keys are rejected.
ModelParams params_from_json(const nlohmann::json& j);
nlohmann::json params_to_json(const ModelParams& p);

ModelParams load_params(const std::string& path);
void save_params(const ModelParams& p, const std::string& path);

// Overrides a single named field; throws std::invalid_argument for unknown keys.
void set_param(ModelParams& p, std::string_view key, double value);

}  // namespace spinebound
