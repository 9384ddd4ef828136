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

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace spinebound {

// Apex state on the Poincare section (ydot = 0, full flight). x is dropped
// and xdot follows from the energy budget.
struct SectionState {
  double y = 0.0;
  double theta = 0.0;
  double phi = 0.0;
  double thetadot = 0.0;
  double phidot = 0.0;

  bool operator==(const SectionState&) const = default;
};

struct TouchdownAngles {
  double fore = 0.0;
  double hind = 0.0;

  bool operator==(const TouchdownAngles&) const = default;
};

enum class SolutionType { EG, GE, EE, E, Other };

const char* solution_type_name(SolutionType type);
SolutionType solution_type_from_name(const std::string& name);

struct CriteriaSummary {
  double max_grf = 0.0;             // [N]
  double avg_velocity = 0.0;        // [m/s]
  double max_abs_eigenvalue = 0.0;  // nontrivial Floquet multipliers
  bool stable = false;
  double phi_td1 = 0.0;  // spine bend at fore touchdown [rad]
  double psi_td1 = 0.0;  // fore leg-body angle at fore touchdown [rad]
};

struct FixedPointRecord {
  double y_star = 0.0;  // grid coordinates the record was solved at
  double thetadot_star = 0.0;
  SectionState z_star;
  TouchdownAngles td_angles;
  double kappa = 1.0;
  double residual_norm = 0.0;
  int iterations = 0;
  SolutionType solution_type = SolutionType::Other;
  CriteriaSummary criteria;
  std::vector<std::complex<double>> eigenvalues;
  std::optional<std::complex<double>> trivial_eigenvalue;
};

nlohmann::json record_to_json(const FixedPointRecord& record);
FixedPointRecord record_from_json(const nlohmann::json& j);

}  // namespace spinebound
