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

#include "spinebound/record.hpp"

#include <stdexcept>

#include <nlohmann/json.hpp>

namespace spinebound {

const char* solution_type_name(SolutionType type) {
  switch (type) {
    case SolutionType::EG:
      return "EG";
    case SolutionType::GE:
      return "GE";
    case SolutionType::EE:
      return "EE";
    case SolutionType::E:
      return "E";
    case SolutionType::Other:
      return "Other";
  }
  return "Other";
}

SolutionType solution_type_from_name(const std::string& name) {
  for (auto t : {SolutionType::EG, SolutionType::GE, SolutionType::EE, SolutionType::E,
                 SolutionType::Other}) {
    if (name == solution_type_name(t)) return t;
  }
  throw std::invalid_argument("unknown solution type '" + name + "'");
}

nlohmann::json record_to_json(const FixedPointRecord& r) {
  nlohmann::json eig = nlohmann::json::array();
  for (const auto& l : r.eigenvalues) eig.push_back({l.real(), l.imag()});
  nlohmann::json j = {
      {"y_star", r.y_star},
      {"thetadot_star", r.thetadot_star},
      {"z_star",
       {{"y", r.z_star.y},
        {"theta", r.z_star.theta},
        {"phi", r.z_star.phi},
        {"thetadot", r.z_star.thetadot},
        {"phidot", r.z_star.phidot}}},
      {"td_angles", {{"fore", r.td_angles.fore}, {"hind", r.td_angles.hind}}},
      {"kappa", r.kappa},
      {"residual_norm", r.residual_norm},
      {"iterations", r.iterations},
      {"solution_type", solution_type_name(r.solution_type)},
      {"criteria",
       {{"max_grf", r.criteria.max_grf},
        {"avg_velocity", r.criteria.avg_velocity},
        {"max_abs_eigenvalue", r.criteria.max_abs_eigenvalue},
        {"stable", r.criteria.stable},
        {"phi_td1", r.criteria.phi_td1},
        {"psi_td1", r.criteria.psi_td1}}},
      {"eigenvalues", eig},
  };
  if (r.trivial_eigenvalue) {
    j["trivial_eigenvalue"] = {r.trivial_eigenvalue->real(), r.trivial_eigenvalue->imag()};
  } else {
    j["trivial_eigenvalue"] = nullptr;
  }
  return j;
}

FixedPointRecord record_from_json(const nlohmann::json& j) {
  FixedPointRecord r;
  r.y_star = j.at("y_star").get<double>();
  r.thetadot_star = j.at("thetadot_star").get<double>();
  const auto& z = j.at("z_star");
  r.z_star = {z.at("y").get<double>(), z.at("theta").get<double>(), z.at("phi").get<double>(),
              z.at("thetadot").get<double>(), z.at("phidot").get<double>()};
  r.td_angles = {j.at("td_angles").at("fore").get<double>(),
                 j.at("td_angles").at("hind").get<double>()};
  r.kappa = j.at("kappa").get<double>();
  r.residual_norm = j.at("residual_norm").get<double>();
  r.iterations = j.value("iterations", 0);
  r.solution_type = solution_type_from_name(j.at("solution_type").get<std::string>());
  const auto& c = j.at("criteria");
  r.criteria.max_grf = c.at("max_grf").get<double>();
  r.criteria.avg_velocity = c.at("avg_velocity").get<double>();
  r.criteria.max_abs_eigenvalue = c.at("max_abs_eigenvalue").get<double>();
  r.criteria.stable = c.at("stable").get<bool>();
  r.criteria.phi_td1 = c.at("phi_td1").get<double>();
  r.criteria.psi_td1 = c.at("psi_td1").get<double>();
  for (const auto& e : j.at("eigenvalues")) {
    r.eigenvalues.emplace_back(e.at(0).get<double>(), e.at(1).get<double>());
  }
  if (j.contains("trivial_eigenvalue") && !j["trivial_eigenvalue"].is_null()) {
    const auto& t = j["trivial_eigenvalue"];
    r.trivial_eigenvalue = std::complex<double>(t.at(0).get<double>(), t.at(1).get<double>());
  }
  return r;
}

}  // namespace spinebound
