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

#include "spinebound/params.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <utility>

#include <nlohmann/json.hpp>

namespace spinebound {
namespace {

using Field = std::pair<const char*, double ModelParams::*>;

constexpr std::array<Field, 10> kFields{{
    {"m", &ModelParams::m},
    {"J", &ModelParams::J},
    {"r", &ModelParams::r},
    {"d", &ModelParams::d},
    {"l0", &ModelParams::l0},
    {"k", &ModelParams::k},
    {"k0", &ModelParams::k0},
    {"kappa", &ModelParams::kappa},
    {"g", &ModelParams::g},
    {"E", &ModelParams::E},
}};

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

void ModelParams::validate() const {
  for (const auto& [name, field] : kFields) {
    if (!std::isfinite(this->*field)) {
      throw std::invalid_argument(std::string("parameter '") + name + "' is not finite");
    }
  }
  require(m > 0, "m must be positive");
  require(J > 0, "J must be positive");
  require(r > 0, "r must be positive");
  require(d >= 0, "d must be non-negative");
  require(l0 > 0, "l0 must be positive");
  require(k > 0, "k must be positive");
  require(k0 > 0, "k0 must be positive");
  require(kappa >= 1, "kappa must be >= 1");
  require(g > 0, "g must be positive");
  require(E > 0, "E must be positive");
}

void set_param(ModelParams& p, std::string_view key, double value) {
  for (const auto& [name, field] : kFields) {
    if (key == name) {
      p.*field = value;
      return;
    }
  }
  throw std::invalid_argument("unknown parameter '" + std::string(key) + "'");
}

ModelParams params_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("parameter config must be a JSON object");
  ModelParams p;
  for (const auto& [key, value] : j.items()) {
    if (!value.is_number()) {
      throw std::invalid_argument("parameter '" + key + "' must be a number");
    }
    set_param(p, key, value.get<double>());
  }
  p.validate();
  return p;
}

nlohmann::json params_to_json(const ModelParams& p) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, field] : kFields) j[name] = p.*field;
  return j;
}

ModelParams load_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("malformed config '" + path + "': " + e.what());
  }
  return params_from_json(j);
}

void save_params(const ModelParams& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << params_to_json(p).dump(2) << '\n';
}

}  // namespace spinebound
