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
#include <vector>

namespace spinebound::cli {

inline constexpr const char* kConfigEnv = "SPINEBOUND_CONFIG";
inline constexpr const char* kOutEnv = "SPINEBOUND_OUT";
inline constexpr const char* kWorkersEnv = "SPINEBOUND_WORKERS";
inline constexpr const char* kKappaEnv = "SPINEBOUND_KAPPA";

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2 };

// Entry point of the `spinebound` executable; returns the process exit code.
int run(const std::vector<std::string>& args);

}  // namespace spinebound::cli
