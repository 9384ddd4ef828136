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

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "spinebound/analysis.hpp"
#include "spinebound/params.hpp"
#include "spinebound/record.hpp"
#include "spinebound/solver.hpp"

namespace spinebound {

struct GridRange {
  double min = 0.0;
  double max = 1.0;
  int n = 2;

  double at(int i) const { return min + (max - min) * i / (n - 1); }
  double step() const { return (max - min) / (n - 1); }
  int nearest(double v) const;
};

enum class SeedStrategy { FromNeighbor, FromFile, Fixed };

const char* seed_strategy_name(SeedStrategy s);
SeedStrategy seed_strategy_from_name(const std::string& name);

struct Anchor {
  double y_star = 0.0;
  double thetadot_star = 0.0;
};

struct SweepConfig {
  GridRange y_range{0.60, 0.72, 61};
  GridRange thetadot_range{-3.0, 3.0, 121};
  std::vector<double> kappa_list{1.0, 3.1622776601683795, 10.0};
  SeedStrategy seed_strategy = SeedStrategy::FromNeighbor;
  std::optional<FixedPointGuess> fixed_guess;  // Fixed: used in every cell
  std::vector<FixedPointRecord> seed_records;  // FromFile: matched by kappa and cell
  // Flood origins for neighbour seeding, snapped to the nearest cell and
  // seeded by the symmetric-orbit search.
  std::vector<Anchor> anchors{{0.67, -1.0}, {0.67, 1.0}};
  int worker_count = 1;

  // Throws std::invalid_argument.
  void validate() const;
};

enum class CellStatus { Converged, Failed, Unreached };

const char* cell_status_name(CellStatus s);

struct CellOutcome {
  int iy = 0;
  int it = 0;
  CellStatus status = CellStatus::Unreached;
  std::optional<FixedPointRecord> record;
  std::optional<FailureKind> failure;
  std::string message;
  int wave = -1;  // flood distance from the anchors; -1 if not attempted
};

struct KappaSweep {
  double kappa = 1.0;
  std::vector<CellOutcome> cells;  // row-major: index = iy * thetadot_n + it
  int converged() const;
  int failed() const;
};

struct SweepResult {
  SweepConfig config;
  ModelParams params;
  std::vector<KappaSweep> sweeps;
  std::vector<std::string> warnings;  // e.g. a kappa with zero converged cells

  std::vector<FixedPointRecord> records() const;
  double cell_area() const;
};

// Runs `count` independent tasks on `workers` threads; task(i) must only touch
// slot i of any shared output.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& task);

// Solves one cell and evaluates the record. Seeds are tried in order until
// one converges; the last failure is reported otherwise.
CellOutcome solve_cell(double y_star, double thetadot_star, double kappa,
                       const std::vector<FixedPointGuess>& seeds, const ModelParams& params);

using SweepProgress = std::function<void(double kappa, int wave, int attempted, int converged)>;

// Grid sweep per kappa. FromNeighbor floods outward from the anchors in
// synchronous waves; each cell of a wave is seeded from its already converged
// 4-neighbours (nearest first, then lower index), so results do not depend
// on worker_count. FromFile uses the stored record of the same cell where one
// exists and floods from those otherwise. Fixed solves every cell from the
// same guess.
SweepResult run_grid_sweep(const SweepConfig& config, const ModelParams& params,
                           const SweepProgress& progress = {});

struct ContinuationOptions {
  int refine_steps = 6;   // bisections of each stability change
  int substep_levels = 3;  // a failed step is retried through up to 2^levels substeps
  int workers = 1;
};

struct TrackPoint {
  double kappa = 1.0;
  std::optional<FixedPointRecord> record;
  std::optional<FailureKind> failure;
  std::string message;
};

struct ContinuationTrack {
  std::string label;
  Anchor anchor;
  std::vector<TrackPoint> points;  // increasing kappa; failures only at the ends

  // Bracket of the first stable -> unstable change, if any.
  std::optional<std::pair<double, double>> stability_loss() const;
};

struct TrackAnchor {
  std::string label;
  Anchor anchor;
};

// Named solutions: a1..a4 at thetadot* < 0 and their mirrors b1..b4.
std::vector<TrackAnchor> named_anchors();
TrackAnchor named_anchor(const std::string& label);

// n geometric samples from lo to hi inclusive.
std::vector<double> geometric_kappas(double lo, double hi, int n);

// Warm-started re-solve of each anchor along kappa_samples (sorted
// ascending). The track starts at the first sample where the symmetric-orbit
// search converges and is continued in both directions from there; a branch
// ends at its first failure. A stability change between neighbouring samples
// is refined by bisection in log kappa.
std::vector<ContinuationTrack> run_continuation(const std::vector<TrackAnchor>& anchors,
                                                const std::vector<double>& kappa_samples,
                                                const ModelParams& params,
                                                const ContinuationOptions& options = {});

// Persistence.
nlohmann::json sweep_config_to_json(const SweepConfig& config);
SweepConfig sweep_config_from_json(const nlohmann::json& j);
nlohmann::json sweep_metadata(const SweepResult& result, const std::string& tool_version);
void write_records_jsonl(std::ostream& out, const std::vector<FixedPointRecord>& records);
std::vector<FixedPointRecord> read_records_jsonl(std::istream& in);
// kappa,iy,it,y_star,thetadot_star,status,failure,wave,type,phi_star,max_grf,
// avg_velocity,max_abs_eigenvalue,stable
void write_cells_csv(std::ostream& out, const SweepResult& result);
// label,kappa,status,failure,type,y_star,thetadot_star,phi_star,max_grf,
// avg_velocity,max_abs_eigenvalue,stable,phi_td1,psi_td1
void write_tracks_csv(std::ostream& out, const std::vector<ContinuationTrack>& tracks);

}  // namespace spinebound
