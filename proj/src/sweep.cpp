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

#include "spinebound/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

namespace spinebound {
namespace {

using nlohmann::json;

constexpr double kKappaMatch = 1e-12;

bool same_kappa(double a, double b) { return std::abs(a - b) <= kKappaMatch * std::max(1.0, b); }

void validate_range(const GridRange& r, const char* name) {
  if (r.n < 2) throw std::invalid_argument(std::string(name) + ": need at least 2 points");
  if (!(r.max > r.min)) throw std::invalid_argument(std::string(name) + ": empty range");
}

json range_to_json(const GridRange& r) { return {{"min", r.min}, {"max", r.max}, {"n", r.n}}; }

GridRange range_from_json(const json& j) {
  return {j.at("min").get<double>(), j.at("max").get<double>(), j.at("n").get<int>()};
}

json guess_to_json(const FixedPointGuess& g) {
  return {{"theta", g.theta}, {"phi", g.phi}, {"phidot", g.phidot},
          {"gamma_fore", g.td.fore}, {"gamma_hind", g.td.hind}};
}

FixedPointGuess guess_from_json(const json& j) {
  return {j.value("theta", 0.0), j.at("phi").get<double>(), j.value("phidot", 0.0),
          {j.at("gamma_fore").get<double>(), j.at("gamma_hind").get<double>()}};
}

CellOutcome failure(FailureKind kind, std::string message) {
  CellOutcome c;
  c.status = CellStatus::Failed;
  c.failure = kind;
  c.message = std::move(message);
  return c;
}

std::vector<FixedPointGuess> seed_search(double y, double thd, double kappa,
                                         const ModelParams& params) {
  ModelParams p = params;
  p.kappa = kappa;
  try {
    if (auto s = symmetric_seed(y, thd, p)) return {*s};
  } catch (const SolverError&) {
  }
  return {};
}

std::vector<int> neighbours(int iy, int it, const SweepConfig& c) {
  std::vector<int> out;
  const int nt = c.thetadot_range.n;
  if (iy > 0) out.push_back((iy - 1) * nt + it);
  if (it > 0) out.push_back(iy * nt + it - 1);
  if (it + 1 < nt) out.push_back(iy * nt + it + 1);
  if (iy + 1 < c.y_range.n) out.push_back((iy + 1) * nt + it);
  return out;
}

KappaSweep sweep_one_kappa(const SweepConfig& c, double kappa, const ModelParams& params,
                           const SweepProgress& progress) {
  const int ny = c.y_range.n, nt = c.thetadot_range.n;
  KappaSweep ks;
  ks.kappa = kappa;
  ks.cells.resize(static_cast<std::size_t>(ny) * nt);
  for (int iy = 0; iy < ny; ++iy) {
    for (int it = 0; it < nt; ++it) {
      auto& cell = ks.cells[iy * nt + it];
      cell.iy = iy;
      cell.it = it;
    }
  }
  auto y_of = [&](int idx) { return c.y_range.at(idx / nt); };
  auto t_of = [&](int idx) { return c.thetadot_range.at(idx % nt); };

  auto run_wave = [&](const std::vector<int>& wave,
                      const std::vector<std::vector<FixedPointGuess>>& seeds, int number) {
    std::vector<CellOutcome> out(wave.size());
    parallel_for(wave.size(), c.worker_count, [&](std::size_t i) {
      const int idx = wave[i];
      out[i] = seeds[i].empty() ? failure(FailureKind::NewtonDivergence, "no seed available")
                                : solve_cell(y_of(idx), t_of(idx), kappa, seeds[i], params);
    });
    int converged = 0;
    for (std::size_t i = 0; i < wave.size(); ++i) {
      auto& cell = ks.cells[wave[i]];
      const int iy = cell.iy, it = cell.it;
      cell = std::move(out[i]);
      cell.iy = iy;
      cell.it = it;
      cell.wave = number;
      if (cell.status == CellStatus::Converged) ++converged;
    }
    if (progress) progress(kappa, number, static_cast<int>(wave.size()), converged);
  };

  if (c.seed_strategy == SeedStrategy::Fixed) {
    std::vector<int> all(ks.cells.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    std::vector<std::vector<FixedPointGuess>> seeds(all.size(), {*c.fixed_guess});
    run_wave(all, seeds, 0);
    return ks;
  }

  std::vector<int> wave;
  std::vector<std::vector<FixedPointGuess>> seeds;
  if (c.seed_strategy == SeedStrategy::FromFile) {
    std::vector<std::vector<FixedPointGuess>> by_cell(ks.cells.size());
    for (const auto& r : c.seed_records) {
      if (!same_kappa(r.kappa, kappa)) continue;
      const int iy = c.y_range.nearest(r.y_star), it = c.thetadot_range.nearest(r.thetadot_star);
      if (std::abs(c.y_range.at(iy) - r.y_star) > 1e-9 ||
          std::abs(c.thetadot_range.at(it) - r.thetadot_star) > 1e-9) {
        continue;
      }
      by_cell[iy * nt + it].push_back(guess_from_record(r));
    }
    for (std::size_t i = 0; i < by_cell.size(); ++i) {
      if (by_cell[i].empty()) continue;
      wave.push_back(static_cast<int>(i));
      seeds.push_back(std::move(by_cell[i]));
    }
  }
  if (wave.empty()) {
    for (const auto& a : c.anchors) {
      const int idx = c.y_range.nearest(a.y_star) * nt + c.thetadot_range.nearest(a.thetadot_star);
      if (std::find(wave.begin(), wave.end(), idx) == wave.end()) wave.push_back(idx);
    }
    std::sort(wave.begin(), wave.end());
    seeds.resize(wave.size());
    parallel_for(wave.size(), c.worker_count, [&](std::size_t i) {
      seeds[i] = seed_search(y_of(wave[i]), t_of(wave[i]), kappa, params);
    });
  }

  for (int number = 0; !wave.empty(); ++number) {
    run_wave(wave, seeds, number);
    std::vector<int> next;
    for (int idx : wave) {
      if (ks.cells[idx].status != CellStatus::Converged) continue;
      for (int n : neighbours(ks.cells[idx].iy, ks.cells[idx].it, c)) {
        if (ks.cells[n].wave < 0) next.push_back(n);
      }
    }
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    seeds.assign(next.size(), {});
    for (std::size_t i = 0; i < next.size(); ++i) {
      const auto& cell = ks.cells[next[i]];
      for (int n : neighbours(cell.iy, cell.it, c)) {
        if (ks.cells[n].status == CellStatus::Converged) {
          seeds[i].push_back(guess_from_record(*ks.cells[n].record));
        }
      }
    }
    wave = std::move(next);
  }
  return ks;
}

std::optional<FixedPointRecord> solve_warm(double y, double thd, double kappa,
                                           const FixedPointGuess& seed, const ModelParams& params,
                                           TrackPoint& point) {
  CellOutcome out = solve_cell(y, thd, kappa, {seed}, params);
  point.kappa = kappa;
  point.failure = out.failure;
  point.message = out.message;
  point.record = out.record;
  return out.record;
}

// Warm start from `from`; if the direct jump fails, retries through 2, 4, ...
// geometric intermediate kappas.
bool continue_to(double y, double thd, const FixedPointRecord& from, double kappa,
                 const ModelParams& params, int levels, TrackPoint& point) {
  if (solve_warm(y, thd, kappa, guess_from_record(from), params, point)) return true;
  const TrackPoint direct = point;
  for (int level = 1; level <= levels; ++level) {
    const int n = 1 << level;
    FixedPointRecord prev = from;
    bool ok = true;
    for (int s = 1; s <= n && ok; ++s) {
      const double k = from.kappa * std::pow(kappa / from.kappa, static_cast<double>(s) / n);
      ok = solve_warm(y, thd, s == n ? kappa : k, guess_from_record(prev), params, point).has_value();
      if (ok) prev = *point.record;
    }
    if (ok) return true;
  }
  point = direct;
  return false;
}

void refine(ContinuationTrack& track, const ModelParams& params, int steps) {
  std::vector<TrackPoint> extra;
  for (std::size_t i = 0; i + 1 < track.points.size(); ++i) {
    TrackPoint lo = track.points[i];
    TrackPoint hi = track.points[i + 1];
    if (!lo.record || !hi.record || lo.record->criteria.stable == hi.record->criteria.stable) {
      continue;
    }
    for (int s = 0; s < steps; ++s) {
      TrackPoint mid;
      const double k = std::sqrt(lo.kappa * hi.kappa);
      if (!solve_warm(track.anchor.y_star, track.anchor.thetadot_star, k,
                      guess_from_record(*lo.record), params, mid)) {
        break;
      }
      extra.push_back(mid);
      (mid.record->criteria.stable == lo.record->criteria.stable ? lo : hi) = mid;
    }
  }
  track.points.insert(track.points.end(), extra.begin(), extra.end());
  std::sort(track.points.begin(), track.points.end(),
            [](const TrackPoint& a, const TrackPoint& b) { return a.kappa < b.kappa; });
}

void csv_opt(std::ostream& out, const std::optional<FailureKind>& f) {
  if (f) out << failure_kind_name(*f);
}

}  // namespace

int GridRange::nearest(double v) const {
  const double i = std::round((v - min) / step());
  return static_cast<int>(std::clamp(i, 0.0, static_cast<double>(n - 1)));
}

const char* seed_strategy_name(SeedStrategy s) {
  switch (s) {
    case SeedStrategy::FromNeighbor:
      return "FromNeighbor";
    case SeedStrategy::FromFile:
      return "FromFile";
    case SeedStrategy::Fixed:
      return "Fixed";
  }
  return "?";
}

SeedStrategy seed_strategy_from_name(const std::string& name) {
  for (auto s : {SeedStrategy::FromNeighbor, SeedStrategy::FromFile, SeedStrategy::Fixed}) {
    if (name == seed_strategy_name(s)) return s;
  }
  throw std::invalid_argument("unknown seed strategy '" + name + "'");
}

const char* cell_status_name(CellStatus s) {
  switch (s) {
    case CellStatus::Converged:
      return "converged";
    case CellStatus::Failed:
      return "failed";
    case CellStatus::Unreached:
      return "unreached";
  }
  return "?";
}

void SweepConfig::validate() const {
  validate_range(y_range, "y_range");
  validate_range(thetadot_range, "thetadot_range");
  if (kappa_list.empty()) throw std::invalid_argument("kappa_list is empty");
  for (double k : kappa_list) {
    if (!(k >= 1.0)) throw std::invalid_argument("kappa values must be >= 1");
  }
  if (worker_count < 1) throw std::invalid_argument("worker_count must be positive");
  if (seed_strategy == SeedStrategy::Fixed && !fixed_guess) {
    throw std::invalid_argument("Fixed seed strategy needs a guess");
  }
  if (seed_strategy != SeedStrategy::Fixed && anchors.empty() &&
      (seed_strategy != SeedStrategy::FromFile || seed_records.empty())) {
    throw std::invalid_argument("neighbour seeding needs at least one anchor");
  }
}

int KappaSweep::converged() const {
  return static_cast<int>(std::count_if(cells.begin(), cells.end(), [](const CellOutcome& c) {
    return c.status == CellStatus::Converged;
  }));
}

int KappaSweep::failed() const {
  return static_cast<int>(std::count_if(cells.begin(), cells.end(), [](const CellOutcome& c) {
    return c.status == CellStatus::Failed;
  }));
}

std::vector<FixedPointRecord> SweepResult::records() const {
  std::vector<FixedPointRecord> out;
  for (const auto& s : sweeps) {
    for (const auto& c : s.cells) {
      if (c.record) out.push_back(*c.record);
    }
  }
  return out;
}

double SweepResult::cell_area() const {
  return config.y_range.step() * config.thetadot_range.step();
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& task) {
  const std::size_t n_threads = std::min<std::size_t>(std::max(workers, 1), count);
  if (n_threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  for (std::size_t w = 0; w < n_threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count && !failed; i = next++) {
        try {
          task(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

CellOutcome solve_cell(double y_star, double thetadot_star, double kappa,
                       const std::vector<FixedPointGuess>& seeds, const ModelParams& params) {
  CellOutcome last = failure(FailureKind::NewtonDivergence, "no seed available");
  for (const auto& seed : seeds) {
    try {
      FixedPointRecord rec = find_fixed_point(y_star, thetadot_star, kappa, seed, params);
      CellOutcome ok;
      ok.status = CellStatus::Converged;
      ok.record = evaluate_record(std::move(rec), params);
      return ok;
    } catch (const SolverError& e) {
      last = failure(e.kind(), e.what());
      if (e.kind() == FailureKind::InfeasibleEnergy) break;
    } catch (const std::invalid_argument& e) {
      last = failure(FailureKind::Consistency, e.what());
    }
  }
  return last;
}

SweepResult run_grid_sweep(const SweepConfig& config, const ModelParams& params,
                           const SweepProgress& progress) {
  config.validate();
  params.validate();
  SweepResult result;
  result.config = config;
  result.params = params;
  for (double kappa : config.kappa_list) {
    result.sweeps.push_back(sweep_one_kappa(config, kappa, params, progress));
    if (result.sweeps.back().converged() == 0) {
      std::ostringstream msg;
      msg << "no converged cells at kappa=" << std::setprecision(17) << kappa;
      result.warnings.push_back(msg.str());
    }
  }
  return result;
}

std::optional<std::pair<double, double>> ContinuationTrack::stability_loss() const {
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    if (points[i].record && points[i + 1].record && points[i].record->criteria.stable &&
        !points[i + 1].record->criteria.stable) {
      return std::make_pair(points[i].kappa, points[i + 1].kappa);
    }
  }
  return std::nullopt;
}

std::vector<TrackAnchor> named_anchors() {
  return {{"a1", {0.69, -1.0}}, {"a2", {0.67, -1.0}}, {"a3", {0.65, -1.0}}, {"a4", {0.67, -1.5}},
          {"b1", {0.69, 1.0}},  {"b2", {0.67, 1.0}},  {"b3", {0.65, 1.0}},  {"b4", {0.67, 1.5}}};
}

TrackAnchor named_anchor(const std::string& label) {
  for (const auto& a : named_anchors()) {
    if (a.label == label) return a;
  }
  throw std::invalid_argument("unknown solution label '" + label + "'");
}

std::vector<double> geometric_kappas(double lo, double hi, int n) {
  if (n < 2 || !(lo > 0.0) || !(hi > lo)) throw std::invalid_argument("bad kappa range");
  std::vector<double> out(n);
  const double r = std::log(hi / lo);
  for (int i = 0; i < n; ++i) out[i] = lo * std::exp(r * i / (n - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<ContinuationTrack> run_continuation(const std::vector<TrackAnchor>& anchors,
                                                const std::vector<double>& kappa_samples,
                                                const ModelParams& params,
                                                const ContinuationOptions& options) {
  if (kappa_samples.empty()) throw std::invalid_argument("no kappa samples");
  std::vector<double> kappas = kappa_samples;
  std::sort(kappas.begin(), kappas.end());
  std::vector<ContinuationTrack> tracks(anchors.size());
  parallel_for(anchors.size(), options.workers, [&](std::size_t i) {
    auto& track = tracks[i];
    track.label = anchors[i].label;
    track.anchor = anchors[i].anchor;
    const double y = track.anchor.y_star, thd = track.anchor.thetadot_star;

    // Start at the first sample where the symmetric search yields a seed
    // that converges, then walk outwards in both directions.
    std::size_t start = kappas.size();
    TrackPoint first;
    for (std::size_t j = 0; j < kappas.size() && start == kappas.size(); ++j) {
      for (const auto& seed : seed_search(y, thd, kappas[j], params)) {
        if (solve_warm(y, thd, kappas[j], seed, params, first)) {
          start = j;
          break;
        }
      }
    }
    if (start == kappas.size()) {
      TrackPoint none;
      none.kappa = kappas.front();
      none.failure = first.failure ? first.failure : FailureKind::NewtonDivergence;
      none.message = first.failure ? first.message : "no symmetric seed at any kappa sample";
      track.points.push_back(none);
      return;
    }
    track.points.push_back(first);
    auto walk = [&](int direction, int options_substeps) {
      FixedPointRecord prev = *first.record;
      for (auto j = static_cast<std::ptrdiff_t>(start) + direction;
           j >= 0 && j < static_cast<std::ptrdiff_t>(kappas.size()); j += direction) {
        TrackPoint point;
        if (!continue_to(y, thd, prev, kappas[j], params, options_substeps, point)) {
          track.points.push_back(point);
          return;
        }
        track.points.push_back(point);
        prev = *point.record;
      }
    };
    walk(+1, options.substep_levels);
    walk(-1, options.substep_levels);
    std::sort(track.points.begin(), track.points.end(),
              [](const TrackPoint& a, const TrackPoint& b) { return a.kappa < b.kappa; });
    refine(track, params, options.refine_steps);
  });
  return tracks;
}

json sweep_config_to_json(const SweepConfig& c) {
  json anchors = json::array();
  for (const auto& a : c.anchors) anchors.push_back({a.y_star, a.thetadot_star});
  json j = {{"y_range", range_to_json(c.y_range)},
            {"thetadot_range", range_to_json(c.thetadot_range)},
            {"kappa_list", c.kappa_list},
            {"seed_strategy", seed_strategy_name(c.seed_strategy)},
            {"anchors", anchors},
            {"worker_count", c.worker_count}};
  if (c.fixed_guess) j["fixed_guess"] = guess_to_json(*c.fixed_guess);
  return j;
}

SweepConfig sweep_config_from_json(const json& j) {
  SweepConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "y_range") {
      c.y_range = range_from_json(value);
    } else if (key == "thetadot_range") {
      c.thetadot_range = range_from_json(value);
    } else if (key == "kappa_list") {
      c.kappa_list = value.get<std::vector<double>>();
    } else if (key == "seed_strategy") {
      c.seed_strategy = seed_strategy_from_name(value.get<std::string>());
    } else if (key == "anchors") {
      c.anchors.clear();
      for (const auto& a : value) c.anchors.push_back({a.at(0).get<double>(), a.at(1).get<double>()});
    } else if (key == "worker_count") {
      c.worker_count = value.get<int>();
    } else if (key == "fixed_guess") {
      c.fixed_guess = guess_from_json(value);
    } else {
      throw std::invalid_argument("unknown sweep key '" + key + "'");
    }
  }
  return c;
}

json sweep_metadata(const SweepResult& r, const std::string& tool_version) {
  json per_kappa = json::array();
  for (const auto& s : r.sweeps) {
    per_kappa.push_back({{"kappa", s.kappa},
                         {"converged", s.converged()},
                         {"failed", s.failed()},
                         {"unreached",
                          static_cast<int>(s.cells.size()) - s.converged() - s.failed()}});
  }
  return {{"tool_version", tool_version},
          {"config", sweep_config_to_json(r.config)},
          {"params", params_to_json(r.params)},
          {"seed_order", "synchronous 4-neighbour waves from anchors; seeds in cell-index order"},
          {"cell_area", r.cell_area()},
          {"per_kappa", per_kappa},
          {"warnings", r.warnings}};
}

void write_records_jsonl(std::ostream& out, const std::vector<FixedPointRecord>& records) {
  for (const auto& r : records) out << record_to_json(r).dump() << '\n';
}

std::vector<FixedPointRecord> read_records_jsonl(std::istream& in) {
  std::vector<FixedPointRecord> out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(record_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw std::invalid_argument("records line " + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

void write_cells_csv(std::ostream& out, const SweepResult& r) {
  out << std::setprecision(17);
  out << "kappa,iy,it,y_star,thetadot_star,status,failure,wave,type,phi_star,max_grf,"
         "avg_velocity,max_abs_eigenvalue,stable\n";
  for (const auto& s : r.sweeps) {
    for (const auto& c : s.cells) {
      out << s.kappa << ',' << c.iy << ',' << c.it << ',' << r.config.y_range.at(c.iy) << ','
          << r.config.thetadot_range.at(c.it) << ',' << cell_status_name(c.status) << ',';
      csv_opt(out, c.failure);
      out << ',' << c.wave << ',';
      if (c.record) {
        const auto& k = c.record->criteria;
        out << solution_type_name(c.record->solution_type) << ',' << c.record->z_star.phi << ','
            << k.max_grf << ',' << k.avg_velocity << ',' << k.max_abs_eigenvalue << ','
            << (k.stable ? 1 : 0);
      } else {
        out << ",,,,,";
      }
      out << '\n';
    }
  }
}

void write_tracks_csv(std::ostream& out, const std::vector<ContinuationTrack>& tracks) {
  out << std::setprecision(17);
  out << "label,kappa,status,failure,type,y_star,thetadot_star,phi_star,max_grf,avg_velocity,"
         "max_abs_eigenvalue,stable,phi_td1,psi_td1\n";
  for (const auto& t : tracks) {
    for (const auto& p : t.points) {
      out << t.label << ',' << p.kappa << ',' << (p.record ? "converged" : "failed") << ',';
      csv_opt(out, p.failure);
      out << ',';
      if (p.record) {
        const auto& k = p.record->criteria;
        out << solution_type_name(p.record->solution_type) << ',' << p.record->y_star << ','
            << p.record->thetadot_star << ',' << p.record->z_star.phi << ',' << k.max_grf << ','
            << k.avg_velocity << ',' << k.max_abs_eigenvalue << ',' << (k.stable ? 1 : 0) << ','
            << k.phi_td1 << ',' << k.psi_td1;
      } else {
        out << ',' << t.anchor.y_star << ',' << t.anchor.thetadot_star << ",,,,,,,";
      }
      out << '\n';
    }
  }
}

}  // namespace spinebound
