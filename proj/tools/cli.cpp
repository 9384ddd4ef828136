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

#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "spinebound/analysis.hpp"
#include "spinebound/params.hpp"
#include "spinebound/record.hpp"
#include "spinebound/sim.hpp"
#include "spinebound/solver.hpp"
#include "spinebound/sweep.hpp"

#ifndef SPINEBOUND_VERSION
#define SPINEBOUND_VERSION "0.0.0"
#endif

namespace spinebound::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Invalid input from the user: reported with exit code kUsage and no outputs.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ContinuationSettings {
  std::vector<TrackAnchor> anchors = named_anchors();
  std::vector<double> kappa_samples;  // empty: geometric kappa_min..kappa_max
  double kappa_min = 1.0;
  double kappa_max = 10.0;
  int samples = 21;
  ContinuationOptions options;

  std::vector<double> resolved_samples() const {
    return kappa_samples.empty() ? geometric_kappas(kappa_min, kappa_max, samples) : kappa_samples;
  }
};

struct Settings {
  std::string config_path;
  ModelParams params;
  SweepConfig sweep;
  ContinuationSettings continuation;
  std::string out_dir = ".";
  int workers = std::max(1u, std::thread::hardware_concurrency());
  std::optional<double> kappa;
  std::string seed_file;
};

// Raw flag values; empty optionals were not given.
struct Flags {
  std::string config;
  std::optional<std::string> out;
  std::optional<int> workers;
  std::optional<double> kappa;
  std::string seed_file;
  std::vector<std::string> param_overrides;  // key=value
};

const char* env(const char* name) {
  const char* v = std::getenv(name);
  return v && *v ? v : nullptr;
}

template <class T>
T parse_number(const std::string& text, const std::string& what) {
  std::istringstream in(text);
  T v{};
  in >> v;
  if (in.fail() || !(in >> std::ws).eof()) {
    throw UsageError(what + ": cannot parse '" + text + "'");
  }
  return v;
}

TrackAnchor anchor_from_json(const json& j) {
  if (j.is_string()) return named_anchor(j.get<std::string>());
  return {j.value("label", std::string("anchor")),
          {j.at("y_star").get<double>(), j.at("thetadot_star").get<double>()}};
}

json anchor_to_json(const TrackAnchor& a) {
  return {{"label", a.label}, {"y_star", a.anchor.y_star},
          {"thetadot_star", a.anchor.thetadot_star}};
}

ContinuationSettings continuation_from_json(const json& j) {
  ContinuationSettings c;
  for (const auto& [key, value] : j.items()) {
    if (key == "anchors") {
      c.anchors.clear();
      for (const auto& a : value) c.anchors.push_back(anchor_from_json(a));
    } else if (key == "kappa_samples") {
      c.kappa_samples = value.get<std::vector<double>>();
    } else if (key == "kappa_min") {
      c.kappa_min = value.get<double>();
    } else if (key == "kappa_max") {
      c.kappa_max = value.get<double>();
    } else if (key == "samples") {
      c.samples = value.get<int>();
    } else if (key == "refine_steps") {
      c.options.refine_steps = value.get<int>();
    } else if (key == "substep_levels") {
      c.options.substep_levels = value.get<int>();
    } else {
      throw std::invalid_argument("unknown continuation key '" + key + "'");
    }
  }
  return c;
}

json continuation_to_json(const ContinuationSettings& c) {
  json anchors = json::array();
  for (const auto& a : c.anchors) anchors.push_back(anchor_to_json(a));
  return {{"anchors", anchors},
          {"kappa_samples", c.resolved_samples()},
          {"refine_steps", c.options.refine_steps},
          {"substep_levels", c.options.substep_levels}};
}

void load_config_file(const std::string& path, Settings& s) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("config '" + path + "' is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw UsageError("config '" + path + "' must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "params") {
        s.params = params_from_json(value);
      } else if (key == "sweep") {
        s.sweep = sweep_config_from_json(value);
      } else if (key == "continuation") {
        s.continuation = continuation_from_json(value);
      } else if (key == "out") {
        s.out_dir = value.get<std::string>();
      } else if (key == "workers") {
        s.workers = value.get<int>();
      } else if (key == "seed_file") {
        s.seed_file = value.get<std::string>();
      } else {
        throw std::invalid_argument("unknown top-level key '" + key + "'");
      }
    }
  } catch (const std::exception& e) {
    throw UsageError("config '" + path + "': " + e.what());
  }
}

// file < environment < flags
Settings resolve(const Flags& f) {
  Settings s;
  if (!f.config.empty()) {
    s.config_path = f.config;
  } else if (const char* p = env(kConfigEnv)) {
    s.config_path = p;
  }
  if (!s.config_path.empty()) load_config_file(s.config_path, s);

  if (const char* v = env(kOutEnv)) s.out_dir = v;
  if (const char* v = env(kWorkersEnv)) s.workers = parse_number<int>(v, kWorkersEnv);
  if (const char* v = env(kKappaEnv)) s.kappa = parse_number<double>(v, kKappaEnv);

  if (f.out) s.out_dir = *f.out;
  if (f.workers) s.workers = *f.workers;
  if (f.kappa) s.kappa = *f.kappa;
  if (!f.seed_file.empty()) s.seed_file = f.seed_file;
  for (const auto& kv : f.param_overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--param expects key=value, got '" + kv + "'");
    try {
      set_param(s.params, kv.substr(0, eq), parse_number<double>(kv.substr(eq + 1), kv));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }

  if (s.workers < 1) throw UsageError("workers must be positive");
  if (s.kappa) {
    s.params.kappa = *s.kappa;
    s.sweep.kappa_list = {*s.kappa};
  }
  s.sweep.worker_count = s.workers;
  s.continuation.options.workers = s.workers;
  try {
    s.params.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("invalid parameters: ") + e.what());
  }
  return s;
}

std::vector<FixedPointRecord> load_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open records file '" + path + "'");
  try {
    return read_records_jsonl(in);
  } catch (const std::exception& e) {
    throw UsageError("'" + path + "': " + e.what());
  }
}

// Collects outputs and writes the manifest last.
class Run {
 public:
  Run(std::string command, const Settings& s)
      : command_(std::move(command)), settings_(s), start_(std::chrono::steady_clock::now()) {}

  fs::path path(const std::string& name) const { return fs::path(settings_.out_dir) / name; }

  std::ofstream open(const std::string& name) {
    fs::create_directories(settings_.out_dir);
    const fs::path p = path(name);
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
    outputs_.push_back(p.string());
    out << std::setprecision(17);
    return out;
  }

  json& extra() { return extra_; }

  int finish(int code, const std::string& message = "") {
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    json m = {{"command", command_},
              {"config_path", settings_.config_path},
              {"params", params_to_json(settings_.params)},
              {"out_dir", settings_.out_dir},
              {"workers", settings_.workers},
              {"seed_file", settings_.seed_file},
              {"outputs", outputs_},
              {"wall_time", wall},
              {"tool_version", SPINEBOUND_VERSION},
              {"status", code == kOk ? "ok" : "failed"}};
    if (!message.empty()) m["message"] = message;
    for (const auto& [k, v] : extra_.items()) m[k] = v;
    fs::create_directories(settings_.out_dir);
    std::ofstream(path("manifest.json")) << std::setprecision(17) << m.dump(2) << '\n';
    return code;
  }

 private:
  std::string command_;
  Settings settings_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::string> outputs_;
  json extra_ = json::object();
};

std::string summary_line(const FixedPointRecord& r) {
  std::ostringstream out;
  out << std::setprecision(6) << "type=" << solution_type_name(r.solution_type)
      << " max_grf=" << r.criteria.max_grf << " avg_velocity=" << r.criteria.avg_velocity
      << " max_abs_eigenvalue=" << r.criteria.max_abs_eigenvalue
      << " stable=" << (r.criteria.stable ? "yes" : "no");
  return out.str();
}

std::string kappa_tag(double kappa) {
  std::ostringstream out;
  out << std::setprecision(6) << kappa;
  return out.str();
}

const FixedPointRecord& nearest_record(const std::vector<FixedPointRecord>& records, double y,
                                       double thd, double kappa) {
  auto dist = [&](const FixedPointRecord& r) {
    const double dy = (r.y_star - y) / 0.01, dt = (r.thetadot_star - thd) / 0.1,
                 dk = std::log(r.kappa / kappa) / 0.1;
    return dy * dy + dt * dt + dk * dk;
  };
  return *std::min_element(records.begin(), records.end(),
                           [&](const auto& a, const auto& b) { return dist(a) < dist(b); });
}

// ---- subcommands ----

struct SimulateArgs {
  std::string record;
  int index = 0;
  SectionState z{0.67, 0.0, 0.0, 0.0, 0.0};
  TouchdownAngles td;
  std::optional<double> xdot;
  std::optional<double> duration;
  int profile_points = 201;
};

int cmd_simulate(Settings s, const SimulateArgs& a) {
  ModelParams& p = s.params;
  SectionState z = a.z;
  TouchdownAngles td = a.td;
  if (!a.record.empty()) {
    const auto recs = load_records(a.record);
    if (a.index < 0 || a.index >= static_cast<int>(recs.size())) {
      throw UsageError("record index " + std::to_string(a.index) + " out of range");
    }
    z = recs[a.index].z_star;
    td = recs[a.index].td_angles;
    if (!s.kappa) p.kappa = recs[a.index].kappa;
  }
  HybridState initial;
  if (a.xdot) {
    initial.q = {0.0, z.y, z.theta, z.phi, *a.xdot, 0.0, z.thetadot, z.phidot};
    initial.mode.td_angle = {td.fore, td.hind};
  } else {
    try {
      initial = lift_section(z, td, p);
    } catch (const SolverError& e) {
      throw UsageError(e.what());
    }
  }

  Run run("simulate", s);
  run.extra()["initial_state"] = {{"y", z.y},         {"theta", z.theta},
                                  {"phi", z.phi},     {"thetadot", z.thetadot},
                                  {"phidot", z.phidot}, {"xdot", initial.q.xdot},
                                  {"gamma_fore", td.fore}, {"gamma_hind", td.hind},
                                  {"kappa", p.kappa}};
  Trajectory traj;
  std::string fault;
  bool cycle = false;
  if (a.duration) {
    traj = simulate(initial, p, *a.duration);
    if (traj.faulted()) fault = traj.events.back().reason;
  } else {
    try {
      traj = simulate_until_apex(initial, p).trajectory;
      cycle = true;
    } catch (const SimulationFault& e) {
      fault = e.what();
      traj = simulate(initial, p, SimConfig{}.max_time);
    }
  }
  {
    auto out = run.open("trajectory.csv");
    write_trajectory_csv(out, traj);
  }
  {
    auto out = run.open("events.csv");
    write_events_csv(out, traj);
  }
  if (cycle) {
    auto out = run.open("profile.csv");
    write_profile_csv(out, gait_cycle_profile(traj, a.profile_points));
  }
  if (!fault.empty()) {
    std::cerr << "simulation fault: " << fault << '\n';
    return run.finish(kFailure, "simulation fault: " + fault);
  }
  std::cout << "simulated " << traj.t_end() - traj.t_start() << " s, " << traj.events.size()
            << " events\n";
  return run.finish(kOk);
}

struct SolveArgs {
  double y = 0.67;
  double thetadot = -1.0;
  std::optional<double> guess_phi;
  double guess_gamma_fore = 0.0, guess_gamma_hind = 0.0;
};

int cmd_solve(const Settings& s, const SolveArgs& a) {
  const ModelParams& p = s.params;
  try {
    close_energy({a.y, 0.0, 0.0, a.thetadot, 0.0}, p);
  } catch (const SolverError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    Run run("solve", s);
    return run.finish(kFailure, e.what());
  }
  Run run("solve", s);
  std::optional<FixedPointGuess> guess;
  std::string seed_source;
  if (a.guess_phi) {
    guess = FixedPointGuess{0.0, *a.guess_phi, 0.0, {a.guess_gamma_fore, a.guess_gamma_hind}};
    seed_source = "flags";
  } else if (!s.seed_file.empty()) {
    const auto recs = load_records(s.seed_file);
    if (recs.empty()) throw UsageError("seed file '" + s.seed_file + "' has no records");
    guess = guess_from_record(nearest_record(recs, a.y, a.thetadot, p.kappa));
    seed_source = "seed_file";
  } else {
    guess = symmetric_seed(a.y, a.thetadot, p);
    seed_source = "symmetric_seed";
  }
  run.extra()["seed_source"] = seed_source;
  run.extra()["y_star"] = a.y;
  run.extra()["thetadot_star"] = a.thetadot;
  if (!guess) {
    std::cerr << "no seed found for (" << a.y << ", " << a.thetadot << ")\n";
    return run.finish(kFailure, "no seed found");
  }
  const CellOutcome out = solve_cell(a.y, a.thetadot, p.kappa, {*guess}, p);
  if (!out.record) {
    std::cerr << failure_kind_name(*out.failure) << ": " << out.message << '\n';
    return run.finish(kFailure, std::string(failure_kind_name(*out.failure)) + ": " + out.message);
  }
  {
    auto f = run.open("record.json");
    f << record_to_json(*out.record).dump(2) << '\n';
  }
  {
    auto f = run.open("record.jsonl");
    write_records_jsonl(f, {*out.record});
  }
  std::cout << summary_line(*out.record) << '\n';
  return run.finish(kOk);
}

struct SweepArgs {
  std::string y_range, thetadot_range;
  bool quiet = false;
};

GridRange parse_range(const std::string& text, const std::string& what) {
  std::istringstream in(text);
  GridRange r;
  char c1 = 0, c2 = 0;
  in >> r.min >> c1 >> r.max >> c2 >> r.n;
  if (in.fail() || c1 != ':' || c2 != ':' || !(in >> std::ws).eof()) {
    throw UsageError(what + " expects min:max:n, got '" + text + "'");
  }
  return r;
}

int cmd_sweep(Settings s, const SweepArgs& a) {
  if (!a.y_range.empty()) s.sweep.y_range = parse_range(a.y_range, "--y-range");
  if (!a.thetadot_range.empty()) {
    s.sweep.thetadot_range = parse_range(a.thetadot_range, "--thetadot-range");
  }
  if (!s.seed_file.empty()) {
    s.sweep.seed_strategy = SeedStrategy::FromFile;
    s.sweep.seed_records = load_records(s.seed_file);
  }
  try {
    s.sweep.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("invalid sweep config: ") + e.what());
  }
  Run run("sweep", s);
  const SweepResult result = run_grid_sweep(
      s.sweep, s.params, [&](double kappa, int wave, int attempted, int converged) {
        if (!a.quiet) {
          std::cerr << "kappa=" << kappa << " wave " << wave << ": " << converged << "/"
                    << attempted << " converged\n";
        }
      });
  json counts = json::array();
  for (const auto& ks : result.sweeps) {
    std::vector<FixedPointRecord> recs;
    for (const auto& c : ks.cells) {
      if (c.record) recs.push_back(*c.record);
    }
    auto f = run.open("records_kappa_" + kappa_tag(ks.kappa) + ".jsonl");
    write_records_jsonl(f, recs);
    counts.push_back({{"kappa", ks.kappa},
                      {"converged", ks.converged()},
                      {"failed", ks.failed()},
                      {"cells", ks.cells.size()}});
    std::cout << "kappa=" << ks.kappa << ": " << ks.converged() << " converged, " << ks.failed()
              << " failed of " << ks.cells.size() << " cells\n";
  }
  {
    auto f = run.open("sweep_metadata.json");
    f << sweep_metadata(result, SPINEBOUND_VERSION).dump(2) << '\n';
  }
  {
    auto f = run.open("sweep_cells.csv");
    write_cells_csv(f, result);
  }
  const auto agg = aggregate(result.records(), result.cell_area(),
                             {SolutionType::EG, SolutionType::GE, SolutionType::EE,
                              SolutionType::E});
  {
    auto f = run.open("aggregate.csv");
    write_aggregate_csv(f, agg.rows);
  }
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  run.extra()["cell_counts"] = counts;
  run.extra()["warnings"] = result.warnings;
  run.extra()["aggregate_notes"] = agg.notes;
  run.extra()["sweep"] = sweep_config_to_json(s.sweep);
  return run.finish(kOk);
}

struct ContinueArgs {
  std::vector<std::string> anchors;
  std::vector<double> kappa_samples;
};

int cmd_continue(Settings s, const ContinueArgs& a) {
  auto& c = s.continuation;
  try {
    if (!a.anchors.empty()) {
      c.anchors.clear();
      for (const auto& l : a.anchors) c.anchors.push_back(named_anchor(l));
    }
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (!a.kappa_samples.empty()) c.kappa_samples = a.kappa_samples;
  if (s.kappa) c.kappa_max = *s.kappa;
  std::vector<double> samples;
  try {
    samples = c.resolved_samples();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (c.anchors.empty()) throw UsageError("no continuation anchors");
  for (double k : samples) {
    if (!(k >= 1.0)) throw UsageError("kappa samples must be >= 1");
  }
  Run run("continue", s);
  const auto tracks = run_continuation(c.anchors, samples, s.params, c.options);
  {
    auto f = run.open("tracks.csv");
    write_tracks_csv(f, tracks);
  }
  std::vector<FixedPointRecord> recs;
  json summary = json::array();
  for (const auto& t : tracks) {
    int converged = 0;
    for (const auto& pt : t.points) {
      if (pt.record) {
        recs.push_back(*pt.record);
        ++converged;
      }
    }
    json entry = {{"label", t.label}, {"converged", converged}, {"points", t.points.size()}};
    std::cout << t.label << ": " << converged << "/" << t.points.size() << " converged";
    if (const auto loss = t.stability_loss()) {
      entry["stability_loss"] = {loss->first, loss->second};
      std::cout << ", stability lost in (" << loss->first << ", " << loss->second << ")";
    }
    std::cout << '\n';
    summary.push_back(entry);
  }
  {
    auto f = run.open("tracks_records.jsonl");
    write_records_jsonl(f, recs);
  }
  run.extra()["continuation"] = continuation_to_json(c);
  run.extra()["tracks"] = summary;
  return run.finish(kOk);
}

struct AnalyzeArgs {
  std::vector<std::string> records;
  std::string metadata;
  std::optional<double> cell_area;
};

int cmd_analyze(const Settings& s, const AnalyzeArgs& a) {
  if (a.records.empty()) throw UsageError("analyze needs --records PATH");
  std::vector<FixedPointRecord> recs;
  for (const auto& path : a.records) {
    auto more = load_records(path);
    recs.insert(recs.end(), more.begin(), more.end());
  }
  double area = s.sweep.y_range.step() * s.sweep.thetadot_range.step();
  if (!a.metadata.empty()) {
    std::ifstream in(a.metadata);
    if (!in) throw UsageError("cannot open metadata '" + a.metadata + "'");
    try {
      area = json::parse(in).at("cell_area").get<double>();
    } catch (const json::exception& e) {
      throw UsageError("metadata '" + a.metadata + "': " + e.what());
    }
  }
  if (a.cell_area) area = *a.cell_area;
  Run run("analyze", s);
  run.extra()["records"] = a.records;
  run.extra()["cell_area"] = area;
  if (recs.empty()) {
    std::cerr << "no records in input\n";
    return run.finish(kFailure, "no records");
  }
  const auto agg = aggregate(recs, area,
                             {SolutionType::EG, SolutionType::GE, SolutionType::EE,
                              SolutionType::E});
  {
    auto f = run.open("aggregate.csv");
    write_aggregate_csv(f, agg.rows);
  }
  for (const auto& n : agg.notes) std::cout << "note: " << n << '\n';
  std::cout << recs.size() << " records, " << agg.rows.size() << " groups\n";
  run.extra()["aggregate_notes"] = agg.notes;
  return run.finish(kOk);
}

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config,
                  std::string("JSON config file (default: $") + kConfigEnv + ")");
  sub->add_option("--out", f.out, "output directory");
  sub->add_option("--workers", f.workers, "worker threads")->check(CLI::PositiveNumber);
  sub->add_option("--kappa", f.kappa, "spine stiffness ratio");
  sub->add_option("--seed-file", f.seed_file, "records (JSON lines) used as Newton seeds");
  sub->add_option("--param", f.param_overrides, "model parameter override key=value");
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Periodic bounding gaits of a two-segment spined quadruped model", "spinebound"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SPINEBOUND_VERSION);
  Flags flags;

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "simulate from an apex state");
  add_common(simulate, flags);
  simulate->add_option("--record", sim.record, "records file; simulate its fixed point");
  simulate->add_option("--index", sim.index, "record index in --record");
  simulate->add_option("--y", sim.z.y, "apex height [m]");
  simulate->add_option("--theta", sim.z.theta, "pitch [rad]");
  simulate->add_option("--phi", sim.z.phi, "spine angle [rad]");
  simulate->add_option("--thetadot", sim.z.thetadot, "pitch rate [rad/s]");
  simulate->add_option("--phidot", sim.z.phidot, "spine rate [rad/s]");
  simulate->add_option("--gamma-fore", sim.td.fore, "fore touchdown angle [rad]");
  simulate->add_option("--gamma-hind", sim.td.hind, "hind touchdown angle [rad]");
  simulate->add_option("--xdot", sim.xdot, "forward speed; skips energy closure [m/s]");
  simulate->add_option("--duration", sim.duration, "fixed horizon instead of one apex return [s]")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--profile-points", sim.profile_points, "gait-cycle profile resolution")
      ->check(CLI::Range(2, 100000));

  SolveArgs sol;
  auto* solve = app.add_subcommand("solve", "find one fixed point");
  add_common(solve, flags);
  solve->add_option("--y", sol.y, "apex height y* [m]")->required();
  solve->add_option("--thetadot", sol.thetadot, "pitch rate thetadot* [rad/s]")->required();
  solve->add_option("--guess-phi", sol.guess_phi, "initial phi* (with --guess-gamma-*)");
  solve->add_option("--guess-gamma-fore", sol.guess_gamma_fore, "initial fore touchdown angle");
  solve->add_option("--guess-gamma-hind", sol.guess_gamma_hind, "initial hind touchdown angle");

  SweepArgs swp;
  auto* sweep = app.add_subcommand("sweep", "grid sweep over (y*, thetadot*) per kappa");
  add_common(sweep, flags);
  sweep->add_option("--y-range", swp.y_range, "min:max:n");
  sweep->add_option("--thetadot-range", swp.thetadot_range, "min:max:n");
  sweep->add_flag("--quiet", swp.quiet, "no per-wave progress");

  ContinueArgs cont;
  auto* cont_cmd = app.add_subcommand("continue", "continue named solutions in kappa");
  add_common(cont_cmd, flags);
  cont_cmd->add_option("--anchors", cont.anchors, "labels among a1..a4, b1..b4")->delimiter(',');
  cont_cmd->add_option("--kappa-samples", cont.kappa_samples, "explicit kappa samples")
      ->delimiter(',');

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "aggregate records per (kappa, type)");
  add_common(analyze, flags);
  analyze->add_option("--records", an.records, "records file(s)");
  analyze->add_option("--metadata", an.metadata, "sweep metadata providing the cell area");
  analyze->add_option("--cell-area", an.cell_area, "cell area in y* x thetadot* units");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    const Settings s = resolve(flags);
    if (simulate->parsed()) return cmd_simulate(s, sim);
    if (solve->parsed()) return cmd_solve(s, sol);
    if (sweep->parsed()) return cmd_sweep(s, swp);
    if (cont_cmd->parsed()) return cmd_continue(s, cont);
    return cmd_analyze(s, an);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "failed: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace spinebound::cli
