#include "recbf/experiments.hpp"

#include <algorithm>
#include <fstream>
#include <utility>

#include "json.hpp"
#include "recbf/error.hpp"

namespace recbf {

namespace {

struct Pinned {
  const char* name;
  const char* json;
};

const Pinned kPinned[] = {
#include "pinned_configs.inc"
};

using OJson = nlohmann::ordered_json;

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out = open_out(path);
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

std::string trajectory_file(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "traj_%03zu.csv", i);
  return buf;
}

// Non-finite values become strings so the JSON stays valid.
OJson real(double v) {
  if (std::isfinite(v)) return v;
  return format_real(v);
}

std::function<double(std::span<const double>)> field_of(std::shared_ptr<const Barrier> b,
                                                        const std::string& field) {
  if (field == "psi") return [b](std::span<const double> x) { return b->psi(x); };
  if (field == "set_value") return [b](std::span<const double> x) { return b->set_value(x); };
  return [b](std::span<const double> x) { return b->value(x); };
}

}  // namespace

bool RunResult::safety_event() const {
  return std::any_of(trajectories.begin(), trajectories.end(),
                     [](const Trajectory& t) { return t.termination != Termination::Completed; });
}

bool RunResult::verified() const {
  return std::all_of(reports.begin(), reports.end(), [](const VerifyReport& r) { return r.passed; });
}

std::vector<LevelSetGrid> compute_levelsets(const RunConfig& config, const Scenario& scenario) {
  std::vector<LevelSetGrid> grids;
  const std::size_t n = scenario.system->state_dim();
  for (const auto& ls : config.levelsets) {
    std::shared_ptr<const Barrier> barrier = scenario.barrier;
    if (ls.barrier) {
      BarrierSpec defaults;
      ConstraintFn constraint;
      build_system(config.system, &constraint, &defaults);
      barrier = std::make_shared<const Barrier>(build_barrier_spec(*ls.barrier, defaults), scenario.system);
    }
    if (ls.x_axis.coordinate >= n || ls.y_axis.coordinate >= n) {
      throw Error(ErrorCode::Config, "level set '" + ls.name + "' names a coordinate outside the state");
    }
    std::vector<double> base = ls.base.empty() ? std::vector<double>(n, 0.0) : ls.base;
    if (base.size() != n) throw Error(ErrorCode::Config, "level set '" + ls.name + "' base has wrong dimension");
    grids.push_back(levelset(field_of(barrier, ls.field), ls.name, ls.x_axis, ls.y_axis, std::move(base)));
  }
  return grids;
}

std::vector<VerifyReport> run_verification(const RunConfig& config, const Scenario& scenario, int jobs) {
  std::vector<VerifyReport> reports;
  if (!config.verify) return reports;
  const VerifySettings& v = *config.verify;
  const GridSpec grid = v.box ? make_grid(*v.box, v.resolution) : default_grid(*scenario.barrier, v.resolution);
  const ClassKFn alpha = v.alpha.to_alpha();
  const int r = v.relative_degree > 0 ? v.relative_degree : scenario.constraint.relative_degree;
  for (const auto& check : v.checks) {
    if (check == "relative_degree") {
      reports.push_back(check_relative_degree(*scenario.system, scenario.constraint, r, grid, v.tolerances, jobs));
    } else if (check == "theorem1") {
      reports.push_back(
          check_theorem1(*scenario.system, scenario.constraint, alpha, grid, v.epsilon, v.tolerances, jobs));
    } else if (check == "theorem2") {
      reports.push_back(check_theorem2(*scenario.system, scenario.constraint, alpha, grid, v.tolerances, jobs));
    } else if (check == "theorem3") {
      reports.push_back(check_theorem3(scenario.system, scenario.barrier->spec(), grid, v.tolerances, jobs));
    } else if (check == "lemma1") {
      reports.push_back(
          check_lemma1(*scenario.barrier, alpha, grid, v.tolerances, v.restrict_to_safe_set, jobs));
    } else {
      throw Error(ErrorCode::Config, "unknown check '" + check + "'");
    }
  }
  return reports;
}

RunResult run(const RunConfig& config, const RunOptions& options) {
  RunResult result;
  result.config = config;
  const Scenario scenario = build_scenario(config);
  if (options.simulate) {
    result.initial_conditions = resolve_initial_conditions(config, scenario);
    result.trajectories = sweep(*scenario.system, scenario.controller, config.sim, result.initial_conditions,
                                scenario.monitor, options.jobs);
  }
  if (options.levelsets) result.grids = compute_levelsets(config, scenario);
  if (options.verify) result.reports = run_verification(config, scenario, options.jobs);
  return result;
}

std::string events_json(const RunResult& result) {
  OJson j;
  j["experiment"] = result.config.experiment;
  OJson list = OJson::array();
  for (std::size_t i = 0; i < result.trajectories.size(); ++i) {
    const Trajectory& t = result.trajectories[i];
    OJson e;
    e["index"] = i;
    e["file"] = "trajectories/" + trajectory_file(i);
    e["x0"] = result.initial_conditions[i];
    e["termination"] = std::string(to_string(t.termination));
    e["failure_time"] = t.termination == Termination::Completed ? OJson(nullptr) : real(t.termination_time);
    e["final_time"] = t.times.empty() ? OJson(nullptr) : real(t.times.back());
    e["max_input_norm"] = real(t.max_input_norm);
    e["min_h"] = real(t.min_h());
    e["min_psi"] = real(t.min_psi());
    e["final_h"] = t.h_values.empty() ? OJson(nullptr) : real(t.h_values.back());
    std::size_t active = 0;
    for (const auto& ev : t.events) active += ev == "active" ? 1 : 0;
    e["active_rows"] = active;
    list.push_back(std::move(e));
  }
  j["trajectories"] = std::move(list);
  j["safety_event"] = result.safety_event();
  return j.dump(2) + "\n";
}

std::filesystem::path write_bundle(const RunResult& result, const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  const fs::path dir = root / result.config.experiment;
  std::error_code ec;
  fs::create_directories(dir / "trajectories", ec);
  if (!ec) fs::create_directories(dir / "grids", ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create '" + dir.string() + "': " + ec.message());
  write_text(dir / "config.json", to_json(result.config));
  write_text(dir / "events.json", events_json(result));
  for (std::size_t i = 0; i < result.trajectories.size(); ++i) {
    std::ofstream out = open_out(dir / "trajectories" / trajectory_file(i));
    write_trajectory_csv(out, result.trajectories[i]);
  }
  for (const auto& g : result.grids) {
    std::ofstream out = open_out(dir / "grids" / (g.name + ".csv"));
    write_grid_csv(out, g);
    write_text(dir / "grids" / (g.name + ".json"), grid_metadata_json(g));
  }
  if (!result.reports.empty()) {
    fs::create_directories(dir / "verify", ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create verify directory: " + ec.message());
    for (const auto& r : result.reports) write_text(dir / "verify" / (r.condition + ".json"), r.to_json());
  }
  return dir;
}

std::vector<std::string> experiment_names() {
  std::vector<std::string> names;
  for (const auto& p : kPinned) names.emplace_back(p.name);
  return names;
}

std::string pinned_config(std::string_view name) {
  for (const auto& p : kPinned) {
    if (name == p.name) return p.json;
  }
  throw Error(ErrorCode::UnknownExperiment, "unknown experiment '" + std::string(name) + "'");
}

}  // namespace recbf
