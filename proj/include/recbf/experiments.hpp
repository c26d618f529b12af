#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "recbf/config.hpp"
#include "recbf/sim.hpp"
#include "recbf/verify.hpp"

namespace recbf {

struct RunOptions {
  bool simulate = true;
  bool levelsets = true;
  bool verify = true;
  int jobs = 1;
};

struct RunResult {
  RunConfig config;
  std::vector<std::vector<double>> initial_conditions;
  std::vector<Trajectory> trajectories;
  std::vector<LevelSetGrid> grids;
  std::vector<VerifyReport> reports;

  /// Some trajectory ended with an escape or an infeasible filter.
  bool safety_event() const;
  /// Every verification report passed.
  bool verified() const;
};

/// Simulates the initial conditions, samples the level sets and runs the
/// verification checks that the options enable.
RunResult run(const RunConfig& config, const RunOptions& options = {});

std::vector<LevelSetGrid> compute_levelsets(const RunConfig& config, const Scenario& scenario);
std::vector<VerifyReport> run_verification(const RunConfig& config, const Scenario& scenario, int jobs = 1);

/// Writes <root>/<experiment>/{config.json, events.json, trajectories/,
/// grids/, verify/}; returns the experiment directory.
std::filesystem::path write_bundle(const RunResult& result, const std::filesystem::path& root);

/// JSON summary of every trajectory: termination, failure time, extrema.
std::string events_json(const RunResult& result);

/// Names of the pinned reproductions, in a fixed order.
std::vector<std::string> experiment_names();

/// Pinned configuration text; throws UnknownExperiment.
std::string pinned_config(std::string_view name);

}  // namespace recbf
