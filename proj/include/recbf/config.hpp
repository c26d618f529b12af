#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "recbf/barriers.hpp"
#include "recbf/controllers.hpp"
#include "recbf/filter.hpp"
#include "recbf/sim.hpp"
#include "recbf/systems.hpp"
#include "recbf/verify.hpp"

namespace recbf {

/// {"kind": "linear" | "signed_square", "coeff": c, "epsilon": e}
struct ClassKSpec {
  std::string kind = "linear";
  double coeff = 1.0;
  double epsilon = 0.0;

  ClassKFn to_alpha() const;
  Rectifier to_rectifier() const;
};

struct SystemConfig {
  std::string builtin = "double_integrator";
  AircraftParams aircraft;
  // Polynomial model; used when builtin is empty.
  std::string name;
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<Polynomial> f;
  std::vector<std::vector<Polynomial>> g;
  std::optional<Box> domain;
  // Optional constraint override; required for polynomial models.
  std::optional<Polynomial> constraint;
  int relative_degree = 0;
};

struct VirtualControllerConfig {
  std::string kind = "linear";
  double gain = 0.5;
  double regularization = 0.04;
};

struct BarrierConfig {
  std::optional<std::string> kind;
  std::optional<int> order;
  std::optional<std::vector<ClassKSpec>> alphas;
  std::optional<std::vector<ClassKSpec>> gammas;
  std::optional<VirtualControllerConfig> virtual_controller;
};

struct FilterSettings {
  bool enabled = true;
  std::string mode = "cbf";
  ClassKSpec alpha;
  double zero_tolerance = 1e-9;
};

struct SampleSettings {
  std::size_t count = 0;
  std::string region = "safe";  // "safe", "unsafe" or "any"
  std::optional<Box> box;
};

struct LevelSetSettings {
  std::string name;
  std::optional<BarrierConfig> barrier;
  std::string field = "h";  // "h", "set_value" or "psi"
  GridAxis x_axis;
  GridAxis y_axis;
  std::vector<double> base;
};

struct VerifySettings {
  std::vector<std::string> checks;
  std::size_t resolution = 200;
  std::optional<Box> box;
  ClassKSpec alpha;
  int relative_degree = 0;  // 0: the constraint's declared degree
  double epsilon = 0.0;
  bool restrict_to_safe_set = false;
  VerifyTolerances tolerances;
};

struct RunConfig {
  std::string experiment = "run";
  std::uint64_t seed = 0;
  std::string output = "out";
  SystemConfig system;
  BarrierConfig barrier;
  FilterSettings filter;
  NominalSpec nominal;
  SimConfig sim;
  std::vector<std::vector<double>> initial_conditions;
  SampleSettings sample;
  std::vector<LevelSetSettings> levelsets;
  std::optional<VerifySettings> verify;
};

/// Parses a run config; unknown keys and malformed values throw Config.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);
/// Canonical JSON for a config; parse_run_config(to_json(c)) reproduces c.
std::string to_json(const RunConfig& config);

/// Fully built objects for a config.
struct Scenario {
  std::shared_ptr<const ControlAffineSystem> system;
  ConstraintFn constraint;
  std::shared_ptr<const Barrier> barrier;
  FilterConfig filter;
  Controller controller;
  Monitor monitor;
};

std::shared_ptr<const ControlAffineSystem> build_system(const SystemConfig& cfg,
                                                        ConstraintFn* constraint,
                                                        BarrierSpec* default_barrier);
BarrierSpec build_barrier_spec(const BarrierConfig& cfg, const BarrierSpec& defaults);
Scenario build_scenario(const RunConfig& config);

/// Explicit initial conditions followed by seeded rejection samples.
std::vector<std::vector<double>> resolve_initial_conditions(const RunConfig& config,
                                                            const Scenario& scenario);

}  // namespace recbf
