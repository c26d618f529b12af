#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "recbf/recbf.h"

namespace {

constexpr const char* kUsage =
    "usage: recbf simulate|verify|levelset|reproduce [--config PATH] [--out DIR] [--jobs N]\n"
    "       recbf reproduce <experiment> [--out DIR] [--jobs N]\n";

int usage_error(const std::string& message) {
  std::fprintf(stderr, "recbf: %s\n%s", message.c_str(), kUsage);
  std::fprintf(stderr, "experiments:\n%s", recbf_experiment_names());
  return RECBF_EXIT_USAGE;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rectified control barrier function toolkit", "recbf"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::string experiment;
  int jobs = 1;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", config, "run configuration (JSON)");
    if (needs_config) opt->required();
    sub->add_option("--out", out, "output root; overrides $RECBF_OUT and the config");
    sub->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  };
  CLI::App* simulate = app.add_subcommand("simulate", "simulate the configured initial conditions");
  CLI::App* verify = app.add_subcommand("verify", "run the configured verification checks");
  CLI::App* levels = app.add_subcommand("levelset", "sample the configured level-set grids");
  CLI::App* reproduce = app.add_subcommand("reproduce", "run a pinned experiment");
  add_common(simulate, true);
  add_common(verify, true);
  add_common(levels, true);
  add_common(reproduce, false);
  reproduce->add_option("experiment", experiment, "experiment name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::printf("%s", app.help().c_str());
    return RECBF_EXIT_OK;
  } catch (const CLI::ParseError& e) {
    return usage_error(e.what());
  }

  const char* out_root = out.empty() ? nullptr : out.c_str();
  if (simulate->parsed()) return recbf_cmd_simulate(config.c_str(), out_root, jobs);
  if (verify->parsed()) return recbf_cmd_verify(config.c_str(), out_root, jobs);
  if (levels->parsed()) return recbf_cmd_levelset(config.c_str(), out_root, jobs);
  if (!config.empty()) return usage_error("reproduce takes an experiment name, not --config");
  const int code = recbf_cmd_reproduce(experiment.c_str(), out_root, jobs);
  if (code == RECBF_EXIT_USAGE) std::fprintf(stderr, "%sexperiments:\n%s", kUsage, recbf_experiment_names());
  return code;
}
