#include "recbf/recbf.h"

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <memory>
#include <string>

#include "recbf/config.hpp"
#include "recbf/error.hpp"
#include "recbf/experiments.hpp"
#include "recbf/filter.hpp"

struct recbf_system {
  recbf::SystemConfig config;
  std::shared_ptr<const recbf::ControlAffineSystem> system;
};

struct recbf_barrier {
  std::shared_ptr<const recbf::Barrier> barrier;
};

namespace {

thread_local std::string g_last_error;

recbf_status status_of(recbf::ErrorCode code) {
  switch (code) {
    case recbf::ErrorCode::InvalidArgument: return RECBF_ERR_INVALID_ARGUMENT;
    case recbf::ErrorCode::NonFiniteEvaluation: return RECBF_ERR_NON_FINITE;
    case recbf::ErrorCode::NestingDepthExceeded: return RECBF_ERR_NESTING_DEPTH;
    case recbf::ErrorCode::UnknownSystem: return RECBF_ERR_UNKNOWN_SYSTEM;
    case recbf::ErrorCode::WrongSystem: return RECBF_ERR_WRONG_SYSTEM;
    case recbf::ErrorCode::UnknownExperiment: return RECBF_ERR_UNKNOWN_EXPERIMENT;
    case recbf::ErrorCode::Config: return RECBF_ERR_CONFIG;
    case recbf::ErrorCode::Io: return RECBF_ERR_IO;
  }
  return RECBF_ERR_INTERNAL;
}

template <class F>
recbf_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return RECBF_OK;
  } catch (const recbf::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return RECBF_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return RECBF_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw recbf::Error(recbf::ErrorCode::InvalidArgument, what);
}

std::filesystem::path output_root(const char* out_root, const recbf::RunConfig& cfg) {
  if (out_root && *out_root) return out_root;
  if (const char* env = std::getenv("RECBF_OUT"); env && *env) return env;
  return cfg.output;
}

void print_trajectories(const recbf::RunResult& r) {
  using recbf::format_real;
  for (std::size_t i = 0; i < r.trajectories.size(); ++i) {
    const recbf::Trajectory& t = r.trajectories[i];
    const double end = t.times.empty() ? 0.0 : t.times.back();
    std::printf("trajectory %zu: %s at t=%s min_h=%s min_psi=%s max|u|=%s\n", i,
                std::string(recbf::to_string(t.termination)).c_str(),
                format_real(t.termination == recbf::Termination::Completed ? end : t.termination_time).c_str(),
                format_real(t.min_h()).c_str(), format_real(t.min_psi()).c_str(),
                format_real(t.max_input_norm).c_str());
  }
}

void print_reports(const recbf::RunResult& r) {
  for (const auto& rep : r.reports) {
    std::printf("%s: %s (%zu violations, %zu indeterminate, %zu grid points)\n", rep.condition.c_str(),
                rep.passed ? "PASS" : "FAIL", rep.violations.size(), rep.indeterminate.size(), rep.grid.size());
  }
}

int jobs_of(int jobs) { return jobs < 1 ? 1 : jobs; }

// Runs a command body, mapping failures to the usage exit code.
template <class F>
int command(const char* name, F&& body) {
  int code = RECBF_EXIT_USAGE;
  const recbf_status st = guarded([&] { code = body(); });
  if (st != RECBF_OK) {
    std::fprintf(stderr, "recbf %s: %s: %s\n", name, recbf_status_string(st), g_last_error.c_str());
    return RECBF_EXIT_USAGE;
  }
  std::fflush(stdout);
  return code;
}

}  // namespace

extern "C" {

const char* recbf_version(void) { return "1.0.0"; }

const char* recbf_status_string(recbf_status status) {
  switch (status) {
    case RECBF_OK: return "ok";
    case RECBF_ERR_INVALID_ARGUMENT: return "invalid argument";
    case RECBF_ERR_NON_FINITE: return "non-finite evaluation";
    case RECBF_ERR_NESTING_DEPTH: return "nesting depth exceeded";
    case RECBF_ERR_UNKNOWN_SYSTEM: return "unknown system";
    case RECBF_ERR_WRONG_SYSTEM: return "wrong system";
    case RECBF_ERR_UNKNOWN_EXPERIMENT: return "unknown experiment";
    case RECBF_ERR_CONFIG: return "config error";
    case RECBF_ERR_IO: return "i/o error";
    case RECBF_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* recbf_last_error(void) { return g_last_error.c_str(); }

recbf_status recbf_system_builtin(const char* name, recbf_system** out) {
  return guarded([&] {
    require(name && out, "null argument");
    *out = nullptr;
    auto handle = std::make_unique<recbf_system>();
    handle->config.builtin = name;
    handle->system = recbf::build_system(handle->config, nullptr, nullptr);
    *out = handle.release();
  });
}

recbf_status recbf_system_from_json(const char* json, recbf_system** out) {
  return guarded([&] {
    require(json && out, "null argument");
    *out = nullptr;
    const recbf::RunConfig cfg = recbf::parse_run_config(std::string("{\"system\": ") + json + "}");
    auto handle = std::make_unique<recbf_system>();
    handle->config = cfg.system;
    handle->system = recbf::build_system(handle->config, nullptr, nullptr);
    *out = handle.release();
  });
}

void recbf_system_free(recbf_system* sys) { delete sys; }

recbf_status recbf_system_dims(const recbf_system* sys, size_t* n, size_t* m) {
  return guarded([&] {
    require(sys && n && m, "null argument");
    *n = sys->system->state_dim();
    *m = sys->system->input_dim();
  });
}

recbf_status recbf_system_dynamics(const recbf_system* sys, const double* x, size_t n, const double* u,
                                   size_t m, double* dx) {
  return guarded([&] {
    require(sys && x && u && dx, "null argument");
    require(n == sys->system->state_dim() && m == sys->system->input_dim(), "dimension mismatch");
    const auto v = sys->system->dynamics({x, n}, {u, m});
    std::copy(v.begin(), v.end(), dx);
  });
}

recbf_status recbf_barrier_create(const recbf_system* sys, const char* json, recbf_barrier** out) {
  return guarded([&] {
    require(sys && out, "null argument");
    *out = nullptr;
    const std::string body = json && *json ? json : "{}";
    const recbf::RunConfig cfg = recbf::parse_run_config("{\"barrier\": " + body + "}");
    recbf::BarrierSpec defaults;
    recbf::ConstraintFn constraint;
    auto system = recbf::build_system(sys->config, &constraint, &defaults);
    auto handle = std::make_unique<recbf_barrier>();
    handle->barrier =
        std::make_shared<const recbf::Barrier>(recbf::build_barrier_spec(cfg.barrier, defaults), system);
    *out = handle.release();
  });
}

void recbf_barrier_free(recbf_barrier* barrier) { delete barrier; }

recbf_status recbf_barrier_eval(const recbf_barrier* barrier, const double* x, size_t n, double* h, double* lf,
                                double* lg, size_t m) {
  return guarded([&] {
    require(barrier && x && h, "null argument");
    const recbf::Barrier& b = *barrier->barrier;
    require(n == b.system().state_dim(), "state dimension mismatch");
    *h = b.value({x, n});
    if (lf || lg) {
      const recbf::LieDerivatives d = b.lie({x, n});
      if (lf) *lf = d.lf;
      if (lg) {
        require(m == d.lg.size(), "input dimension mismatch");
        std::copy(d.lg.begin(), d.lg.end(), lg);
      }
    }
  });
}

recbf_status recbf_barrier_set_value(const recbf_barrier* barrier, const double* x, size_t n, double* value) {
  return guarded([&] {
    require(barrier && x && value, "null argument");
    require(n == barrier->barrier->system().state_dim(), "state dimension mismatch");
    *value = barrier->barrier->set_value({x, n});
  });
}

recbf_status recbf_barrier_psi(const recbf_barrier* barrier, const double* x, size_t n, double* value) {
  return guarded([&] {
    require(barrier && x && value, "null argument");
    require(n == barrier->barrier->system().state_dim(), "state dimension mismatch");
    *value = barrier->barrier->psi({x, n});
  });
}

recbf_filter_options recbf_filter_default_options(void) {
  return recbf_filter_options{RECBF_FILTER_CBF, 1.0, 1e-9};
}

recbf_status recbf_filter(const recbf_barrier* barrier, const recbf_filter_options* options, const double* x,
                          size_t n, const double* u_nom, size_t m, double* u_out, recbf_filter_result* result) {
  return guarded([&] {
    require(barrier && x && u_nom && u_out, "null argument");
    const recbf::Barrier& b = *barrier->barrier;
    require(n == b.system().state_dim() && m == b.system().input_dim(), "dimension mismatch");
    const recbf_filter_options opts = options ? *options : recbf_filter_default_options();
    recbf::FilterConfig cfg;
    cfg.alpha = recbf::ClassKFn::linear(opts.alpha_coeff);
    cfg.mode = opts.mode == RECBF_FILTER_HOCBF ? recbf::FilterConfig::Mode::HOCBF : recbf::FilterConfig::Mode::CBF;
    cfg.zero_tolerance = opts.zero_tolerance;
    const recbf::FilterResult r = recbf::apply_filter(b, cfg, {x, n}, {u_nom, m});
    std::copy(r.u.begin(), r.u.end(), u_out);
    if (result) *result = recbf_filter_result{r.feasible ? 1 : 0, r.active ? 1 : 0, r.margin};
  });
}

int recbf_cmd_simulate(const char* config_path, const char* out_root, int jobs) {
  return command("simulate", [&] {
    require(config_path, "simulate needs --config");
    const recbf::RunConfig cfg = recbf::load_run_config(config_path);
    const recbf::RunResult r = recbf::run(cfg, {true, false, false, jobs_of(jobs)});
    const auto dir = recbf::write_bundle(r, output_root(out_root, cfg));
    print_trajectories(r);
    std::printf("wrote %s\n", dir.string().c_str());
    return r.safety_event() ? RECBF_EXIT_SAFETY_EVENT : RECBF_EXIT_OK;
  });
}

int recbf_cmd_verify(const char* config_path, const char* out_root, int jobs) {
  return command("verify", [&] {
    require(config_path, "verify needs --config");
    const recbf::RunConfig cfg = recbf::load_run_config(config_path);
    if (!cfg.verify) throw recbf::Error(recbf::ErrorCode::Config, "config has no \"verify\" section");
    const recbf::RunResult r = recbf::run(cfg, {false, false, true, jobs_of(jobs)});
    const auto dir = recbf::write_bundle(r, output_root(out_root, cfg));
    print_reports(r);
    std::printf("wrote %s\n", dir.string().c_str());
    return r.verified() ? RECBF_EXIT_OK : RECBF_EXIT_VIOLATIONS;
  });
}

int recbf_cmd_levelset(const char* config_path, const char* out_root, int jobs) {
  return command("levelset", [&] {
    require(config_path, "levelset needs --config");
    const recbf::RunConfig cfg = recbf::load_run_config(config_path);
    const recbf::RunResult r = recbf::run(cfg, {false, true, false, jobs_of(jobs)});
    const auto dir = recbf::write_bundle(r, output_root(out_root, cfg));
    for (const auto& g : r.grids) {
      std::printf("grid %s: %zu of %zu cells with value >= 0\n", g.name.c_str(), g.count_nonnegative(),
                  g.values.size());
    }
    std::printf("wrote %s\n", dir.string().c_str());
    return RECBF_EXIT_OK;
  });
}

int recbf_cmd_reproduce(const char* experiment, const char* out_root, int jobs) {
  return command("reproduce", [&] {
    require(experiment, "reproduce needs an experiment name");
    const recbf::RunConfig cfg = recbf::parse_run_config(recbf::pinned_config(experiment));
    const recbf::RunResult r = recbf::run(cfg, {true, true, true, jobs_of(jobs)});
    const auto dir = recbf::write_bundle(r, output_root(out_root, cfg));
    print_trajectories(r);
    print_reports(r);
    std::printf("wrote %s\n", dir.string().c_str());
    return r.safety_event() ? RECBF_EXIT_SAFETY_EVENT : RECBF_EXIT_OK;
  });
}

const char* recbf_experiment_names(void) {
  static const std::string names = [] {
    std::string s;
    for (const auto& n : recbf::experiment_names()) s += n + "\n";
    return s;
  }();
  return names.c_str();
}

}  // extern "C"
