#include "recbf/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <ostream>
#include <thread>

#include "json.hpp"

#include "recbf/error.hpp"

namespace recbf {

namespace {

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double e : v) s += e * e;
  return std::sqrt(s);
}

bool finite_all(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double e) { return std::isfinite(e); });
}

enum class StageStatus { Ok, Escape, Infeasible };

struct Stage {
  StageStatus status = StageStatus::Ok;
  std::vector<double> dx;
  ControlOutput control;
};

class Stepper {
 public:
  Stepper(const ControlAffineSystem& sys, const Controller& controller, const SimConfig& cfg)
      : sys_(sys), controller_(controller), cfg_(cfg) {}

  double max_input_norm = 0.0;

  Stage evaluate(double t, std::span<const double> x) {
    Stage s;
    if (!finite_all(x) || norm(x) > cfg_.blowup_state) {
      s.status = StageStatus::Escape;
      return s;
    }
    try {
      s.control = controller_(t, x);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonFiniteEvaluation) throw;
      s.status = StageStatus::Escape;
      s.control.u.assign(sys_.input_dim(), std::numeric_limits<double>::quiet_NaN());
      max_input_norm = std::numeric_limits<double>::infinity();
      return s;
    }
    if (s.control.u.size() != sys_.input_dim()) {
      throw Error(ErrorCode::InvalidArgument, "controller returned wrong input dimension");
    }
    const double un = norm(s.control.u);
    max_input_norm = std::max(max_input_norm, std::isfinite(un) ? un : INFINITY);
    if (!s.control.feasible) {
      s.status = StageStatus::Infeasible;
      return s;
    }
    if (!std::isfinite(un) || un > cfg_.blowup_input) {
      s.status = StageStatus::Escape;
      return s;
    }
    s.dx = sys_.dynamics(x, s.control.u);
    if (!finite_all(s.dx)) s.status = StageStatus::Escape;
    return s;
  }

 private:
  const ControlAffineSystem& sys_;
  const Controller& controller_;
  const SimConfig& cfg_;
};

void validate(const SimConfig& cfg) {
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) {
    throw Error(ErrorCode::InvalidArgument, "sim: dt must be > 0");
  }
  if (!(cfg.horizon > 0.0) || !std::isfinite(cfg.horizon)) {
    throw Error(ErrorCode::InvalidArgument, "sim: horizon must be > 0");
  }
  if (cfg.record_stride < 1) throw Error(ErrorCode::InvalidArgument, "sim: record_stride must be >= 1");
  if (!(cfg.blowup_state > 0.0) || !(cfg.blowup_input > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "sim: blow-up thresholds must be > 0");
  }
}

double safe_eval(const std::function<double(std::span<const double>)>& fn,
                 std::span<const double> x) {
  if (!fn) return std::numeric_limits<double>::quiet_NaN();
  try {
    return fn(x);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NonFiniteEvaluation) throw;
    return std::numeric_limits<double>::quiet_NaN();
  }
}

void record(Trajectory& traj, const Monitor& monitor, double t, std::span<const double> x,
            const ControlOutput& c, std::string event) {
  traj.times.push_back(t);
  traj.states.emplace_back(x.begin(), x.end());
  traj.inputs.push_back(c.u);
  traj.h_values.push_back(safe_eval(monitor.h, x));
  traj.psi_values.push_back(safe_eval(monitor.psi, x));
  if (event.empty() && c.active) event = "active";
  traj.events.push_back(std::move(event));
}

double min_finite(const std::vector<double>& v) {
  double m = std::numeric_limits<double>::infinity();
  for (double e : v) {
    if (std::isnan(e)) return e;
    m = std::min(m, e);
  }
  return m;
}

}  // namespace

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::Completed: return "completed";
    case Termination::EscapeDetected: return "escape_detected";
    case Termination::InfeasibleFilter: return "infeasible_filter";
  }
  return "unknown";
}

double Trajectory::min_h() const { return min_finite(h_values); }
double Trajectory::min_psi() const { return min_finite(psi_values); }

Trajectory integrate(const ControlAffineSystem& sys, const Controller& controller,
                     const SimConfig& cfg, std::span<const double> x0, const Monitor& monitor) {
  validate(cfg);
  if (x0.size() != sys.state_dim()) {
    throw Error(ErrorCode::InvalidArgument, "sim: initial state has wrong dimension");
  }
  if (!finite_all(x0)) throw Error(ErrorCode::InvalidArgument, "sim: initial state must be finite");
  if (!controller) throw Error(ErrorCode::InvalidArgument, "sim: controller is empty");

  Trajectory traj;
  Stepper stepper(sys, controller, cfg);
  const std::size_t n = sys.state_dim();
  const auto steps = static_cast<long long>(std::llround(cfg.horizon / cfg.dt));
  std::vector<double> x(x0.begin(), x0.end());
  std::vector<double> probe(n);

  auto fail = [&](double t, const Stage& s) {
    traj.termination =
        s.status == StageStatus::Infeasible ? Termination::InfeasibleFilter : Termination::EscapeDetected;
    traj.termination_time = t;
    ControlOutput c = s.control;
    if (c.u.empty()) c.u.assign(sys.input_dim(), std::numeric_limits<double>::quiet_NaN());
    std::string event = traj.termination == Termination::InfeasibleFilter ? "infeasible" : "escape";
    if (!traj.times.empty() && traj.times.back() == t) {
      // A later RK4 stage failed; the row at t keeps times strictly increasing.
      traj.inputs.back() = c.u;
      traj.events.back() = std::move(event);
    } else {
      record(traj, monitor, t, x, c, std::move(event));
    }
    traj.max_input_norm = stepper.max_input_norm;
    return traj;
  };

  for (long long k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * cfg.dt;
    const Stage s1 = stepper.evaluate(t, x);
    if (s1.status != StageStatus::Ok) return fail(t, s1);
    if (k % cfg.record_stride == 0 || k == steps) record(traj, monitor, t, x, s1.control, "");
    if (k == steps) break;

    const double h = cfg.dt;
    for (std::size_t i = 0; i < n; ++i) probe[i] = x[i] + 0.5 * h * s1.dx[i];
    const Stage s2 = stepper.evaluate(t + 0.5 * h, probe);
    if (s2.status != StageStatus::Ok) return fail(t, s2);
    for (std::size_t i = 0; i < n; ++i) probe[i] = x[i] + 0.5 * h * s2.dx[i];
    const Stage s3 = stepper.evaluate(t + 0.5 * h, probe);
    if (s3.status != StageStatus::Ok) return fail(t, s3);
    for (std::size_t i = 0; i < n; ++i) probe[i] = x[i] + h * s3.dx[i];
    const Stage s4 = stepper.evaluate(t + h, probe);
    if (s4.status != StageStatus::Ok) return fail(t, s4);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += h / 6.0 * (s1.dx[i] + 2.0 * s2.dx[i] + 2.0 * s3.dx[i] + s4.dx[i]);
    }
  }
  traj.termination_time = static_cast<double>(steps) * cfg.dt;
  traj.max_input_norm = stepper.max_input_norm;
  return traj;
}

std::vector<Trajectory> sweep(const ControlAffineSystem& sys, const Controller& controller,
                              const SimConfig& cfg, const std::vector<std::vector<double>>& x0s,
                              const Monitor& monitor, int jobs) {
  std::vector<Trajectory> out(x0s.size());
  if (x0s.empty()) return out;
  unsigned workers = jobs > 0 ? static_cast<unsigned>(jobs) : std::thread::hardware_concurrency();
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(x0s.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < x0s.size(); ++i) out[i] = integrate(sys, controller, cfg, x0s[i], monitor);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < x0s.size(); i = next++) {
          out[i] = integrate(sys, controller, cfg, x0s[i], monitor);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const std::size_t n = traj.states.empty() ? 0 : traj.states.front().size();
  const std::size_t m = traj.inputs.empty() ? 0 : traj.inputs.front().size();
  out << 't';
  for (std::size_t i = 1; i <= n; ++i) out << ",x" << i;
  for (std::size_t j = 1; j <= m; ++j) out << ",u" << j;
  out << ",h,psi,event\n";
  for (std::size_t r = 0; r < traj.size(); ++r) {
    out << format_real(traj.times[r]);
    for (double v : traj.states[r]) out << ',' << format_real(v);
    for (double v : traj.inputs[r]) out << ',' << format_real(v);
    out << ',' << format_real(traj.h_values[r]) << ',' << format_real(traj.psi_values[r]) << ','
        << traj.events[r] << '\n';
  }
}

double lerp_grid(double lo, double hi, std::size_t k, std::size_t r) {
  if (r < 2) return lo;
  // Weighted form keeps the midpoint of a symmetric interval at exactly 0.
  const double t = static_cast<double>(k) / static_cast<double>(r - 1);
  return lo * (1.0 - t) + hi * t;
}

double GridAxis::at(std::size_t i) const {
  return lerp_grid(lo, hi, i, resolution);
}

std::size_t LevelSetGrid::count_nonnegative() const {
  return static_cast<std::size_t>(
      std::count_if(values.begin(), values.end(), [](double v) { return v >= 0.0; }));
}

LevelSetGrid levelset(const std::function<double(std::span<const double>)>& fn, std::string name,
                      const GridAxis& x_axis, const GridAxis& y_axis, std::vector<double> base) {
  if (x_axis.coordinate >= base.size() || y_axis.coordinate >= base.size() ||
      x_axis.coordinate == y_axis.coordinate) {
    throw Error(ErrorCode::InvalidArgument, "levelset: axes must be two distinct state coordinates");
  }
  if (x_axis.resolution == 0 || y_axis.resolution == 0) {
    throw Error(ErrorCode::InvalidArgument, "levelset: resolution must be >= 1");
  }
  if (!(x_axis.hi >= x_axis.lo) || !(y_axis.hi >= y_axis.lo)) {
    throw Error(ErrorCode::InvalidArgument, "levelset: axis range is empty");
  }
  LevelSetGrid grid{std::move(name), x_axis, y_axis, std::move(base), {}};
  grid.values.resize(x_axis.resolution * y_axis.resolution);
  std::vector<double> x = grid.base;
  for (std::size_t iy = 0; iy < y_axis.resolution; ++iy) {
    x[y_axis.coordinate] = y_axis.at(iy);
    for (std::size_t ix = 0; ix < x_axis.resolution; ++ix) {
      x[x_axis.coordinate] = x_axis.at(ix);
      grid.values[iy * x_axis.resolution + ix] = safe_eval(fn, x);
    }
  }
  return grid;
}

void write_grid_csv(std::ostream& out, const LevelSetGrid& grid) {
  for (std::size_t iy = 0; iy < grid.y_axis.resolution; ++iy) {
    for (std::size_t ix = 0; ix < grid.x_axis.resolution; ++ix) {
      if (ix) out << ',';
      out << format_real(grid.value(ix, iy));
    }
    out << '\n';
  }
}

std::string grid_metadata_json(const LevelSetGrid& grid) {
  auto axis = [](const GridAxis& a) {
    return nlohmann::ordered_json{{"coordinate", a.coordinate},
                                  {"lo", a.lo},
                                  {"hi", a.hi},
                                  {"resolution", a.resolution}};
  };
  nlohmann::ordered_json j;
  j["name"] = grid.name;
  j["layout"] = "rows follow y, columns follow x";
  j["x_axis"] = axis(grid.x_axis);
  j["y_axis"] = axis(grid.y_axis);
  j["base"] = grid.base;
  j["nonnegative_cells"] = grid.count_nonnegative();
  return j.dump(2) + "\n";
}

}  // namespace recbf
