#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "recbf/systems.hpp"

namespace recbf {

struct SimConfig {
  double dt = 1e-3;
  double horizon = 10.0;
  double blowup_state = 1e6;
  double blowup_input = 1e6;
  int record_stride = 1;
};

struct ControlOutput {
  std::vector<double> u;
  bool feasible = true;
  bool active = false;
};

/// u = k(t, x). Must be safe to call concurrently when used in a sweep.
using Controller = std::function<ControlOutput(double t, std::span<const double> x)>;

/// Scalar quantities logged along a trajectory.
struct Monitor {
  std::function<double(std::span<const double>)> h;
  std::function<double(std::span<const double>)> psi;
};

enum class Termination { Completed, EscapeDetected, InfeasibleFilter };

std::string_view to_string(Termination t);

struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  std::vector<std::vector<double>> inputs;
  std::vector<double> h_values;
  std::vector<double> psi_values;
  std::vector<std::string> events;  // "", "active", "escape" or "infeasible" per row
  Termination termination = Termination::Completed;
  double termination_time = 0.0;  // time of the failing step; horizon when completed
  double max_input_norm = 0.0;    // over every controller evaluation, RK4 stages included

  std::size_t size() const { return times.size(); }
  double min_h() const;
  double min_psi() const;
};

/// Fixed-step RK4 on x' = f(x) + g(x) u with the controller evaluated at
/// every stage. Stops early on an infeasible controller output, a non-finite
/// or oversized state or input, or a non-finite evaluation inside the
/// controller. The last row of a terminated run holds the state at the start
/// of the failing step and the offending input.
Trajectory integrate(const ControlAffineSystem& sys, const Controller& controller,
                     const SimConfig& cfg, std::span<const double> x0, const Monitor& monitor = {});

/// Independent runs from each initial condition, results in input order.
/// jobs <= 0 uses the hardware concurrency.
std::vector<Trajectory> sweep(const ControlAffineSystem& sys, const Controller& controller,
                              const SimConfig& cfg, const std::vector<std::vector<double>>& x0s,
                              const Monitor& monitor = {}, int jobs = 1);

/// `t,x1..xn,u1..um,h,psi,event`
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

/// k-th of r evenly spaced points on [lo, hi]; symmetric intervals hit 0 exactly.
double lerp_grid(double lo, double hi, std::size_t k, std::size_t r);

struct GridAxis {
  std::size_t coordinate = 0;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t resolution = 200;

  double at(std::size_t i) const;
};

/// A scalar field sampled on a 2-D slice of state space. Coordinates not on
/// an axis are held at `base`. Rows run along y, columns along x.
struct LevelSetGrid {
  std::string name;
  GridAxis x_axis;
  GridAxis y_axis;
  std::vector<double> base;
  std::vector<double> values;  // row-major, y_axis.resolution rows; NaN marks failed cells

  double value(std::size_t ix, std::size_t iy) const { return values[iy * x_axis.resolution + ix]; }
  std::size_t count_nonnegative() const;
};

LevelSetGrid levelset(const std::function<double(std::span<const double>)>& fn, std::string name,
                      const GridAxis& x_axis, const GridAxis& y_axis, std::vector<double> base);

void write_grid_csv(std::ostream& out, const LevelSetGrid& grid);
/// Axis metadata for the CSV matrix.
std::string grid_metadata_json(const LevelSetGrid& grid);

/// %.17g
std::string format_real(double v);

}  // namespace recbf
