#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "recbf/barriers.hpp"
#include "recbf/filter.hpp"
#include "recbf/sim.hpp"
#include "recbf/systems.hpp"

namespace recbf {

/// Nominal (pre-filter) control laws.
///
/// `zero`: u = 0. `constant`: u = value. `linear_feedback`: u = -K (x - target)
/// with K given row-major as m x n. `pitch_tracking`: aircraft pitch tracking
/// of theta_d(t) = amplitude sin(frequency t) with PD gains on the pitch
/// error and rate error, plus an optional model-inverse feedforward.
struct NominalSpec {
  enum class Kind { Zero, Constant, LinearFeedback, PitchTracking };
  Kind kind = Kind::Zero;
  std::vector<double> value;
  std::vector<std::vector<double>> gain;
  std::vector<double> target;
  double kp = 20.0;
  double kd = 5.0;
  double amplitude = 0.4;
  double frequency = 0.5;
  bool feedforward = true;
  AircraftParams aircraft;
};

std::string_view to_string(NominalSpec::Kind kind);
std::optional<NominalSpec::Kind> parse_nominal_kind(std::string_view name);

/// theta_d(t) of a pitch-tracking spec.
double pitch_reference(const NominalSpec& spec, double t);

Controller make_nominal(const NominalSpec& spec, const ControlAffineSystem& sys);

/// Nominal law passed through the min-norm filter. The barrier is shared so
/// the controller can outlive the caller's handle.
Controller make_filtered(std::shared_ptr<const Barrier> barrier, FilterConfig cfg, Controller nominal);

}  // namespace recbf
