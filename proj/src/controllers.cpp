#include "recbf/controllers.hpp"

#include <cmath>
#include <utility>

#include "recbf/error.hpp"

namespace recbf {

std::string_view to_string(NominalSpec::Kind kind) {
  switch (kind) {
    case NominalSpec::Kind::Zero: return "zero";
    case NominalSpec::Kind::Constant: return "constant";
    case NominalSpec::Kind::LinearFeedback: return "linear_feedback";
    case NominalSpec::Kind::PitchTracking: return "pitch_tracking";
  }
  return "unknown";
}

std::optional<NominalSpec::Kind> parse_nominal_kind(std::string_view name) {
  for (auto k : {NominalSpec::Kind::Zero, NominalSpec::Kind::Constant,
                 NominalSpec::Kind::LinearFeedback, NominalSpec::Kind::PitchTracking}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

double pitch_reference(const NominalSpec& spec, double t) {
  return spec.amplitude * std::sin(spec.frequency * t);
}

Controller make_nominal(const NominalSpec& spec, const ControlAffineSystem& sys) {
  const std::size_t n = sys.state_dim();
  const std::size_t m = sys.input_dim();
  switch (spec.kind) {
    case NominalSpec::Kind::Zero:
      return [m](double, std::span<const double>) { return ControlOutput{std::vector<double>(m, 0.0)}; };

    case NominalSpec::Kind::Constant:
      if (spec.value.size() != m) {
        throw Error(ErrorCode::InvalidArgument, "constant nominal input needs m entries");
      }
      return [u = spec.value](double, std::span<const double>) { return ControlOutput{u}; };

    case NominalSpec::Kind::LinearFeedback: {
      if (spec.gain.size() != m) throw Error(ErrorCode::InvalidArgument, "feedback gain needs m rows");
      for (const auto& row : spec.gain) {
        if (row.size() != n) throw Error(ErrorCode::InvalidArgument, "feedback gain rows need n entries");
      }
      std::vector<double> target = spec.target.empty() ? std::vector<double>(n, 0.0) : spec.target;
      if (target.size() != n) throw Error(ErrorCode::InvalidArgument, "feedback target needs n entries");
      return [k = spec.gain, target = std::move(target)](double, std::span<const double> x) {
        ControlOutput out{std::vector<double>(k.size(), 0.0)};
        for (std::size_t j = 0; j < k.size(); ++j) {
          for (std::size_t i = 0; i < x.size(); ++i) out.u[j] -= k[j][i] * (x[i] - target[i]);
        }
        return out;
      };
    }

    case NominalSpec::Kind::PitchTracking: {
      if (sys.name() != "aircraft_pitch") {
        throw Error(ErrorCode::WrongSystem, "pitch tracking needs the aircraft pitch model");
      }
      const double a = spec.aircraft.gravity / spec.aircraft.airspeed;
      const double tau = spec.aircraft.time_constant;
      return [spec, a, tau](double t, std::span<const double> x) {
        const double w = spec.frequency;
        const double th_d = spec.amplitude * std::sin(w * t);
        const double dth_d = spec.amplitude * w * std::cos(w * t);
        const double ddth_d = -spec.amplitude * w * w * std::sin(w * t);
        const double th = x[0];
        const double dth = a * (x[1] - std::cos(th));
        double u = spec.kp * (th_d - th) + spec.kd * (dth_d - dth);
        if (spec.feedforward) {
          // A_z that realizes theta_d exactly, and the command that produces it.
          const double az_d = dth_d / a + std::cos(th_d);
          const double daz_d = ddth_d / a - std::sin(th_d) * dth_d;
          u += az_d + tau * daz_d;
        } else {
          u -= spec.kd * dth_d;
        }
        return ControlOutput{{u}};
      };
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown nominal controller");
}

Controller make_filtered(std::shared_ptr<const Barrier> barrier, FilterConfig cfg, Controller nominal) {
  if (!barrier || !nominal) throw Error(ErrorCode::InvalidArgument, "filtered controller needs parts");
  return [barrier = std::move(barrier), cfg = std::move(cfg), nominal = std::move(nominal)](
             double t, std::span<const double> x) {
    const ControlOutput nom = nominal(t, x);
    const FilterResult r = apply_filter(*barrier, cfg, x, nom.u);
    return ControlOutput{r.u, r.feasible, r.active};
  };
}

}  // namespace recbf
