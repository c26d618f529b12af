#include "recbf/barriers.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "recbf/calculus.hpp"
#include "recbf/error.hpp"

namespace recbf {

namespace {

constexpr int kMaxOrder = 4;

double finite(const Jet& j, const char* what) {
  if (!j.is_finite()) {
    throw Error(ErrorCode::NonFiniteEvaluation, std::string("non-finite ") + what);
  }
  return j.value();
}

void require_kind(const Barrier& b, BarrierKind kind) {
  if (b.kind() != kind) {
    throw Error(ErrorCode::InvalidArgument, "operation needs a " + std::string(to_string(kind)) +
                                                " barrier, got " + std::string(to_string(b.kind())));
  }
}

void require_counts(const BarrierSpec& spec, std::size_t alphas, std::size_t gammas) {
  if (spec.alphas.size() != alphas || spec.gammas.size() != gammas) {
    throw Error(ErrorCode::InvalidArgument,
                std::string(to_string(spec.kind)) + " of order " + std::to_string(spec.order) +
                    " needs " + std::to_string(alphas) + " alpha(s) and " + std::to_string(gammas) +
                    " gamma(s)");
  }
}

void require_order(const BarrierSpec& spec) {
  if (spec.order < 2) throw Error(ErrorCode::InvalidArgument, "barrier order must be >= 2");
  if (spec.order > kMaxOrder) {
    throw Error(ErrorCode::NestingDepthExceeded,
                "barrier order " + std::to_string(spec.order) + " exceeds the cap of 4");
  }
}

void require_alpha_ordering(const std::vector<ClassKFn>& alphas) {
  for (std::size_t i = 1; i < alphas.size(); ++i) {
    if (!dominates(alphas[i], alphas[i - 1])) {
      throw Error(ErrorCode::InvalidArgument,
                  "alpha_" + std::to_string(i) + " must dominate alpha_" + std::to_string(i - 1) +
                      " on the whole sample grid");
    }
  }
}

}  // namespace

std::string_view to_string(BarrierKind kind) {
  switch (kind) {
    case BarrierKind::Plain: return "plain";
    case BarrierKind::ReCBF2: return "recbf2";
    case BarrierKind::ReCBFRecursive: return "recbf_recursive";
    case BarrierKind::HOCBF: return "hocbf";
    case BarrierKind::Breeden: return "breeden";
    case BarrierKind::Backstepping: return "backstepping";
    case BarrierKind::RectifiedBackstepping: return "rectified_backstepping";
  }
  return "unknown";
}

std::optional<BarrierKind> parse_barrier_kind(std::string_view name) {
  for (BarrierKind k : {BarrierKind::Plain, BarrierKind::ReCBF2, BarrierKind::ReCBFRecursive,
                        BarrierKind::HOCBF, BarrierKind::Breeden, BarrierKind::Backstepping,
                        BarrierKind::RectifiedBackstepping}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

Barrier::Barrier(BarrierSpec spec, std::shared_ptr<const ControlAffineSystem> system)
    : spec_(std::move(spec)), system_(std::move(system)) {
  if (!system_) throw Error(ErrorCode::InvalidArgument, "barrier needs a system");
  if (!spec_.constraint.psi) throw Error(ErrorCode::InvalidArgument, "barrier needs a constraint");
  drift_ = system_->drift_field();
  const ScalarField psi = spec_.constraint.psi;
  const VectorField f = drift_;
  lf_psi_ = lie_field(psi, f);

  switch (spec_.kind) {
    case BarrierKind::Plain:
      h_ = psi;
      break;

    case BarrierKind::ReCBF2:
    case BarrierKind::ReCBFRecursive: {
      if (spec_.kind == BarrierKind::ReCBF2 && spec_.order != 2) {
        throw Error(ErrorCode::InvalidArgument, "recbf2 has order 2");
      }
      require_order(spec_);
      const auto stages = static_cast<std::size_t>(spec_.order - 1);
      require_counts(spec_, stages, stages);
      require_alpha_ordering(spec_.alphas);
      ScalarField h = psi;
      for (std::size_t i = 0; i < stages; ++i) {
        const ClassKFn alpha = spec_.alphas[i];
        const Rectifier theta = spec_.gammas[i];
        // psi_{i+1} = L_f h_i + alpha_i(h_i); h_{i+1} = h_i - Theta_{i+1}(psi_{i+1}).
        stages_.push_back([h, f, alpha](std::span<const Jet> x) {
          const LieLift l = lie_lift(h, f, x);
          return l.derivative + alpha(l.value);
        });
        h = [h, f, alpha, theta](std::span<const Jet> x) {
          const LieLift l = lie_lift(h, f, x);
          return l.value - theta(l.derivative + alpha(l.value));
        };
      }
      h_ = std::move(h);
      break;
    }

    case BarrierKind::HOCBF: {
      require_order(spec_);
      require_counts(spec_, static_cast<std::size_t>(spec_.order - 1), 0);
      ScalarField chain = psi;
      stages_.push_back(chain);
      for (const ClassKFn& alpha : spec_.alphas) {
        chain = [chain, f, alpha](std::span<const Jet> x) {
          const LieLift l = lie_lift(chain, f, x);
          return l.derivative + alpha(l.value);
        };
        stages_.push_back(chain);
      }
      h_ = chain;
      break;
    }

    case BarrierKind::Breeden:
      if (spec_.constraint.relative_degree != 2) {
        throw Error(ErrorCode::InvalidArgument, "breeden barrier needs weak relative degree 2");
      }
      h_ = [psi, f](std::span<const Jet> x) {
        const LieLift l = lie_lift(psi, f, x);
        if (l.derivative.value() >= 0.0) return l.value;
        return l.value - Jet(0.5) * l.derivative * l.derivative;
      };
      stages_.push_back(lf_psi_);
      break;

    case BarrierKind::Backstepping:
    case BarrierKind::RectifiedBackstepping: {
      if (system_->name() != "double_integrator") {
        throw Error(ErrorCode::WrongSystem,
                    std::string(to_string(spec_.kind)) + " is defined for the double integrator only");
      }
      const VirtualController& vc = spec_.virtual_controller;
      if (vc.kind == VirtualController::Kind::Linear && !(vc.gain > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "virtual controller gain must be > 0");
      }
      if (vc.kind == VirtualController::Kind::Regularized) {
        if (!(vc.regularization > 0.0)) {
          throw Error(ErrorCode::InvalidArgument, "virtual controller regularization must be > 0");
        }
        if (spec_.alphas.size() != 1) {
          throw Error(ErrorCode::InvalidArgument, "regularized virtual controller needs one alpha");
        }
      }
      const std::size_t gammas = spec_.kind == BarrierKind::RectifiedBackstepping ? 1 : 0;
      if (spec_.gammas.size() != gammas) {
        throw Error(ErrorCode::InvalidArgument,
                    std::string(to_string(spec_.kind)) + " needs " + std::to_string(gammas) +
                        " gamma(s)");
      }
      const JetVec position_axis{Jet(1.0), Jet(0.0)};
      const ScalarField dpsi = [psi, position_axis](std::span<const Jet> x) {
        return lie_lift(psi, x, position_axis).derivative;
      };
      if (vc.kind == VirtualController::Kind::Linear) {
        virtual_control_ = [gain = vc.gain](std::span<const Jet> x) { return -Jet(gain) * x[0]; };
      } else {
        virtual_control_ = [dpsi, psi, alpha = spec_.alphas[0],
                            reg = vc.regularization](std::span<const Jet> x) {
          const Jet b = dpsi(x);
          return -(alpha(psi(x)) * b) / (b * b + Jet(reg));
        };
      }
      const ScalarField k = virtual_control_;
      if (spec_.kind == BarrierKind::Backstepping) {
        h_ = [psi, k](std::span<const Jet> x) {
          const Jet gap = x[1] - k(x);
          return psi(x) - Jet(0.5) * gap * gap;
        };
      } else {
        const Rectifier theta = spec_.gammas[0];
        const ScalarField arg = [dpsi, k](std::span<const Jet> x) { return dpsi(x) * (x[1] - k(x)); };
        stages_.push_back(arg);
        h_ = [psi, arg, theta](std::span<const Jet> x) { return psi(x) - theta(arg(x)); };
      }
      break;
    }
  }
}

double Barrier::virtual_control(std::span<const double> x) const {
  if (!virtual_control_) throw Error(ErrorCode::InvalidArgument, "barrier has no virtual controller");
  return finite(virtual_control_(to_jets(x)), "virtual control");
}

double Barrier::value(std::span<const double> x) const {
  if (x.size() != system_->state_dim()) {
    throw Error(ErrorCode::InvalidArgument, "state dimension mismatch");
  }
  return finite(h_(to_jets(x)), "barrier value");
}

double Barrier::psi(std::span<const double> x) const {
  return finite(spec_.constraint.psi(to_jets(x)), "constraint value");
}

double Barrier::set_value(std::span<const double> x) const {
  if (spec_.kind != BarrierKind::HOCBF) return value(x);
  const std::vector<double> chain = stage_values(x);
  return *std::min_element(chain.begin(), chain.end());
}

std::vector<double> Barrier::stage_values(std::span<const double> x) const {
  const JetVec jx = to_jets(x);
  std::vector<double> out;
  out.reserve(stages_.size());
  for (const auto& stage : stages_) out.push_back(finite(stage(jx), "stage value"));
  return out;
}

LieDerivatives Barrier::lie_of(const ScalarField& field, std::span<const double> x) const {
  if (x.size() != system_->state_dim()) {
    throw Error(ErrorCode::InvalidArgument, "state dimension mismatch");
  }
  const JetVec jx = to_jets(x);
  const JetVec fx = system_->drift(jx);
  const std::vector<JetVec> g = system_->input_columns(jx);
  LieDerivatives out;
  out.lf = finite(lie_lift(field, jx, fx).derivative, "L_f h");
  out.lg.reserve(g.size());
  for (const auto& col : g) out.lg.push_back(finite(lie_lift(field, jx, col).derivative, "L_g h"));
  return out;
}

LieDerivatives Barrier::lie_autodiff(std::span<const double> x) const { return lie_of(h_, x); }

LieDerivatives Barrier::lie(std::span<const double> x) const {
  switch (spec_.kind) {
    case BarrierKind::ReCBF2: return recbf2_closed_form(x);
    case BarrierKind::Breeden: return breeden_closed_form(x);
    default: return lie_autodiff(x);
  }
}

LieDerivatives Barrier::recbf2_closed_form(std::span<const double> x) const {
  const LieDerivatives psi_lie = lie_of(spec_.constraint.psi, x);
  const LieDerivatives lf_psi_lie = lie_of(lf_psi_, x);
  const double psi_v = psi(x);
  const double lf_psi = psi_lie.lf;
  const ClassKFn& alpha = spec_.alphas[0];
  const Rectifier& theta = spec_.gammas[0];
  const double psi1 = lf_psi + alpha(psi_v);
  const double dtheta = theta.derivative(psi1);
  const double dalpha = alpha.derivative(psi_v);

  LieDerivatives out;
  out.lf = lf_psi - dtheta * (lf_psi_lie.lf + dalpha * lf_psi);
  out.lg.resize(psi_lie.lg.size());
  for (std::size_t j = 0; j < out.lg.size(); ++j) {
    out.lg[j] = psi_lie.lg[j] - dtheta * (lf_psi_lie.lg[j] + dalpha * psi_lie.lg[j]);
  }
  return out;
}

LieDerivatives Barrier::breeden_closed_form(std::span<const double> x) const {
  const LieDerivatives psi_lie = lie_of(spec_.constraint.psi, x);
  const double lf_psi = psi_lie.lf;
  if (lf_psi >= 0.0) return psi_lie;
  const LieDerivatives lf_psi_lie = lie_of(lf_psi_, x);
  LieDerivatives out;
  out.lf = lf_psi - lf_psi * lf_psi_lie.lf;
  out.lg.resize(psi_lie.lg.size());
  for (std::size_t j = 0; j < out.lg.size(); ++j) {
    out.lg[j] = psi_lie.lg[j] - lf_psi * lf_psi_lie.lg[j];
  }
  return out;
}

std::vector<double> Barrier::product_formula_lg(std::span<const double> x) const {
  if (spec_.kind != BarrierKind::ReCBF2 && spec_.kind != BarrierKind::ReCBFRecursive) {
    throw Error(ErrorCode::InvalidArgument, "product formula applies to rectified barriers only");
  }
  const std::vector<double> psis = stage_values(x);
  double prod = (spec_.order % 2 == 0) ? -1.0 : 1.0;  // (-1)^(r-1)
  for (std::size_t i = 0; i < psis.size(); ++i) prod *= spec_.gammas[i].derivative(psis[i]);
  // L_g L_f^(r-1) psi; order r <= 4 stays within the jet depth cap.
  ScalarField field = spec_.constraint.psi;
  for (int i = 0; i < spec_.order - 1; ++i) field = lie_field(std::move(field), drift_);
  const LieDerivatives l = lie_of(field, x);
  std::vector<double> lg = l.lg;
  for (double& v : lg) v *= prod;
  return lg;
}

HocbfChainValues Barrier::hocbf_chain(std::span<const double> x) const {
  if (spec_.kind != BarrierKind::HOCBF) {
    throw Error(ErrorCode::InvalidArgument, "hocbf_chain needs a hocbf barrier");
  }
  HocbfChainValues out;
  out.psi = stage_values(x);
  const LieDerivatives l = lie_autodiff(x);
  out.lf_last = l.lf;
  out.lg_last = l.lg;
  return out;
}

double recbf2_value(const Barrier& b, std::span<const double> x) {
  require_kind(b, BarrierKind::ReCBF2);
  return b.value(x);
}

LieDerivatives recbf2_lie(const Barrier& b, std::span<const double> x) {
  require_kind(b, BarrierKind::ReCBF2);
  return b.lie(x);
}

double recbf_recursive_value(const Barrier& b, std::span<const double> x) {
  require_kind(b, BarrierKind::ReCBFRecursive);
  return b.value(x);
}

LieDerivatives recbf_recursive_lie(const Barrier& b, std::span<const double> x) {
  require_kind(b, BarrierKind::ReCBFRecursive);
  return b.lie(x);
}

HocbfChainValues hocbf_chain(const Barrier& b, std::span<const double> x) {
  return b.hocbf_chain(x);
}

double breeden_value(const Barrier& b, std::span<const double> x) {
  require_kind(b, BarrierKind::Breeden);
  return b.value(x);
}

LieDerivatives breeden_lie(const Barrier& b, std::span<const double> x) {
  require_kind(b, BarrierKind::Breeden);
  return b.lie(x);
}

double backstepping_value(const Barrier& b, std::span<const double> x) {
  require_kind(b, BarrierKind::Backstepping);
  return b.value(x);
}

double rectified_backstepping_value(const Barrier& b, std::span<const double> x) {
  require_kind(b, BarrierKind::RectifiedBackstepping);
  return b.value(x);
}

Problem builtin(const std::string& name, const AircraftParams& aircraft) {
  Problem p;
  BarrierSpec& spec = p.default_barrier;
  if (name == "double_integrator") {
    p.system = std::make_shared<const ControlAffineSystem>(double_integrator());
    p.constraint = unit_position_constraint(2);
    spec.alphas = {ClassKFn::linear(1.0)};
    spec.gammas = {Rectifier(ClassKFn::signed_square(1.0))};
  } else if (name == "triple_integrator") {
    p.system = std::make_shared<const ControlAffineSystem>(triple_integrator());
    p.constraint = unit_position_constraint(3);
    spec.kind = BarrierKind::ReCBFRecursive;
    spec.order = 3;
    spec.alphas = {ClassKFn::linear(1.0), ClassKFn::linear(1.0)};
    spec.gammas = {Rectifier(ClassKFn::signed_square(1.0)), Rectifier(ClassKFn::signed_square(1.0))};
  } else if (name == "aircraft_pitch") {
    p.system = std::make_shared<const ControlAffineSystem>(aircraft_pitch(aircraft));
    p.constraint = pitch_constraint(aircraft);
    spec.alphas = {ClassKFn::linear(0.5)};
    spec.gammas = {Rectifier(ClassKFn::signed_square(1.0), 0.1)};
  } else if (name == "mixed_two_input") {
    p.system = std::make_shared<const ControlAffineSystem>(mixed_two_input());
    p.constraint = unit_position_constraint(2);
    spec.alphas = {ClassKFn::linear(1.0)};
    spec.gammas = {Rectifier(ClassKFn::signed_square(1.0))};
  } else {
    throw Error(ErrorCode::UnknownSystem, "unknown system '" + name + "'");
  }
  spec.constraint = p.constraint;
  return p;
}

}  // namespace recbf
