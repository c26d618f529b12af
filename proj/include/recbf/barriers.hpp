#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "recbf/classk.hpp"
#include "recbf/jet.hpp"
#include "recbf/systems.hpp"

namespace recbf {

enum class BarrierKind {
  Plain,
  ReCBF2,
  ReCBFRecursive,
  HOCBF,
  Breeden,
  Backstepping,
  RectifiedBackstepping,
};

std::string_view to_string(BarrierKind kind);
std::optional<BarrierKind> parse_barrier_kind(std::string_view name);

/// Smooth virtual controller k(x) for the double-integrator backstepping
/// barriers. `Linear` is k = -gain * x. `Regularized` is
/// k = -alpha(psi) * b / (b^2 + regularization) with b = d psi / d x, which
/// keeps b * k >= -alpha(psi) on psi >= 0 and is nearly tight there.
struct VirtualController {
  enum class Kind { Linear, Regularized };
  Kind kind = Kind::Linear;
  double gain = 0.5;
  double regularization = 0.04;
};

/// Everything needed to build a barrier for a bound system.
///
/// For the rectified and high-order constructions of order r, `alphas`
/// holds alpha_0 .. alpha_{r-2} and `gammas` holds the r - 1 rectifiers. The
/// alpha used in the filter inequality lives in FilterConfig.
struct BarrierSpec {
  BarrierKind kind = BarrierKind::ReCBF2;
  int order = 2;
  std::vector<ClassKFn> alphas;
  std::vector<Rectifier> gammas;
  ConstraintFn constraint;
  VirtualController virtual_controller;
};

struct LieDerivatives {
  double lf = 0.0;
  std::vector<double> lg;
};

struct HocbfChainValues {
  std::vector<double> psi;  // psi_0 .. psi_{r-1}
  double lf_last = 0.0;
  std::vector<double> lg_last;
};

/// A barrier candidate h bound to a control-affine system.
///
/// Immutable after construction; all evaluations are reentrant.
class Barrier {
 public:
  Barrier(BarrierSpec spec, std::shared_ptr<const ControlAffineSystem> system);

  const BarrierSpec& spec() const { return spec_; }
  BarrierKind kind() const { return spec_.kind; }
  const ControlAffineSystem& system() const { return *system_; }
  std::shared_ptr<const ControlAffineSystem> system_ptr() const { return system_; }

  /// h as a jet field; HOCBF barriers expose psi_{r-1}.
  const ScalarField& field() const { return h_; }

  double value(std::span<const double> x) const;
  double psi(std::span<const double> x) const;

  /// Membership value of the safe set: h for CBF-type barriers and
  /// min_i psi_i for HOCBF chains.
  double set_value(std::span<const double> x) const;

  /// L_f h and L_g h. ReCBF2 and Breeden use their closed forms; other kinds
  /// differentiate the composite with jets.
  LieDerivatives lie(std::span<const double> x) const;
  LieDerivatives lie_autodiff(std::span<const double> x) const;

  /// Intermediate values of the construction: psi_1 .. psi_{r-1} of the
  /// rectified recursion, psi_0 .. psi_{r-1} of a HOCBF chain, L_f psi for
  /// Breeden, the rectifier argument for rectified backstepping.
  std::vector<double> stage_values(std::span<const double> x) const;

  /// (-1)^(r-1) (prod Theta_i'(psi_i)) L_g L_f^(r-1) psi, valid under weak
  /// relative degree r. Rectified kinds only.
  std::vector<double> product_formula_lg(std::span<const double> x) const;

  HocbfChainValues hocbf_chain(std::span<const double> x) const;

  /// k(x) of the backstepping kinds.
  double virtual_control(std::span<const double> x) const;

 private:
  LieDerivatives recbf2_closed_form(std::span<const double> x) const;
  LieDerivatives breeden_closed_form(std::span<const double> x) const;
  LieDerivatives lie_of(const ScalarField& field, std::span<const double> x) const;

  BarrierSpec spec_;
  std::shared_ptr<const ControlAffineSystem> system_;
  VectorField drift_;
  ScalarField h_;
  ScalarField lf_psi_;
  ScalarField virtual_control_;
  std::vector<ScalarField> stages_;
};

// Kind-checked entry points.
double recbf2_value(const Barrier& b, std::span<const double> x);
LieDerivatives recbf2_lie(const Barrier& b, std::span<const double> x);
double recbf_recursive_value(const Barrier& b, std::span<const double> x);
LieDerivatives recbf_recursive_lie(const Barrier& b, std::span<const double> x);
HocbfChainValues hocbf_chain(const Barrier& b, std::span<const double> x);
double breeden_value(const Barrier& b, std::span<const double> x);
LieDerivatives breeden_lie(const Barrier& b, std::span<const double> x);
double backstepping_value(const Barrier& b, std::span<const double> x);
double rectified_backstepping_value(const Barrier& b, std::span<const double> x);

/// A builtin model with its constraint and default barrier.
struct Problem {
  std::shared_ptr<const ControlAffineSystem> system;
  ConstraintFn constraint;
  BarrierSpec default_barrier;
};

/// "double_integrator", "triple_integrator", "aircraft_pitch", "mixed_two_input".
Problem builtin(const std::string& name, const AircraftParams& aircraft = {});

}  // namespace recbf
