#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "recbf/jet.hpp"

namespace recbf {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};
using Box = std::vector<Interval>;

/// m columns of g(x), each of length n.
using InputColumns = std::function<std::vector<JetVec>(std::span<const Jet>)>;

/// x' = f(x) + g(x) u with jet-evaluable f and g.
class ControlAffineSystem {
 public:
  ControlAffineSystem(std::string name, std::size_t n, std::size_t m, VectorField drift,
                      InputColumns input, std::optional<Box> domain = std::nullopt);

  const std::string& name() const { return name_; }
  std::size_t state_dim() const { return n_; }
  std::size_t input_dim() const { return m_; }
  const std::optional<Box>& domain() const { return domain_; }

  JetVec drift(std::span<const Jet> x) const;
  std::vector<JetVec> input_columns(std::span<const Jet> x) const;

  /// f as a vector field, and column j of g as a vector field.
  VectorField drift_field() const;
  VectorField input_field(std::size_t j) const;

  /// f(x) + g(x) u.
  std::vector<double> dynamics(std::span<const double> x, std::span<const double> u) const;

 private:
  std::string name_;
  std::size_t n_;
  std::size_t m_;
  VectorField drift_;
  InputColumns input_;
  std::optional<Box> domain_;
};

/// State constraint psi(x) >= 0 with its declared (weak) relative degree.
struct ConstraintFn {
  ScalarField psi;
  int relative_degree = 1;
};

/// L_f^k fn(x), k <= 3.
double lie_f(const ControlAffineSystem& sys, const ScalarField& fn, int k,
             std::span<const double> x);

/// L_g L_f^k fn(x) as a length-m row.
std::vector<double> lie_g_lie_f(const ControlAffineSystem& sys, const ScalarField& fn, int k,
                                std::span<const double> x);

/// Jet field x -> L_f^k fn(x).
ScalarField lie_f_field(const ControlAffineSystem& sys, ScalarField fn, int k);

/// Monomial sum: sum_t coeff_t * prod_i x_i^powers_t[i].
struct Polynomial {
  struct Term {
    double coeff = 0.0;
    std::vector<int> powers;
  };
  std::vector<Term> terms;

  Jet operator()(std::span<const Jet> x) const;
};

/// g given row-major as n rows of m polynomials.
ControlAffineSystem make_polynomial_system(std::string name, std::size_t n, std::size_t m,
                                           std::vector<Polynomial> drift,
                                           std::vector<std::vector<Polynomial>> input,
                                           std::optional<Box> domain = std::nullopt);

struct AircraftParams {
  double gravity = 9.81;
  double airspeed = 30.0;
  double time_constant = 0.5;
  double theta_max = 0.3;
};

ControlAffineSystem double_integrator();
ControlAffineSystem triple_integrator();
ControlAffineSystem aircraft_pitch(const AircraftParams& params = {});
ControlAffineSystem mixed_two_input();

/// psi = 1 - x_1^2.
ConstraintFn unit_position_constraint(int relative_degree);
/// psi = theta_max^2 - theta^2.
ConstraintFn pitch_constraint(const AircraftParams& params = {});

std::vector<std::string> builtin_system_names();

}  // namespace recbf
