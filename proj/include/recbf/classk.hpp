#pragma once

#include <functional>
#include <memory>
#include <string>

#include "recbf/jet.hpp"

namespace recbf {

/// Smooth extended class-K function.
///
/// Built-in families are `linear` (c*s) and `signed_square` (c*s*|s|). A
/// `shifted` function evaluates s -> inner(s - eps). `custom` wraps any
/// jet-evaluable function after sampling it for the extended class-K shape.
class ClassKFn {
 public:
  enum class Kind { Linear, SignedSquare, Shifted, Custom };

  static ClassKFn linear(double coeff);
  static ClassKFn signed_square(double coeff);
  static ClassKFn shifted(ClassKFn inner, double epsilon);
  static ClassKFn custom(std::string name, std::function<Jet(const Jet&)> fn);

  Kind kind() const { return kind_; }
  double coeff() const { return coeff_; }
  double shift() const { return shift_; }
  const std::string& name() const { return name_; }

  Jet operator()(const Jet& s) const;
  double operator()(double s) const;
  double derivative(double s) const;

  /// True when the derivative vanishes only at s = 0 (sampled for custom).
  bool has_isolated_critical_point() const;

 private:
  ClassKFn() = default;

  Kind kind_ = Kind::Linear;
  double coeff_ = 1.0;
  double shift_ = 0.0;
  std::string name_;
  std::shared_ptr<const ClassKFn> inner_;
  std::function<Jet(const Jet&)> custom_;
};

/// Samples the extended class-K properties of fn on [-range, range]:
/// fn(0) = 0 and strict increase between consecutive samples. Throws
/// InvalidArgument on failure.
void validate_class_k(const ClassKFn& fn, double range = 10.0, int samples = 1000);

/// True when a(s) >= b(s) on every sample of [-range, range].
bool dominates(const ClassKFn& a, const ClassKFn& b, double range = 10.0, int samples = 1000);

/// Theta(s) = ReLU(-gamma(s - epsilon)).
///
/// gamma must satisfy gamma'(s) = 0 <=> s = 0, which makes Theta
/// continuously differentiable with Theta(s) = Theta'(s) = 0 for s >= epsilon.
class Rectifier {
 public:
  explicit Rectifier(ClassKFn gamma, double epsilon = 0.0);

  const ClassKFn& gamma() const { return gamma_; }
  double epsilon() const { return epsilon_; }

  Jet operator()(const Jet& s) const;
  double operator()(double s) const;
  double derivative(double s) const;

 private:
  ClassKFn gamma_;
  double epsilon_;
};

}  // namespace recbf
