#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

#include "recbf/jet.hpp"

namespace recbf {

/// State or input vector with finite entries.
class RealVector {
 public:
  RealVector() = default;
  explicit RealVector(std::vector<double> entries);
  RealVector(std::initializer_list<double> entries);
  explicit RealVector(std::span<const double> entries);

  std::size_t size() const { return entries_.size(); }
  double operator[](std::size_t i) const { return entries_[i]; }
  std::span<const double> span() const { return entries_; }
  const std::vector<double>& values() const { return entries_; }

  static RealVector basis(std::size_t n, std::size_t i);

 private:
  std::vector<double> entries_;
};

JetVec to_jets(std::span<const double> x);

/// Evaluates a jet field at plain reals.
double evaluate(const ScalarField& fn, std::span<const double> x);

/// Lifts x along v one nesting level above every operand and evaluates fn.
/// The result carries fn(x) as primal(level) and L_v fn(x) as tangent(level).
struct LieLift {
  Jet value;
  Jet derivative;
};
LieLift lie_lift(const ScalarField& fn, std::span<const Jet> x, std::span<const Jet> v);
LieLift lie_lift(const ScalarField& fn, const VectorField& v, std::span<const Jet> x);

/// x -> L_v fn(x) as a new jet field.
ScalarField lie_field(ScalarField fn, VectorField v);

/// grad fn(x) . v, exact up to rounding.
double directional_derivative(const ScalarField& fn, const RealVector& x, const RealVector& v);

RealVector gradient(const ScalarField& fn, const RealVector& x);

/// v2' Hess fn(x) v1.
double nested_directional(const ScalarField& fn, const RealVector& x, const RealVector& v1,
                          const RealVector& v2);

/// Central differences; test oracle.
RealVector fd_gradient(const std::function<double(std::span<const double>)>& fn,
                       const RealVector& x, double step = 1e-5);

}  // namespace recbf
