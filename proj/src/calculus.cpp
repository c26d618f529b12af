#include "recbf/calculus.hpp"

#include <cmath>
#include <string>

#include "recbf/error.hpp"

namespace recbf {

namespace {

void require_finite(std::span<const double> entries) {
  for (double v : entries) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteEvaluation, "non-finite vector entry");
  }
}

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + ": dimension mismatch (" +
                                                std::to_string(a) + " vs " + std::to_string(b) +
                                                ")");
  }
}

double checked(const Jet& j) {
  if (!j.is_finite()) throw Error(ErrorCode::NonFiniteEvaluation, "non-finite jet evaluation");
  return j.value();
}

}  // namespace

RealVector::RealVector(std::vector<double> entries) : entries_(std::move(entries)) {
  require_finite(entries_);
}

RealVector::RealVector(std::initializer_list<double> entries) : entries_(entries) {
  require_finite(entries_);
}

RealVector::RealVector(std::span<const double> entries)
    : entries_(entries.begin(), entries.end()) {
  require_finite(entries_);
}

RealVector RealVector::basis(std::size_t n, std::size_t i) {
  std::vector<double> e(n, 0.0);
  e.at(i) = 1.0;
  return RealVector(std::move(e));
}

JetVec to_jets(std::span<const double> x) { return JetVec(x.begin(), x.end()); }

double evaluate(const ScalarField& fn, std::span<const double> x) {
  const JetVec jx = to_jets(x);
  return checked(fn(jx));
}

LieLift lie_lift(const ScalarField& fn, std::span<const Jet> x, std::span<const Jet> v) {
  require_same_size(x.size(), v.size(), "lie_lift");
  const int level = std::max(max_depth(x), max_depth(v)) + 1;
  JetVec lifted;
  lifted.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) lifted.push_back(Jet::lift(x[i], v[i], level));
  const Jet out = fn(lifted);
  return {out.primal(level), out.tangent(level)};
}

LieLift lie_lift(const ScalarField& fn, const VectorField& v, std::span<const Jet> x) {
  const JetVec vx = v(x);
  return lie_lift(fn, x, vx);
}

ScalarField lie_field(ScalarField fn, VectorField v) {
  return [fn = std::move(fn), v = std::move(v)](std::span<const Jet> x) {
    return lie_lift(fn, v, x).derivative;
  };
}

double directional_derivative(const ScalarField& fn, const RealVector& x, const RealVector& v) {
  require_same_size(x.size(), v.size(), "directional_derivative");
  const JetVec jx = to_jets(x.span());
  const JetVec jv = to_jets(v.span());
  const LieLift l = lie_lift(fn, jx, jv);
  checked(l.value);
  return checked(l.derivative);
}

RealVector gradient(const ScalarField& fn, const RealVector& x) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    g[i] = directional_derivative(fn, x, RealVector::basis(x.size(), i));
  }
  return RealVector(std::move(g));
}

double nested_directional(const ScalarField& fn, const RealVector& x, const RealVector& v1,
                          const RealVector& v2) {
  require_same_size(x.size(), v1.size(), "nested_directional");
  require_same_size(x.size(), v2.size(), "nested_directional");
  const JetVec j1 = to_jets(v1.span());
  const JetVec j2 = to_jets(v2.span());
  // Inner derivative along v1, outer along v2 (v1, v2 are constant fields).
  const ScalarField inner = [&](std::span<const Jet> y) { return lie_lift(fn, y, j1).derivative; };
  const JetVec jx = to_jets(x.span());
  const LieLift l = lie_lift(inner, jx, j2);
  checked(l.value);
  return checked(l.derivative);
}

RealVector fd_gradient(const std::function<double(std::span<const double>)>& fn,
                       const RealVector& x, double step) {
  if (!(step > 0.0)) throw Error(ErrorCode::InvalidArgument, "finite-difference step must be > 0");
  std::vector<double> probe(x.values());
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + step;
    const double up = fn(probe);
    probe[i] = x[i] - step;
    const double down = fn(probe);
    probe[i] = x[i];
    g[i] = (up - down) / (2.0 * step);
  }
  return RealVector(std::move(g));
}

}  // namespace recbf
