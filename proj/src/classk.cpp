#include "recbf/classk.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "recbf/error.hpp"

namespace recbf {

namespace {

void require_positive(double coeff, const char* family) {
  if (!(coeff > 0.0) || !std::isfinite(coeff)) {
    throw Error(ErrorCode::InvalidArgument,
                std::string(family) + " class-K coefficient must be positive and finite");
  }
}

double sample_point(double range, int samples, int i) {
  return -range + 2.0 * range * static_cast<double>(i) / static_cast<double>(samples - 1);
}

}  // namespace

ClassKFn ClassKFn::linear(double coeff) {
  require_positive(coeff, "linear");
  ClassKFn fn;
  fn.kind_ = Kind::Linear;
  fn.coeff_ = coeff;
  fn.name_ = "linear";
  return fn;
}

ClassKFn ClassKFn::signed_square(double coeff) {
  require_positive(coeff, "signed_square");
  ClassKFn fn;
  fn.kind_ = Kind::SignedSquare;
  fn.coeff_ = coeff;
  fn.name_ = "signed_square";
  return fn;
}

ClassKFn ClassKFn::shifted(ClassKFn inner, double epsilon) {
  if (!std::isfinite(epsilon)) throw Error(ErrorCode::InvalidArgument, "shift must be finite");
  ClassKFn fn;
  fn.kind_ = Kind::Shifted;
  fn.shift_ = epsilon;
  fn.name_ = "shifted(" + inner.name() + ")";
  fn.inner_ = std::make_shared<const ClassKFn>(std::move(inner));
  return fn;
}

ClassKFn ClassKFn::custom(std::string name, std::function<Jet(const Jet&)> f) {
  if (!f) throw Error(ErrorCode::InvalidArgument, "custom class-K function is empty");
  ClassKFn fn;
  fn.kind_ = Kind::Custom;
  fn.name_ = std::move(name);
  fn.custom_ = std::move(f);
  validate_class_k(fn);
  return fn;
}

Jet ClassKFn::operator()(const Jet& s) const {
  switch (kind_) {
    case Kind::Linear:
      return s * Jet(coeff_);
    case Kind::SignedSquare:
      return s * abs(s) * Jet(coeff_);
    case Kind::Shifted:
      return (*inner_)(s - Jet(shift_));
    case Kind::Custom:
      return custom_(s);
  }
  return Jet(0.0);
}

double ClassKFn::operator()(double s) const {
  switch (kind_) {
    case Kind::Linear:
      return coeff_ * s;
    case Kind::SignedSquare:
      return coeff_ * s * std::abs(s);
    case Kind::Shifted:
      return (*inner_)(s - shift_);
    case Kind::Custom:
      return custom_(Jet(s)).value();
  }
  return 0.0;
}

double ClassKFn::derivative(double s) const {
  switch (kind_) {
    case Kind::Linear:
      return coeff_;
    case Kind::SignedSquare:
      return 2.0 * coeff_ * std::abs(s);
    case Kind::Shifted:
      return inner_->derivative(s - shift_);
    case Kind::Custom:
      return custom_(Jet::lift(Jet(s), Jet(1.0), 1)).infinitesimal().value();
  }
  return 0.0;
}

bool ClassKFn::has_isolated_critical_point() const {
  if (kind_ == Kind::Linear) return false;
  if (kind_ == Kind::SignedSquare) return true;
  const double origin = kind_ == Kind::Shifted ? shift_ : 0.0;
  if (derivative(origin) != 0.0) return false;
  for (double delta : {1e-9, 1e-6, 1e-3}) {
    if (!(derivative(origin + delta) > 0.0) || !(derivative(origin - delta) > 0.0)) return false;
  }
  constexpr int kSamples = 1000;
  for (int i = 0; i < kSamples; ++i) {
    const double s = origin + sample_point(10.0, kSamples, i);
    if (s != origin && !(derivative(s) > 0.0)) return false;
  }
  return true;
}

void validate_class_k(const ClassKFn& fn, double range, int samples) {
  if (fn(0.0) != 0.0) {
    throw Error(ErrorCode::InvalidArgument, "class-K function " + fn.name() + " must vanish at 0");
  }
  double prev = fn(sample_point(range, samples, 0));
  for (int i = 1; i < samples; ++i) {
    const double cur = fn(sample_point(range, samples, i));
    if (!std::isfinite(cur) || !(cur > prev)) {
      throw Error(ErrorCode::InvalidArgument,
                  "class-K function " + fn.name() + " is not strictly increasing on the sample grid");
    }
    prev = cur;
  }
}

bool dominates(const ClassKFn& a, const ClassKFn& b, double range, int samples) {
  for (int i = 0; i < samples; ++i) {
    const double s = sample_point(range, samples, i);
    if (a(s) < b(s)) return false;
  }
  return true;
}

Rectifier::Rectifier(ClassKFn gamma, double epsilon) : gamma_(std::move(gamma)), epsilon_(epsilon) {
  if (!(epsilon_ >= 0.0) || !std::isfinite(epsilon_)) {
    throw Error(ErrorCode::InvalidArgument, "rectifier shift must be finite and >= 0");
  }
  if (gamma_.kind() == ClassKFn::Kind::Shifted) {
    throw Error(ErrorCode::InvalidArgument, "rectifier gamma must be unshifted; pass epsilon");
  }
  if (!gamma_.has_isolated_critical_point()) {
    throw Error(ErrorCode::InvalidArgument,
                "rectifier gamma must satisfy gamma'(s) = 0 <=> s = 0 (got " + gamma_.name() + ")");
  }
}

Jet Rectifier::operator()(const Jet& s) const { return relu(-gamma_(s - Jet(epsilon_))); }

double Rectifier::operator()(double s) const { return std::max(0.0, -gamma_(s - epsilon_)); }

double Rectifier::derivative(double s) const {
  return s < epsilon_ ? -gamma_.derivative(s - epsilon_) : 0.0;
}

}  // namespace recbf
