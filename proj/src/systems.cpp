#include "recbf/systems.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "recbf/calculus.hpp"
#include "recbf/error.hpp"

namespace recbf {

namespace {

constexpr int kMaxLieOrder = 3;

void check_finite(const Jet& j, const char* what) {
  if (!j.is_finite()) {
    throw Error(ErrorCode::NonFiniteEvaluation, std::string("non-finite value in ") + what);
  }
}

}  // namespace

ControlAffineSystem::ControlAffineSystem(std::string name, std::size_t n, std::size_t m,
                                         VectorField drift, InputColumns input,
                                         std::optional<Box> domain)
    : name_(std::move(name)),
      n_(n),
      m_(m),
      drift_(std::move(drift)),
      input_(std::move(input)),
      domain_(std::move(domain)) {
  if (n_ == 0 || m_ == 0) throw Error(ErrorCode::InvalidArgument, "system dimensions must be >= 1");
  if (!drift_ || !input_) throw Error(ErrorCode::InvalidArgument, "system needs f and g");
  if (domain_ && domain_->size() != n_) {
    throw Error(ErrorCode::InvalidArgument, "state domain must have one interval per state");
  }
}

JetVec ControlAffineSystem::drift(std::span<const Jet> x) const {
  if (x.size() != n_) throw Error(ErrorCode::InvalidArgument, "state dimension mismatch");
  JetVec fx = drift_(x);
  if (fx.size() != n_) throw Error(ErrorCode::InvalidArgument, name_ + ": f has wrong dimension");
  return fx;
}

std::vector<JetVec> ControlAffineSystem::input_columns(std::span<const Jet> x) const {
  if (x.size() != n_) throw Error(ErrorCode::InvalidArgument, "state dimension mismatch");
  std::vector<JetVec> g = input_(x);
  if (g.size() != m_) throw Error(ErrorCode::InvalidArgument, name_ + ": g has wrong column count");
  for (const auto& col : g) {
    if (col.size() != n_) throw Error(ErrorCode::InvalidArgument, name_ + ": g has wrong row count");
  }
  return g;
}

VectorField ControlAffineSystem::drift_field() const {
  // Copies, so the field outlives this object.
  return [f = drift_, n = n_](std::span<const Jet> x) {
    JetVec fx = f(x);
    if (fx.size() != n) throw Error(ErrorCode::InvalidArgument, "f has wrong dimension");
    return fx;
  };
}

VectorField ControlAffineSystem::input_field(std::size_t j) const {
  if (j >= m_) throw Error(ErrorCode::InvalidArgument, "input column out of range");
  return [g = input_, j, n = n_](std::span<const Jet> x) {
    std::vector<JetVec> cols = g(x);
    if (j >= cols.size() || cols[j].size() != n) {
      throw Error(ErrorCode::InvalidArgument, "g has wrong dimension");
    }
    return cols[j];
  };
}

std::vector<double> ControlAffineSystem::dynamics(std::span<const double> x,
                                                  std::span<const double> u) const {
  if (u.size() != m_) throw Error(ErrorCode::InvalidArgument, "input dimension mismatch");
  const JetVec jx = to_jets(x);
  const JetVec fx = drift(jx);
  const std::vector<JetVec> g = input_columns(jx);
  std::vector<double> dx(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    double v = fx[i].value();
    for (std::size_t j = 0; j < m_; ++j) v += g[j][i].value() * u[j];
    dx[i] = v;
  }
  return dx;
}

ScalarField lie_f_field(const ControlAffineSystem& sys, ScalarField fn, int k) {
  if (k < 0 || k > kMaxLieOrder) {
    throw Error(ErrorCode::NestingDepthExceeded, "Lie derivative order must be in [0, 3]");
  }
  ScalarField out = std::move(fn);
  for (int i = 0; i < k; ++i) out = lie_field(std::move(out), sys.drift_field());
  return out;
}

double lie_f(const ControlAffineSystem& sys, const ScalarField& fn, int k,
             std::span<const double> x) {
  const ScalarField field = lie_f_field(sys, fn, k);
  const Jet out = field(to_jets(x));
  check_finite(out, "lie_f");
  return out.value();
}

std::vector<double> lie_g_lie_f(const ControlAffineSystem& sys, const ScalarField& fn, int k,
                                std::span<const double> x) {
  if (k + 1 > kMaxLieOrder) {
    throw Error(ErrorCode::NestingDepthExceeded, "L_g L_f^k needs k + 1 <= 3");
  }
  const ScalarField field = lie_f_field(sys, fn, k);
  const JetVec jx = to_jets(x);
  const std::vector<JetVec> g = sys.input_columns(jx);
  std::vector<double> row(sys.input_dim());
  for (std::size_t j = 0; j < row.size(); ++j) {
    const Jet d = lie_lift(field, jx, g[j]).derivative;
    check_finite(d, "lie_g_lie_f");
    row[j] = d.value();
  }
  return row;
}

Jet Polynomial::operator()(std::span<const Jet> x) const {
  Jet sum(0.0);
  for (const auto& term : terms) {
    if (term.powers.size() != x.size()) {
      throw Error(ErrorCode::InvalidArgument, "polynomial term has wrong number of exponents");
    }
    Jet prod(term.coeff);
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (term.powers[i] < 0) throw Error(ErrorCode::InvalidArgument, "negative exponent");
      for (int p = 0; p < term.powers[i]; ++p) prod *= x[i];
    }
    sum += prod;
  }
  return sum;
}

ControlAffineSystem make_polynomial_system(std::string name, std::size_t n, std::size_t m,
                                           std::vector<Polynomial> drift,
                                           std::vector<std::vector<Polynomial>> input,
                                           std::optional<Box> domain) {
  if (drift.size() != n) throw Error(ErrorCode::InvalidArgument, "f needs n polynomials");
  if (input.size() != n) throw Error(ErrorCode::InvalidArgument, "g needs n rows");
  for (const auto& row : input) {
    if (row.size() != m) throw Error(ErrorCode::InvalidArgument, "g rows need m polynomials");
  }
  VectorField f = [drift = std::move(drift)](std::span<const Jet> x) {
    JetVec out;
    out.reserve(drift.size());
    for (const auto& p : drift) out.push_back(p(x));
    return out;
  };
  InputColumns g = [input = std::move(input), n, m](std::span<const Jet> x) {
    std::vector<JetVec> cols(m, JetVec(n));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) cols[j][i] = input[i][j](x);
    }
    return cols;
  };
  return ControlAffineSystem(std::move(name), n, m, std::move(f), std::move(g), std::move(domain));
}

ControlAffineSystem double_integrator() {
  return ControlAffineSystem(
      "double_integrator", 2, 1,
      [](std::span<const Jet> x) { return JetVec{x[1], Jet(0.0)}; },
      [](std::span<const Jet>) { return std::vector<JetVec>{{Jet(0.0), Jet(1.0)}}; },
      Box{{-1.5, 1.5}, {-4.0, 4.0}});
}

ControlAffineSystem triple_integrator() {
  return ControlAffineSystem(
      "triple_integrator", 3, 1,
      [](std::span<const Jet> x) { return JetVec{x[1], x[2], Jet(0.0)}; },
      [](std::span<const Jet>) { return std::vector<JetVec>{{Jet(0.0), Jet(0.0), Jet(1.0)}}; },
      Box{{-1.5, 1.5}, {-3.0, 3.0}, {-3.0, 3.0}});
}

ControlAffineSystem aircraft_pitch(const AircraftParams& p) {
  if (!(p.gravity > 0.0 && p.airspeed > 0.0 && p.time_constant > 0.0 && p.theta_max > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "aircraft parameters must be positive");
  }
  const double pitch_gain = p.gravity / p.airspeed;
  const double inv_tau = 1.0 / p.time_constant;
  return ControlAffineSystem(
      "aircraft_pitch", 2, 1,
      [pitch_gain, inv_tau](std::span<const Jet> x) {
        // x = (theta, A_z)
        return JetVec{Jet(pitch_gain) * (x[1] - cos(x[0])), -Jet(inv_tau) * x[1]};
      },
      [inv_tau](std::span<const Jet>) { return std::vector<JetVec>{{Jet(0.0), Jet(inv_tau)}}; },
      Box{{-0.45, 0.45}, {-30.0, 30.0}});
}

ControlAffineSystem mixed_two_input() {
  return ControlAffineSystem(
      "mixed_two_input", 2, 2,
      [](std::span<const Jet> x) { return JetVec{x[1], Jet(0.0)}; },
      [](std::span<const Jet>) {
        return std::vector<JetVec>{{Jet(1.0), Jet(0.0)}, {Jet(0.0), Jet(1.0)}};
      },
      Box{{-1.5, 1.5}, {-4.0, 4.0}});
}

ConstraintFn unit_position_constraint(int relative_degree) {
  return {[](std::span<const Jet> x) { return Jet(1.0) - x[0] * x[0]; }, relative_degree};
}

ConstraintFn pitch_constraint(const AircraftParams& p) {
  const double limit_sq = p.theta_max * p.theta_max;
  return {[limit_sq](std::span<const Jet> x) { return Jet(limit_sq) - x[0] * x[0]; }, 2};
}

std::vector<std::string> builtin_system_names() {
  return {"double_integrator", "triple_integrator", "aircraft_pitch", "mixed_two_input"};
}

}  // namespace recbf
