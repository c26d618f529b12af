#include <cmath>
#include <vector>

#include "doctest.h"
#include "recbf/barriers.hpp"
#include "recbf/calculus.hpp"
#include "recbf/error.hpp"
#include "support.hpp"

using namespace recbf;

namespace {

Barrier make(const std::string& system, BarrierKind kind, int order = 2) {
  const Problem p = builtin(system);
  BarrierSpec spec = p.default_barrier;
  spec.kind = kind;
  spec.order = order;
  spec.alphas.assign(static_cast<std::size_t>(order - 1), ClassKFn::linear(1.0));
  spec.gammas.assign(static_cast<std::size_t>(order - 1), Rectifier(ClassKFn::signed_square(1.0)));
  if (kind == BarrierKind::HOCBF || kind == BarrierKind::Breeden || kind == BarrierKind::Plain) {
    spec.gammas.clear();
  }
  if (kind == BarrierKind::Breeden || kind == BarrierKind::Plain) spec.alphas.clear();
  if (kind == BarrierKind::Backstepping) spec.gammas.clear();
  return Barrier(spec, p.system);
}

double theta_sq(double s) { return s < 0 ? s * s : 0.0; }
double dtheta_sq(double s) { return s < 0 ? 2 * s : 0.0; }

// Two-stage recursion on the triple integrator with alpha_i = id and
// gamma_i(s) = s|s|, expanded by hand.
double triple_recursion(const std::vector<double>& x) {
  const double x1 = x[0], x2 = x[1], x3 = x[2];
  const double psi = 1 - x1 * x1;
  const double lf_psi = -2 * x1 * x2;
  const double psi1 = lf_psi + psi;
  const double h1 = psi - theta_sq(psi1);
  const double lf_psi1 = -2 * x2 * x2 - 2 * x1 * x3 - 2 * x1 * x2;
  const double lf_h1 = lf_psi - dtheta_sq(psi1) * lf_psi1;
  const double psi2 = lf_h1 + h1;
  return h1 - theta_sq(psi2);
}

}  // namespace

TEST_CASE("ReCBF2 values on the double integrator") {
  const Barrier b = make("double_integrator", BarrierKind::ReCBF2);
  const std::vector<double> far{0.0, 5.0};
  CHECK(recbf2_value(b, far) == 1.0);
  const std::vector<double> active{0.5, 1.0};
  CHECK(recbf2_value(b, active) == 0.6875);
  const std::vector<double> seam{0.5, 0.75};
  CHECK(b.stage_values(seam)[0] == 0.0);
  CHECK(recbf2_value(b, seam) == 0.75);
}

TEST_CASE("ReCBF2 closed-form Lie derivatives") {
  const Barrier b = make("double_integrator", BarrierKind::ReCBF2);
  const std::vector<double> inactive{-0.5, 1.0};
  const LieDerivatives l = recbf2_lie(b, inactive);
  CHECK(l.lf == lie_f(b.system(), b.spec().constraint.psi, 1, inactive));
  CHECK(l.lg[0] == 0.0);

  const std::vector<double> active{0.5, 1.0};
  const LieDerivatives closed = recbf2_lie(b, active);
  const LieDerivatives ad = b.lie_autodiff(active);
  CHECK(closed.lf == doctest::Approx(ad.lf).epsilon(1e-10));
  CHECK(closed.lg[0] == doctest::Approx(ad.lg[0]).epsilon(1e-10));
  // By hand: L_f h = L_f psi - Theta'(psi1) (L_f^2 psi + L_f psi), L_g h = -Theta'(psi1) (-2x).
  CHECK(closed.lf == doctest::Approx(-1.0 - (-0.5) * (-2.0 - 1.0)));
  CHECK(closed.lg[0] == doctest::Approx(-(-0.5) * (-1.0)));
}

TEST_CASE("ReCBF2 closed form matches autodiff on the mixed-input system") {
  const Barrier b = make("mixed_two_input", BarrierKind::ReCBF2);
  testing::Sampler s(12);
  for (int i = 0; i < 500; ++i) {
    const auto x = s.in_box(*b.system().domain());
    const LieDerivatives closed = b.lie(x);
    const LieDerivatives ad = b.lie_autodiff(x);
    CHECK(testing::close(closed.lf, ad.lf, 1e-10, 1e-12));
    for (std::size_t j = 0; j < 2; ++j) CHECK(testing::close(closed.lg[j], ad.lg[j], 1e-10, 1e-12));
  }
}

TEST_CASE("rectifier deactivation leaves psi unchanged") {
  const Barrier b = make("double_integrator", BarrierKind::ReCBF2);
  testing::Sampler s(2);
  for (int i = 0; i < 1000; ++i) {
    const auto x = s.in_box(*b.system().domain());
    if (b.stage_values(x)[0] < 0.0) continue;
    CHECK(b.value(x) == b.psi(x));
    const LieDerivatives l = b.lie(x);
    CHECK(l.lf == lie_f(b.system(), b.spec().constraint.psi, 1, x));
    CHECK(l.lg[0] == 0.0);
  }
}

TEST_CASE("recursive construction of order two equals the closed form") {
  const Barrier closed = make("double_integrator", BarrierKind::ReCBF2);
  const Barrier rec = make("double_integrator", BarrierKind::ReCBFRecursive, 2);
  testing::Sampler s(7);
  for (int i = 0; i < 1000; ++i) {
    const auto x = s.in_box(*closed.system().domain());
    CHECK(std::abs(recbf_recursive_value(rec, x) - recbf2_value(closed, x)) <= 1e-12);
    const LieDerivatives a = recbf_recursive_lie(rec, x);
    const LieDerivatives c = recbf2_lie(closed, x);
    CHECK(testing::close(a.lf, c.lf, 1e-12, 1e-12));
    CHECK(testing::close(a.lg[0], c.lg[0], 1e-12, 1e-12));
  }
}

TEST_CASE("triple-integrator recursion matches the hand expansion") {
  const Barrier b = make("triple_integrator", BarrierKind::ReCBFRecursive, 3);
  const std::vector<double> spec_point{0.5, -2.0, 0.0};
  CHECK(b.value(spec_point) == doctest::Approx(triple_recursion(spec_point)).epsilon(1e-14));
  CHECK(b.value(spec_point) == 0.75);
  const std::vector<double> both_active{0.5, 2.0, 1.0};
  CHECK(b.stage_values(both_active)[0] == doctest::Approx(-1.25));
  CHECK(b.stage_values(both_active)[1] == doctest::Approx(-30.3125));
  CHECK(b.value(both_active) == doctest::Approx(-0.8125 - 30.3125 * 30.3125));
  testing::Sampler s(31);
  for (int i = 0; i < 1000; ++i) {
    const auto x = s.in_box(*b.system().domain());
    CHECK(testing::close(b.value(x), triple_recursion(x), 1e-12, 1e-12));
  }
}

TEST_CASE("product formula agrees with autodiff on the triple integrator") {
  const Barrier b = make("triple_integrator", BarrierKind::ReCBFRecursive, 3);
  testing::Sampler s(41);
  for (int i = 0; i < 1000; ++i) {
    const auto x = s.in_box(*b.system().domain());
    const double ad = b.lie(x).lg[0];
    const double pf = b.product_formula_lg(x)[0];
    CHECK(testing::close(ad, pf, 1e-8, 1e-12));
    const auto stages = b.stage_values(x);
    if (stages[0] >= 0.0 || stages[1] >= 0.0) CHECK(ad == 0.0);
  }
}

TEST_CASE("HOCBF chain on the double integrator") {
  const Barrier b = make("double_integrator", BarrierKind::HOCBF);
  testing::Sampler s(13);
  for (int i = 0; i < 200; ++i) {
    const auto x = s.in_box(*b.system().domain());
    const HocbfChainValues c = hocbf_chain(b, x);
    REQUIRE(c.psi.size() == 2);
    CHECK(c.psi[0] == doctest::Approx(1 - x[0] * x[0]));
    CHECK(c.psi[1] == doctest::Approx(-2 * x[0] * x[1] + 1 - x[0] * x[0]));
    CHECK(c.lg_last[0] == doctest::Approx(-2 * x[0]));
  }
  const std::vector<double> x{0.0, 3.0};
  const HocbfChainValues c = hocbf_chain(b, x);
  CHECK(c.lg_last[0] == 0.0);
  CHECK(c.lf_last == -18.0);
  CHECK(b.set_value(x) == 1.0);
}

TEST_CASE("HOCBF chain on the triple integrator") {
  const Barrier b = make("triple_integrator", BarrierKind::HOCBF, 3);
  const std::vector<double> x{0.4, -0.7, 1.1};
  const HocbfChainValues c = hocbf_chain(b, x);
  const double psi0 = 1 - 0.16;
  const double psi1 = -2 * 0.4 * -0.7 + psi0;
  const double lf_psi1 = -2 * 0.49 - 2 * 0.4 * 1.1 - 2 * 0.4 * -0.7;
  const double psi2 = lf_psi1 + psi1;
  CHECK(c.psi[0] == doctest::Approx(psi0));
  CHECK(c.psi[1] == doctest::Approx(psi1));
  CHECK(c.psi[2] == doctest::Approx(psi2));
  CHECK(c.lg_last[0] == doctest::Approx(-2 * 0.4));
}

TEST_CASE("Breeden barrier") {
  const Barrier b = make("double_integrator", BarrierKind::Breeden);
  const std::vector<double> first{0.5, -1.0};
  CHECK(breeden_value(b, first) == 0.75);
  const std::vector<double> second{0.5, 1.0};
  CHECK(breeden_value(b, second) == 0.25);
  const std::vector<double> seam{0.5, 0.0};
  CHECK(breeden_value(b, seam) == 0.75);
  testing::Sampler s(17);
  for (int i = 0; i < 500; ++i) {
    const auto x = s.in_box(*b.system().domain());
    const LieDerivatives closed = breeden_lie(b, x);
    const LieDerivatives ad = b.lie_autodiff(x);
    CHECK(testing::close(closed.lf, ad.lf, 1e-10, 1e-12));
    CHECK(testing::close(closed.lg[0], ad.lg[0], 1e-10, 1e-12));
  }
}

TEST_CASE("backstepping barriers with the linear virtual controller") {
  const Barrier bs = make("double_integrator", BarrierKind::Backstepping);
  const std::vector<double> x{0.5, 1.0};
  CHECK(bs.virtual_control(x) == -0.25);
  CHECK(backstepping_value(bs, x) == -0.03125);
  const std::vector<double> on_manifold{0.5, -0.25};
  CHECK(backstepping_value(bs, on_manifold) == 0.75);

  const Barrier rbs = make("double_integrator", BarrierKind::RectifiedBackstepping);
  // dpsi/dx (xdot - k) = -1 * (-1 + 0.25) >= 0: inactive.
  const std::vector<double> inactive{0.5, -1.0};
  CHECK(rectified_backstepping_value(rbs, inactive) == 0.75);
  // Active: arg = -1 * 1.25 = -1.25, Theta = 1.5625.
  CHECK(rectified_backstepping_value(rbs, x) == doctest::Approx(0.75 - 1.5625));
}

TEST_CASE("regularized virtual controller") {
  const Problem p = builtin("double_integrator");
  BarrierSpec spec = p.default_barrier;
  spec.kind = BarrierKind::RectifiedBackstepping;
  spec.virtual_controller.kind = VirtualController::Kind::Regularized;
  spec.virtual_controller.regularization = 0.04;
  const Barrier b(spec, p.system);
  const std::vector<double> x{0.5, 0.0};
  // b = -1, alpha(psi) = 0.75: k = 0.75 / 1.04.
  CHECK(b.virtual_control(x) == doctest::Approx(0.75 / 1.04));
  testing::Sampler s(3);
  for (int i = 0; i < 1000; ++i) {
    const std::vector<double> y{s.uniform(-1.0, 1.0), 0.0};
    const double dpsi = -2 * y[0];
    CHECK(dpsi * b.virtual_control(y) >= -(1 - y[0] * y[0]) - 1e-15);
  }
}

TEST_CASE("backstepping is defined for the double integrator only") {
  const Problem p = builtin("triple_integrator");
  BarrierSpec spec = p.default_barrier;
  spec.kind = BarrierKind::Backstepping;
  spec.order = 2;
  spec.alphas = {ClassKFn::linear(1.0)};
  spec.gammas.clear();
  try {
    Barrier b(spec, p.system);
    FAIL("expected WrongSystem");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::WrongSystem);
  }
}

TEST_CASE("construction checks") {
  const Problem p = builtin("triple_integrator");
  BarrierSpec spec = p.default_barrier;
  spec.alphas = {ClassKFn::linear(2.0), ClassKFn::linear(1.0)};
  CHECK_THROWS_AS(Barrier(spec, p.system), Error);
  spec.alphas = {ClassKFn::linear(1.0)};
  CHECK_THROWS_AS(Barrier(spec, p.system), Error);
  spec = p.default_barrier;
  spec.order = 5;
  spec.alphas.assign(4, ClassKFn::linear(1.0));
  spec.gammas.assign(4, Rectifier(ClassKFn::signed_square(1.0)));
  try {
    Barrier b(spec, p.system);
    FAIL("expected NestingDepthExceeded");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NestingDepthExceeded);
  }
  const Barrier plain = make("double_integrator", BarrierKind::Plain);
  CHECK_THROWS_AS(recbf2_value(plain, std::vector<double>{0.0, 0.0}), Error);
}

TEST_CASE("order-four recursion evaluates within the nesting cap") {
  // x1' = x2, x2' = x3, x3' = x4, x4' = u.
  Polynomial x2{{{1.0, {0, 1, 0, 0}}}}, x3{{{1.0, {0, 0, 1, 0}}}}, x4{{{1.0, {0, 0, 0, 1}}}};
  Polynomial zero{}, one{{{1.0, {0, 0, 0, 0}}}};
  auto sys = std::make_shared<const ControlAffineSystem>(make_polynomial_system(
      "quad_integrator", 4, 1, {x2, x3, x4, zero}, {{zero}, {zero}, {zero}, {one}}));
  BarrierSpec spec;
  spec.kind = BarrierKind::ReCBFRecursive;
  spec.order = 4;
  spec.alphas.assign(3, ClassKFn::linear(1.0));
  spec.gammas.assign(3, Rectifier(ClassKFn::signed_square(1.0)));
  spec.constraint = unit_position_constraint(4);
  const Barrier b(spec, sys);
  const std::vector<double> x{0.5, 1.0, 0.5, -0.3};
  const LieDerivatives l = b.lie(x);
  CHECK(std::isfinite(l.lf));
  CHECK(testing::close(l.lg[0], b.product_formula_lg(x)[0], 1e-8, 1e-12));
}

TEST_CASE("zero superlevel sets are nested in the constraint set") {
  testing::Sampler s(23);
  for (BarrierKind kind : {BarrierKind::Plain, BarrierKind::ReCBF2, BarrierKind::HOCBF,
                           BarrierKind::Breeden, BarrierKind::Backstepping,
                           BarrierKind::RectifiedBackstepping}) {
    const Barrier b = make("double_integrator", kind);
    for (int i = 0; i < 1000; ++i) {
      const auto x = s.in_box(*b.system().domain());
      if (b.set_value(x) >= 0.0) CHECK(b.psi(x) >= 0.0);
      if (kind != BarrierKind::HOCBF) CHECK(b.value(x) <= b.psi(x));
    }
  }
}
