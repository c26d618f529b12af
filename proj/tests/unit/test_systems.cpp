#include <cmath>

#include "doctest.h"
#include "recbf/barriers.hpp"
#include "recbf/calculus.hpp"
#include "recbf/error.hpp"
#include "recbf/systems.hpp"
#include "support.hpp"

using namespace recbf;

TEST_CASE("double integrator model") {
  const ControlAffineSystem sys = double_integrator();
  CHECK(sys.state_dim() == 2);
  CHECK(sys.input_dim() == 1);
  const std::vector<double> x{0.3, -1.2};
  const std::vector<double> u{2.0};
  const auto dx = sys.dynamics(x, u);
  CHECK(dx[0] == -1.2);
  CHECK(dx[1] == 2.0);
}

TEST_CASE("aircraft model") {
  const AircraftParams p;
  const ControlAffineSystem sys = aircraft_pitch(p);
  const std::vector<double> x{0.2, 1.5};
  const std::vector<double> u{3.0};
  const auto dx = sys.dynamics(x, u);
  CHECK(dx[0] == doctest::Approx(p.gravity / p.airspeed * (1.5 - std::cos(0.2))).epsilon(1e-15));
  CHECK(dx[1] == doctest::Approx(-1.5 / p.time_constant + 3.0 / p.time_constant).epsilon(1e-15));
}

TEST_CASE("Lie derivatives on the double integrator") {
  const ControlAffineSystem sys = double_integrator();
  const ConstraintFn c = unit_position_constraint(2);
  const std::vector<double> x{0.5, 2.0};
  CHECK(lie_f(sys, c.psi, 1, x) == -2.0);
  CHECK(lie_f(sys, c.psi, 0, x) == 0.75);
  CHECK(lie_g_lie_f(sys, c.psi, 1, x)[0] == -1.0);
  CHECK(lie_g_lie_f(sys, c.psi, 0, x)[0] == 0.0);
}

TEST_CASE("Lie derivative order cap") {
  const ControlAffineSystem sys = triple_integrator();
  const ConstraintFn c = unit_position_constraint(3);
  const std::vector<double> x{0.1, 0.2, 0.3};
  CHECK_THROWS_AS(lie_f(sys, c.psi, 4, x), Error);
  CHECK_THROWS_AS(lie_g_lie_f(sys, c.psi, 3, x), Error);
  CHECK_NOTHROW(lie_f(sys, c.psi, 3, x));
}

TEST_CASE("builtin models agree with hand-derived Lie derivatives") {
  testing::Sampler s(99);
  const AircraftParams ap;
  const double a = ap.gravity / ap.airspeed;
  const double tau = ap.time_constant;

  const ControlAffineSystem di = double_integrator();
  const ControlAffineSystem ti = triple_integrator();
  const ControlAffineSystem ac = aircraft_pitch(ap);
  const ControlAffineSystem mx = mixed_two_input();
  const ConstraintFn unit = unit_position_constraint(2);
  const ConstraintFn pitch = pitch_constraint(ap);

  for (int i = 0; i < 1000; ++i) {
    {
      const auto x = s.in_box(*di.domain());
      CHECK(testing::close(lie_f(di, unit.psi, 1, x), -2 * x[0] * x[1], 1e-10, 0));
      CHECK(testing::close(lie_f(di, unit.psi, 2, x), -2 * x[1] * x[1], 1e-10, 0));
      CHECK(lie_g_lie_f(di, unit.psi, 0, x)[0] == 0.0);
      CHECK(testing::close(lie_g_lie_f(di, unit.psi, 1, x)[0], -2 * x[0], 1e-10, 0));
    }
    {
      const auto x = s.in_box(*ti.domain());
      CHECK(testing::close(lie_f(ti, unit.psi, 2, x), -2 * x[1] * x[1] - 2 * x[0] * x[2], 1e-10, 0));
      CHECK(testing::close(lie_f(ti, unit.psi, 3, x), -6 * x[1] * x[2], 1e-10, 0));
      CHECK(lie_g_lie_f(ti, unit.psi, 1, x)[0] == 0.0);
      CHECK(testing::close(lie_g_lie_f(ti, unit.psi, 2, x)[0], -2 * x[0], 1e-10, 0));
    }
    {
      const auto x = s.in_box(*ac.domain());
      const double th = x[0], az = x[1];
      const double lf = -2 * th * a * (az - std::cos(th));
      CHECK(testing::close(lie_f(ac, pitch.psi, 1, x), lf, 1e-10, 1e-14));
      CHECK(testing::close(lie_g_lie_f(ac, pitch.psi, 1, x)[0], -2 * a / tau * th, 1e-10, 1e-14));
      // d/dx of lf along f = (a (az - cos th), -az / tau).
      const double dlf_dth = -2 * a * (az - std::cos(th)) - 2 * th * a * std::sin(th);
      const double dlf_daz = -2 * th * a;
      const double lf2 = dlf_dth * a * (az - std::cos(th)) + dlf_daz * (-az / tau);
      CHECK(testing::close(lie_f(ac, pitch.psi, 2, x), lf2, 1e-10, 1e-12));
    }
    {
      const auto x = s.in_box(*mx.domain());
      const auto lg = lie_g_lie_f(mx, unit.psi, 0, x);
      CHECK(testing::close(lg[0], -2 * x[0], 1e-10, 0));
      CHECK(lg[1] == 0.0);
      const auto lglf = lie_g_lie_f(mx, unit.psi, 1, x);
      CHECK(testing::close(lglf[0], -2 * x[1], 1e-10, 0));
      CHECK(testing::close(lglf[1], -2 * x[0], 1e-10, 0));
    }
  }
}

TEST_CASE("polynomial systems") {
  // x1' = x2 + u1, x2' = -x1^2 + u2 with g = I.
  Polynomial f1{{{1.0, {0, 1}}}};
  Polynomial f2{{{-1.0, {2, 0}}}};
  Polynomial one{{{1.0, {0, 0}}}};
  Polynomial zero{};
  const ControlAffineSystem sys =
      make_polynomial_system("poly", 2, 2, {f1, f2}, {{one, zero}, {zero, one}});
  const std::vector<double> x{2.0, 3.0};
  const std::vector<double> u{0.5, -1.0};
  const auto dx = sys.dynamics(x, u);
  CHECK(dx[0] == 3.5);
  CHECK(dx[1] == -5.0);
  CHECK_THROWS_AS(make_polynomial_system("bad", 2, 1, {f1}, {{one}, {one}}), Error);
}

TEST_CASE("builtin lookup") {
  CHECK(builtin_system_names().size() == 4);
  for (const auto& name : builtin_system_names()) CHECK_NOTHROW(builtin(name));
  try {
    (void)builtin("quadrotor");
    FAIL("expected UnknownSystem");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownSystem);
  }
  const Problem p = builtin("double_integrator");
  CHECK(p.system->state_dim() == 2);
  CHECK(p.constraint.relative_degree == 2);
}

TEST_CASE("input dimension is checked") {
  const ControlAffineSystem sys = double_integrator();
  const std::vector<double> x{0.0, 0.0};
  const std::vector<double> u{1.0, 2.0};
  CHECK_THROWS_AS(sys.dynamics(x, u), Error);
}
