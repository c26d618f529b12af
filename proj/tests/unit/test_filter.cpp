#include <cmath>
#include <vector>

#include "doctest.h"
#include "recbf/error.hpp"
#include "recbf/filter.hpp"
#include "support.hpp"

using namespace recbf;

namespace {

Barrier hocbf_double_integrator() {
  const Problem p = builtin("double_integrator");
  BarrierSpec spec = p.default_barrier;
  spec.kind = BarrierKind::HOCBF;
  spec.gammas.clear();
  return Barrier(spec, p.system);
}

FilterConfig hocbf_config() {
  FilterConfig cfg;
  cfg.mode = FilterConfig::Mode::HOCBF;
  return cfg;
}

}  // namespace

TEST_CASE("half-space projection examples") {
  const std::vector<double> zero{0.0};
  const std::vector<double> two{2.0};
  FilterResult r = project_halfspace(1.0, two, zero);
  CHECK(r.u[0] == 0.0);
  CHECK_FALSE(r.active);
  CHECK(r.feasible);

  r = project_halfspace(-1.0, two, zero);
  CHECK(r.u[0] == 0.5);
  CHECK(r.margin == 0.0);
  CHECK(r.active);

  const std::vector<double> b0{0.0, 0.0};
  const std::vector<double> u2{0.3, -4.0};
  r = project_halfspace(-1.0, b0, u2);
  CHECK_FALSE(r.feasible);
  CHECK(r.u == u2);
}

TEST_CASE("degenerate constraint direction uses the margin tolerance") {
  const std::vector<double> tiny{1e-12};
  const std::vector<double> u{0.7};
  FilterResult r = project_halfspace(-5e-10, tiny, u);
  CHECK(r.feasible);
  CHECK_FALSE(r.active);
  CHECK(r.u == u);
  CHECK(r.margin >= -kMarginTolerance);

  r = project_halfspace(-1e-8, tiny, u);
  CHECK_FALSE(r.feasible);
  CHECK(r.u == u);
}

TEST_CASE("feasible results respect the margin invariant") {
  testing::Sampler s(77);
  for (int k = 0; k < 2000; ++k) {
    const std::vector<double> b{s.uniform(-1e-9, 1e-9) * (k % 3 == 0 ? 1.0 : 1e9), s.uniform(-1.0, 1.0) * (k % 2)};
    const std::vector<double> u{s.uniform(-3.0, 3.0), s.uniform(-3.0, 3.0)};
    const FilterResult r = project_halfspace(s.uniform(-2.0, 2.0) * (k % 5 == 0 ? 1e-9 : 1.0), b, u);
    if (r.feasible) CHECK(r.margin >= -kMarginTolerance);
  }
}

TEST_CASE("1-D projection matches a brute-force grid search") {
  testing::Sampler s(101);
  for (int i = 0; i < 200; ++i) {
    const double a = s.uniform(-3, 3);
    const double b = (s.uniform(0, 1) < 0.5 ? -1 : 1) * s.uniform(1, 2);
    const double u_nom = s.uniform(-2, 2);
    const std::vector<double> bv{b}, un{u_nom};
    const FilterResult r = project_halfspace(a, bv, un);
    double best = NAN, best_cost = INFINITY;
    for (int k = 0; k <= 200000; ++k) {
      const double u = -10.0 + 1e-4 * k;
      if (a + b * u < 0.0) continue;
      const double cost = (u - u_nom) * (u - u_nom);
      if (cost < best_cost) {
        best_cost = cost;
        best = u;
      }
    }
    CHECK(std::abs(r.u[0] - best) <= 1e-3);
  }
}

TEST_CASE("multi-input projection satisfies KKT and beats random feasible points") {
  testing::Sampler s(202);
  for (int i = 0; i < 300; ++i) {
    const double a = s.uniform(-3, 3);
    const std::vector<double> b{s.uniform(-2, 2), s.uniform(-2, 2)};
    const std::vector<double> u_nom{s.uniform(-2, 2), s.uniform(-2, 2)};
    const FilterResult r = project_halfspace(a, b, u_nom);
    REQUIRE(r.feasible);
    const double d0 = r.u[0] - u_nom[0], d1 = r.u[1] - u_nom[1];
    if (r.active) {
      CHECK(std::abs(r.margin) <= 1e-9);
      CHECK(std::abs(d0 * b[1] - d1 * b[0]) <= 1e-12 * (1 + std::abs(d0) + std::abs(d1)));
      CHECK(d0 * b[0] + d1 * b[1] >= 0.0);
    } else {
      CHECK(d0 == 0.0);
      CHECK(d1 == 0.0);
    }
    const double cost = d0 * d0 + d1 * d1;
    for (int k = 0; k < 200; ++k) {
      const std::vector<double> v{s.uniform(-10, 10), s.uniform(-10, 10)};
      if (a + b[0] * v[0] + b[1] * v[1] < 0.0) continue;
      const double c = (v[0] - u_nom[0]) * (v[0] - u_nom[0]) + (v[1] - u_nom[1]) * (v[1] - u_nom[1]);
      CHECK(c >= cost - 1e-12);
    }
  }
}

TEST_CASE("filtering is idempotent") {
  testing::Sampler s(303);
  const Problem p = builtin("double_integrator");
  const Barrier b(p.default_barrier, p.system);
  const FilterConfig cfg;
  for (int i = 0; i < 300; ++i) {
    const auto x = s.in_box(*p.system->domain());
    const std::vector<double> u_nom{s.uniform(-5, 5)};
    const FilterResult once = safety_filter(b, cfg, x, u_nom);
    if (!once.feasible) continue;
    const FilterResult twice = safety_filter(b, cfg, x, once.u);
    CHECK(twice.u[0] == doctest::Approx(once.u[0]).epsilon(1e-12));
    CHECK_FALSE((twice.active && std::abs(twice.u[0] - once.u[0]) > 1e-12));
  }
}

TEST_CASE("HOCBF filter at the double-integrator singularity") {
  const Barrier b = hocbf_double_integrator();
  const FilterConfig cfg = hocbf_config();
  const std::vector<double> u_nom{0.7};
  const std::vector<double> fast{0.0, 3.0};
  FilterResult r = hocbf_filter(b, cfg, fast, u_nom);
  CHECK_FALSE(r.feasible);
  CHECK(r.margin == doctest::Approx(-17.0));

  const std::vector<double> slow{0.0, 0.5};
  r = hocbf_filter(b, cfg, slow, u_nom);
  CHECK(r.feasible);
  CHECK_FALSE(r.active);
  CHECK(r.u[0] == 0.7);
  CHECK(r.margin == doctest::Approx(0.5));
}

TEST_CASE("HOCBF filter is active with zero margin away from the singularity") {
  const Barrier b = hocbf_double_integrator();
  const FilterConfig cfg = hocbf_config();
  const std::vector<double> x{0.8, 2.0};
  const std::vector<double> u_nom{0.0};
  const FilterResult r = hocbf_filter(b, cfg, x, u_nom);
  CHECK(r.active);
  CHECK(std::abs(r.margin) <= 1e-9);
}

TEST_CASE("HOCBF filter input blows up near x = 0") {
  const Barrier b = hocbf_double_integrator();
  const FilterConfig cfg = hocbf_config();
  const std::vector<double> u_nom{0.0};
  double prev = 0.0;
  for (double x : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const std::vector<double> state{x, 3.0};
    const FilterResult r = hocbf_filter(b, cfg, state, u_nom);
    REQUIRE(r.feasible);
    CHECK(std::abs(r.u[0]) > prev);
    prev = std::abs(r.u[0]);
  }
  CHECK(prev >= 1e3);
}

TEST_CASE("shifted rectifier gives a continuous filter across the activation boundary") {
  const Problem p = builtin("aircraft_pitch");
  const Barrier b(p.default_barrier, p.system);
  FilterConfig cfg;
  cfg.alpha = ClassKFn::linear(0.5);
  const std::vector<double> u_nom{30.0};
  // theta = 0.25 fixed; A_z sweeps so that psi_1 crosses epsilon = 0.1.
  auto state = [](double t) { return std::vector<double>{0.25, -2.0 + 4.0 * t}; };
  const double lo = b.stage_values(state(0.0))[0] - 0.1;
  const double hi = b.stage_values(state(1.0))[0] - 0.1;
  REQUIRE(lo * hi < 0.0);
  auto max_jump = [&](int n) {
    double jump = 0.0;
    double prev = safety_filter(b, cfg, state(0.0), u_nom).u[0];
    for (int i = 1; i <= n; ++i) {
      const FilterResult r = safety_filter(b, cfg, state(static_cast<double>(i) / n), u_nom);
      REQUIRE(r.feasible);
      jump = std::max(jump, std::abs(r.u[0] - prev));
      prev = r.u[0];
    }
    return jump;
  };
  // Largest step-to-step change shrinks in proportion to the sample spacing.
  const double coarse = max_jump(1000);
  const double fine = max_jump(10000);
  const double finest = max_jump(100000);
  CHECK(fine <= 0.2 * coarse);
  CHECK(finest <= 0.2 * fine);
}

TEST_CASE("filter rejects mismatched dimensions") {
  const Problem p = builtin("double_integrator");
  const Barrier b(p.default_barrier, p.system);
  const std::vector<double> x{0.0, 0.0};
  const std::vector<double> u{0.0, 0.0};
  CHECK_THROWS_AS(safety_filter(b, FilterConfig{}, x, u), Error);
}
