#include "recbf/filter.hpp"

#include <cmath>
#include <string>

#include "recbf/error.hpp"

namespace recbf {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void check_input(const Barrier& barrier, std::span<const double> x, std::span<const double> u_nom) {
  if (x.size() != barrier.system().state_dim()) {
    throw Error(ErrorCode::InvalidArgument, "filter: state dimension mismatch");
  }
  if (u_nom.size() != barrier.system().input_dim()) {
    throw Error(ErrorCode::InvalidArgument, "filter: input dimension mismatch");
  }
}

}  // namespace

FilterResult project_halfspace(double a, std::span<const double> b, std::span<const double> u_nom,
                               double zero_tolerance) {
  if (b.size() != u_nom.size()) {
    throw Error(ErrorCode::InvalidArgument, "filter: constraint and input dimension differ");
  }
  if (!(zero_tolerance > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "filter: zero tolerance must be > 0");
  }
  if (!std::isfinite(a) || !std::isfinite(dot(b, b)) || !std::isfinite(dot(u_nom, u_nom))) {
    throw Error(ErrorCode::NonFiniteEvaluation, "filter: non-finite constraint data");
  }
  FilterResult r;
  r.u.assign(u_nom.begin(), u_nom.end());
  const double slack = a + dot(b, u_nom);
  if (slack >= 0.0) {
    r.margin = slack;
    return r;
  }
  const double bb = dot(b, b);
  if (std::sqrt(bb) <= zero_tolerance) {
    // Violations within the margin tolerance are rounding noise, not infeasibility.
    r.feasible = slack >= -kMarginTolerance;
    r.margin = slack;
    return r;
  }
  r.active = true;
  const double step = -slack / bb;
  for (std::size_t i = 0; i < r.u.size(); ++i) r.u[i] += step * b[i];
  r.margin = a + dot(b, r.u);
  return r;
}

FilterResult safety_filter(const Barrier& barrier, const FilterConfig& cfg,
                           std::span<const double> x, std::span<const double> u_nom) {
  check_input(barrier, x, u_nom);
  const LieDerivatives l = barrier.lie(x);
  const double a = l.lf + cfg.alpha(barrier.value(x));
  return project_halfspace(a, l.lg, u_nom, cfg.zero_tolerance);
}

FilterResult hocbf_filter(const Barrier& barrier, const FilterConfig& cfg,
                          std::span<const double> x, std::span<const double> u_nom) {
  check_input(barrier, x, u_nom);
  const HocbfChainValues c = hocbf_chain(barrier, x);
  const double a = c.lf_last + cfg.alpha(c.psi.back());
  return project_halfspace(a, c.lg_last, u_nom, cfg.zero_tolerance);
}

FilterResult apply_filter(const Barrier& barrier, const FilterConfig& cfg,
                          std::span<const double> x, std::span<const double> u_nom) {
  return cfg.mode == FilterConfig::Mode::HOCBF ? hocbf_filter(barrier, cfg, x, u_nom)
                                               : safety_filter(barrier, cfg, x, u_nom);
}

}  // namespace recbf
