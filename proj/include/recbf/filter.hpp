#pragma once

#include <span>
#include <vector>

#include "recbf/barriers.hpp"
#include "recbf/classk.hpp"

namespace recbf {

struct FilterConfig {
  enum class Mode { CBF, HOCBF };

  ClassKFn alpha = ClassKFn::linear(1.0);
  Mode mode = Mode::CBF;
  double zero_tolerance = 1e-9;
};

/// Feasible results satisfy margin >= -kMarginTolerance.
inline constexpr double kMarginTolerance = 1e-9;

struct FilterResult {
  std::vector<double> u;
  bool active = false;
  bool feasible = true;
  double margin = 0.0;  // a + b . u
};

/// argmin |u - u_nom|^2 subject to a + b . u >= 0.
///
/// Inactive when u_nom already satisfies the constraint. When |b| <=
/// zero_tolerance u_nom is returned unchanged, and the result is infeasible if
/// the constraint is violated by more than kMarginTolerance.
FilterResult project_halfspace(double a, std::span<const double> b, std::span<const double> u_nom,
                               double zero_tolerance = 1e-9);

/// Min-norm filter on L_f h + L_g h u >= -alpha(h).
FilterResult safety_filter(const Barrier& barrier, const FilterConfig& cfg,
                           std::span<const double> x, std::span<const double> u_nom);

/// Min-norm filter on L_f psi_{r-1} + L_g psi_{r-1} u >= -alpha(psi_{r-1}).
FilterResult hocbf_filter(const Barrier& barrier, const FilterConfig& cfg,
                          std::span<const double> x, std::span<const double> u_nom);

/// Dispatches on cfg.mode.
FilterResult apply_filter(const Barrier& barrier, const FilterConfig& cfg,
                          std::span<const double> x, std::span<const double> u_nom);

}  // namespace recbf
