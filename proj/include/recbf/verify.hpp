#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "recbf/barriers.hpp"
#include "recbf/classk.hpp"
#include "recbf/systems.hpp"

namespace recbf {

/// Tensor grid over a box, resolution points per axis (endpoints included).
struct GridSpec {
  Box box;
  std::vector<std::size_t> resolution;
  std::string origin = "explicit";

  std::size_t size() const;
  std::vector<double> point(std::size_t index) const;
};

/// Uniform resolution over a box.
GridSpec make_grid(const Box& box, std::size_t resolution);

/// Open neighborhood of the safe set: the bounding box of the sampled set
/// {set_value >= 0} over the system domain, widened by 10% of its extent on
/// every side. Falls back to the domain when no sample lies in the set.
GridSpec default_grid(const Barrier& barrier, std::size_t resolution = 200);

struct VerifyTolerances {
  double zero = 1e-9;       // |.| <= zero counts as a zero of L_g (.)
  double band = 1e-6;       // zero < |.| <= band is the near-degenerate band
  double violation = 1e-9;  // inequalities may fail by at most this much
  double rank = 1e-9;       // smallest singular value for linear independence
};

using Diagnostics = std::vector<std::pair<std::string, double>>;

struct Violation {
  std::size_t index = 0;  // grid index; points without a location use the grid size
  std::vector<double> x;
  Diagnostics values;
};

struct VerifyReport {
  std::string condition;
  GridSpec grid;
  VerifyTolerances tolerances;
  bool passed = true;
  std::vector<Violation> violations;     // sorted by grid index
  std::vector<Violation> indeterminate;  // failures inside the near-zero band; do not fail the check
  Diagnostics summary;
  std::vector<std::vector<double>> zero_set;
  std::string note;

  std::string to_json() const;
};

/// L_g L_f^i psi = 0 for i < r - 1 on the grid, and L_g L_f^(r-1) psi != 0 at
/// one grid point at least. Records the zero set of L_g L_f^(r-1) psi.
VerifyReport check_relative_degree(const ControlAffineSystem& sys, const ConstraintFn& constraint,
                                   int r, const GridSpec& grid, const VerifyTolerances& tol = {},
                                   int jobs = 1);

/// L_g L_f psi = 0 implies L_f psi >= -alpha(psi) + epsilon.
VerifyReport check_theorem1(const ControlAffineSystem& sys, const ConstraintFn& constraint,
                            const ClassKFn& alpha, const GridSpec& grid, double epsilon = 0.0,
                            const VerifyTolerances& tol = {}, int jobs = 1);

/// L_g psi and L_g L_f psi independent wherever both are nonzero; where both
/// vanish, L_f psi >= -alpha(psi).
VerifyReport check_theorem2(const ControlAffineSystem& sys, const ConstraintFn& constraint,
                            const ClassKFn& alpha, const GridSpec& grid,
                            const VerifyTolerances& tol = {}, int jobs = 1);

/// L_g L_f^(r-1) psi = 0 implies psi_i >= 0 for some stage i of the rectified
/// recursion described by spec.
VerifyReport check_theorem3(const std::shared_ptr<const ControlAffineSystem>& sys,
                            const BarrierSpec& spec, const GridSpec& grid,
                            const VerifyTolerances& tol = {}, int jobs = 1);

/// L_g h = 0 implies L_f h >= -alpha(h). HOCBF barriers are checked on their
/// last chain member. With restrict_to_safe_set only points with h >= 0 count.
VerifyReport check_lemma1(const Barrier& barrier, const ClassKFn& alpha, const GridSpec& grid,
                          const VerifyTolerances& tol = {}, bool restrict_to_safe_set = false,
                          int jobs = 1);

}  // namespace recbf
