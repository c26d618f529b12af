#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace recbf {

/// Truncated nested dual number.
///
/// A depth-k jet is a dual number whose two components are depth-(k-1)
/// jets, i.e. a function value together with exact first derivatives along
/// k independent nilpotent perturbations (eps_i^2 = 0). The nested value is
/// stored flat: coefficient `c[mask]` multiplies the product of the
/// perturbations whose bits are set in `mask`. Direction `level` (1-based)
/// owns bit `level - 1`, so the outermost dual layer is the highest bit.
///
/// Jets of different depth mix freely: a shallower jet is constant along
/// the directions it does not carry. A depth-0 jet is a plain real.
class Jet {
 public:
  static constexpr int kMaxDepth = 4;
  static constexpr std::size_t kMaxSize = std::size_t{1} << kMaxDepth;

  Jet() = default;
  Jet(double value) { c_[0] = value; }  // NOLINT: implicit by design of the arithmetic

  /// x + eps_level * tangent. Both parts must have depth < level.
  static Jet lift(const Jet& primal, const Jet& tangent, int level);

  int depth() const { return depth_; }
  std::size_t size() const { return std::size_t{1} << depth_; }
  double value() const { return c_[0]; }
  double coeff(std::size_t mask) const { return mask < size() ? c_[mask] : 0.0; }

  /// First-order coefficient along the outermost direction, as a jet of
  /// depth - 1. Zero for a depth-0 jet.
  Jet infinitesimal() const { return depth_ == 0 ? Jet(0.0) : tangent(depth_); }

  /// Component without / with perturbation `level`; depth drops to level - 1.
  /// A jet shallower than `level` is constant along it.
  Jet primal(int level) const;
  Jet tangent(int level) const;

  bool is_finite() const;

  Jet& operator+=(const Jet& rhs);
  Jet& operator-=(const Jet& rhs);
  Jet& operator*=(const Jet& rhs);
  Jet& operator/=(const Jet& rhs);
  Jet operator-() const;

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator/(const Jet& a, const Jet& b);

 private:
  void promote(int depth);
  Jet extract(int level, std::size_t bit_value) const;

  std::array<double, kMaxSize> c_{};
  std::uint8_t depth_ = 0;

  friend Jet compose(const Jet& x, std::span<const double> taylor);
};

/// f(x) given the Taylor coefficients f^(j)(x0) / j!, j = 0..depth(x).
Jet compose(const Jet& x, std::span<const double> taylor);

Jet sin(const Jet& x);
Jet cos(const Jet& x);
Jet exp(const Jet& x);
Jet log(const Jet& x);
Jet sqrt(const Jet& x);
Jet reciprocal(const Jet& x);
Jet square(const Jet& x);

/// |x| with sign(0) = +1 (right derivative at 0).
Jet abs(const Jet& x);

/// max(0, x). The zero branch is taken at x == 0.
Jet relu(const Jet& x);

using JetVec = std::vector<Jet>;
using ScalarField = std::function<Jet(std::span<const Jet>)>;
using VectorField = std::function<JetVec(std::span<const Jet>)>;

/// Largest depth over a set of jets.
int max_depth(std::span<const Jet> xs);

}  // namespace recbf
