#include "recbf/jet.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "recbf/error.hpp"

namespace recbf {

namespace {

// Inserts `bit_value` at position `pos` of `mask`, shifting higher bits up.
std::size_t insert_bit(std::size_t mask, int pos, std::size_t bit_value) {
  const std::size_t low = mask & ((std::size_t{1} << pos) - 1);
  const std::size_t high = mask >> pos;
  return low | (bit_value << pos) | (high << (pos + 1));
}

}  // namespace

Jet Jet::lift(const Jet& primal, const Jet& tangent, int level) {
  if (level > kMaxDepth) {
    throw Error(ErrorCode::NestingDepthExceeded,
                "jet nesting depth " + std::to_string(level) + " exceeds the cap of " +
                    std::to_string(kMaxDepth));
  }
  if (level < 1 || primal.depth() >= level || tangent.depth() >= level) {
    throw Error(ErrorCode::InvalidArgument, "jet lift level must exceed both operand depths");
  }
  Jet out;
  out.depth_ = static_cast<std::uint8_t>(level);
  const std::size_t half = std::size_t{1} << (level - 1);
  for (std::size_t m = 0; m < half; ++m) {
    out.c_[m] = primal.coeff(m);
    out.c_[m | half] = tangent.coeff(m);
  }
  return out;
}

Jet Jet::extract(int level, std::size_t bit_value) const {
  if (level < 1) throw Error(ErrorCode::InvalidArgument, "jet level must be >= 1");
  if (depth_ < level) return bit_value == 0 ? *this : Jet(0.0);
  Jet out;
  out.depth_ = static_cast<std::uint8_t>(depth_ - 1);
  for (std::size_t m = 0; m < out.size(); ++m) {
    out.c_[m] = c_[insert_bit(m, level - 1, bit_value)];
  }
  return out;
}

Jet Jet::primal(int level) const { return extract(level, 0); }

Jet Jet::tangent(int level) const { return extract(level, 1); }

bool Jet::is_finite() const {
  return std::all_of(c_.begin(), c_.begin() + static_cast<std::ptrdiff_t>(size()),
                     [](double v) { return std::isfinite(v); });
}

void Jet::promote(int depth) {
  if (depth > depth_) depth_ = static_cast<std::uint8_t>(depth);
}

Jet& Jet::operator+=(const Jet& rhs) {
  promote(rhs.depth_);
  for (std::size_t m = 0; m < rhs.size(); ++m) c_[m] += rhs.c_[m];
  return *this;
}

Jet& Jet::operator-=(const Jet& rhs) {
  promote(rhs.depth_);
  for (std::size_t m = 0; m < rhs.size(); ++m) c_[m] -= rhs.c_[m];
  return *this;
}

Jet Jet::operator-() const {
  Jet out = *this;
  for (std::size_t m = 0; m < size(); ++m) out.c_[m] = -c_[m];
  return out;
}

Jet operator*(const Jet& a, const Jet& b) {
  if (a.depth_ == 0) {
    Jet out = b;
    for (std::size_t m = 0; m < b.size(); ++m) out.c_[m] *= a.c_[0];
    return out;
  }
  if (b.depth_ == 0) {
    Jet out = a;
    for (std::size_t m = 0; m < a.size(); ++m) out.c_[m] *= b.c_[0];
    return out;
  }
  Jet out;
  out.depth_ = std::max(a.depth_, b.depth_);
  const std::size_t n = out.size();
  for (std::size_t m = 0; m < n; ++m) {
    double acc = 0.0;
    // Sum over all splits of m into disjoint submasks s and m ^ s.
    for (std::size_t s = m;; s = (s - 1) & m) {
      acc += a.coeff(s) * b.coeff(m ^ s);
      if (s == 0) break;
    }
    out.c_[m] = acc;
  }
  return out;
}

Jet& Jet::operator*=(const Jet& rhs) { return *this = *this * rhs; }

Jet operator/(const Jet& a, const Jet& b) {
  if (b.depth_ == 0) return a * Jet(1.0 / b.c_[0]);
  return a * reciprocal(b);
}

Jet& Jet::operator/=(const Jet& rhs) { return *this = *this / rhs; }

Jet compose(const Jet& x, std::span<const double> taylor) {
  const int d = x.depth();
  if (taylor.size() < static_cast<std::size_t>(d) + 1) {
    throw Error(ErrorCode::InvalidArgument, "compose needs depth + 1 Taylor coefficients");
  }
  if (d == 0) return Jet(taylor[0]);
  Jet delta = x;
  delta.c_[0] = 0.0;
  Jet out(taylor[static_cast<std::size_t>(d)]);
  for (int j = d - 1; j >= 0; --j) {
    out = out * delta;
    out.c_[0] += taylor[static_cast<std::size_t>(j)];
  }
  return out;
}

Jet sin(const Jet& x) {
  const double s = std::sin(x.value());
  const double c = std::cos(x.value());
  const std::array<double, Jet::kMaxDepth + 1> t{s, c, -s / 2.0, -c / 6.0, s / 24.0};
  return compose(x, t);
}

Jet cos(const Jet& x) {
  const double s = std::sin(x.value());
  const double c = std::cos(x.value());
  const std::array<double, Jet::kMaxDepth + 1> t{c, -s, -c / 2.0, s / 6.0, c / 24.0};
  return compose(x, t);
}

Jet exp(const Jet& x) {
  const double e = std::exp(x.value());
  const std::array<double, Jet::kMaxDepth + 1> t{e, e, e / 2.0, e / 6.0, e / 24.0};
  return compose(x, t);
}

Jet log(const Jet& x) {
  const double a = x.value();
  std::array<double, Jet::kMaxDepth + 1> t{};
  t[0] = std::log(a);
  double p = 1.0;
  for (int j = 1; j <= Jet::kMaxDepth; ++j) {
    p /= a;
    t[static_cast<std::size_t>(j)] = ((j % 2 == 1) ? 1.0 : -1.0) * p / j;
  }
  return compose(x, t);
}

Jet sqrt(const Jet& x) {
  const double a = x.value();
  std::array<double, Jet::kMaxDepth + 1> t{};
  // binom(1/2, j) * a^(1/2 - j)
  double binom = 1.0;
  double power = std::sqrt(a);
  for (int j = 0; j <= Jet::kMaxDepth; ++j) {
    t[static_cast<std::size_t>(j)] = binom * power;
    binom *= (0.5 - j) / (j + 1);
    power /= a;
  }
  return compose(x, t);
}

Jet reciprocal(const Jet& x) {
  const double a = x.value();
  std::array<double, Jet::kMaxDepth + 1> t{};
  double p = 1.0 / a;
  for (int j = 0; j <= Jet::kMaxDepth; ++j) {
    t[static_cast<std::size_t>(j)] = ((j % 2 == 0) ? 1.0 : -1.0) * p;
    p /= a;
  }
  return compose(x, t);
}

Jet square(const Jet& x) { return x * x; }

Jet abs(const Jet& x) { return x.value() >= 0.0 ? x : -x; }

Jet relu(const Jet& x) { return x.value() > 0.0 ? x : Jet(0.0); }

int max_depth(std::span<const Jet> xs) {
  int d = 0;
  for (const auto& x : xs) d = std::max(d, x.depth());
  return d;
}

}  // namespace recbf
