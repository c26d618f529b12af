#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "recbf/systems.hpp"

namespace recbf::testing {

inline bool close(double a, double b, double rel, double abs_tol) {
  return std::abs(a - b) <= std::max(abs_tol, rel * std::max(std::abs(a), std::abs(b)));
}

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

  std::vector<double> in_box(const Box& box) {
    std::vector<double> x;
    x.reserve(box.size());
    for (const auto& iv : box) x.push_back(uniform(iv.lo, iv.hi));
    return x;
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace recbf::testing
