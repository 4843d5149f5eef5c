#pragma once

// Seeded generators for property-style tests. Every property runs over a fixed
// number of draws from a fixed seed, so failures reproduce exactly.

#include "hwiener/group.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace hwtest {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : eng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }

  /// Point of H^n with coordinates spread over several scales.
  hwiener::GroupPoint point(int n, double scale = 3.0) {
    std::vector<double> c(2 * static_cast<std::size_t>(n) + 1);
    const double s = log_uniform(1e-3, 1.0) * scale;
    for (auto& v : c) v = uniform(-s, s);
    return hwiener::GroupPoint::from_coords(c);
  }

 private:
  std::mt19937_64 eng_;
};

/// Number of draws per property.
constexpr int kDraws = 200;

inline bool close(double a, double b, double rel, double abs = 0.0) {
  return std::abs(a - b) <= abs + rel * std::max(std::abs(a), std::abs(b));
}

}  // namespace hwtest
