#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace hwiener {

/// Closed interval, possibly unbounded on either side.
struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  static Interval all() { return {}; }
  bool contains(double v) const { return lo <= v && v <= hi; }
  bool is_all() const { return std::isinf(lo) && lo < 0 && std::isinf(hi) && hi > 0; }
  bool bounded() const { return std::isfinite(lo) && std::isfinite(hi); }
  double width() const { return hi - lo; }
};

/// Axis-aligned box in R^{2n+1}, ordered like group coordinates
/// (x_1, y_1, ..., x_n, y_n, u).
using Box = std::vector<Interval>;

inline Box whole_space(int n) { return Box(2 * static_cast<std::size_t>(n) + 1, Interval::all()); }

inline bool box_contains(const Box& b, std::span<const double> p) {
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (!b[i].contains(p[i])) return false;
  }
  return true;
}

inline bool box_is_all(const Box& b) {
  for (const auto& iv : b) {
    if (!iv.is_all()) return false;
  }
  return true;
}

inline double box_volume(const Box& b) {
  double v = 1.0;
  for (const auto& iv : b) v *= iv.width();
  return v;
}

/// Box of half-widths `half_z` (horizontal) and `half_u` (vertical) centred at p.
inline Box box_around(std::span<const double> p, double half_z, double half_u) {
  Box b(p.size());
  for (std::size_t i = 0; i + 1 < p.size(); ++i) b[i] = {p[i] - half_z, p[i] + half_z};
  b.back() = {p.back() - half_u, p.back() + half_u};
  return b;
}

}  // namespace hwiener
