#pragma once

// Heisenberg group H^n: points (z, u) with z in C^n stored as interleaved
// reals (x_1, y_1, ..., x_n, y_n) followed by the vertical coordinate u.
//
// Product: (z, u)(z', u') = (z + z', u + u' + 2 Im(z . conj z'))
//          Im(z . conj z') = sum_i (y_i x'_i - x_i y'_i)

#include <span>
#include <stdexcept>
#include <vector>

namespace hwiener {

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class GroupPoint {
 public:
  /// Identity of H^n.
  explicit GroupPoint(int n);
  /// From horizontal coordinates (x_1, y_1, ..., x_n, y_n) and vertical u.
  GroupPoint(std::vector<double> z, double u);
  /// From a flat coordinate block of length 2n+1 (z first, u last).
  static GroupPoint from_coords(std::span<const double> coords);

  int n() const { return n_; }
  std::span<const double> coords() const { return c_; }
  std::span<double> coords_mut() { return c_; }
  std::span<const double> z() const { return {c_.data(), c_.size() - 1}; }
  double x(int i) const { return c_[2 * i]; }
  double y(int i) const { return c_[2 * i + 1]; }
  double u() const { return c_.back(); }
  double z_norm_sq() const;

  bool is_identity() const;
  friend bool operator==(const GroupPoint&, const GroupPoint&) = default;

 private:
  int n_;
  std::vector<double> c_;
};

GroupPoint multiply(const GroupPoint& a, const GroupPoint& b);
GroupPoint inverse(const GroupPoint& a);
/// (|z|^4 + u^2)^{1/4}
double homogeneous_norm(const GroupPoint& a);
/// Left-invariant distance |a^{-1} b|. This is the convention used for path
/// increments throughout the library.
double distance(const GroupPoint& a, const GroupPoint& b);
/// Right-invariant distance |a b^{-1}|.
double distance_right(const GroupPoint& a, const GroupPoint& b);
/// Parabolic dilation (z, u) -> (r z, r^2 u); r must be positive.
GroupPoint dilate(double r, const GroupPoint& a);

/// Allocation-free kernels on flat coordinate blocks of length 2n+1.
/// `out` may alias neither input unless noted.
namespace raw {

inline double symplectic(std::span<const double> a, std::span<const double> b) {
  // Im(z_a . conj z_b)
  double s = 0.0;
  const std::size_t m = a.size() - 1;
  for (std::size_t i = 0; i < m; i += 2) s += a[i + 1] * b[i] - a[i] * b[i + 1];
  return s;
}

/// out = a b; out may alias a or b.
inline void multiply(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  const std::size_t m = a.size() - 1;
  const double u = a[m] + b[m] + 2.0 * symplectic(a, b);
  for (std::size_t i = 0; i < m; ++i) out[i] = a[i] + b[i];
  out[m] = u;
}

/// out = a^{-1} b; out may alias a or b.
inline void left_quotient(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  const std::size_t m = a.size() - 1;
  // (-z_a, -u_a)(z_b, u_b): symplectic(-a, b) = -symplectic(a, b)
  const double u = b[m] - a[m] - 2.0 * symplectic(a, b);
  for (std::size_t i = 0; i < m; ++i) out[i] = b[i] - a[i];
  out[m] = u;
}

inline double z_norm_sq(std::span<const double> a) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < a.size(); ++i) s += a[i] * a[i];
  return s;
}

double homogeneous_norm(std::span<const double> a);

}  // namespace raw

}  // namespace hwiener
