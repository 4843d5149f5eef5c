#include "hwiener/group.hpp"

#include <cmath>
#include <string>

namespace hwiener {

namespace {

void require_finite(std::span<const double> c) {
  for (double v : c) {
    if (!std::isfinite(v)) throw InvalidArgument("group point has a non-finite coordinate");
  }
}

void require_same_dim(const GroupPoint& a, const GroupPoint& b) {
  if (a.n() != b.n()) {
    throw InvalidArgument("dimension mismatch: H^" + std::to_string(a.n()) + " vs H^" +
                          std::to_string(b.n()));
  }
}

}  // namespace

GroupPoint::GroupPoint(int n) : n_(n) {
  if (n < 1) throw InvalidArgument("H^n requires n >= 1");
  c_.assign(2 * static_cast<std::size_t>(n) + 1, 0.0);
}

GroupPoint::GroupPoint(std::vector<double> z, double u) {
  if (z.empty() || z.size() % 2 != 0) {
    throw InvalidArgument("horizontal part must have 2n > 0 entries");
  }
  n_ = static_cast<int>(z.size() / 2);
  c_ = std::move(z);
  c_.push_back(u);
  require_finite(c_);
}

GroupPoint GroupPoint::from_coords(std::span<const double> coords) {
  if (coords.size() < 3 || coords.size() % 2 != 1) {
    throw InvalidArgument("coordinate block must have length 2n+1 with n >= 1");
  }
  return GroupPoint(std::vector<double>(coords.begin(), coords.end() - 1), coords.back());
}

double GroupPoint::z_norm_sq() const { return raw::z_norm_sq(c_); }

bool GroupPoint::is_identity() const {
  for (double v : c_) {
    if (v != 0.0) return false;
  }
  return true;
}

GroupPoint multiply(const GroupPoint& a, const GroupPoint& b) {
  require_same_dim(a, b);
  GroupPoint out(a.n());
  raw::multiply(a.coords(), b.coords(), out.coords_mut());
  return out;
}

GroupPoint inverse(const GroupPoint& a) {
  GroupPoint out(a.n());
  auto o = out.coords_mut();
  auto c = a.coords();
  for (std::size_t i = 0; i < c.size(); ++i) o[i] = -c[i];
  return out;
}

double raw::homogeneous_norm(std::span<const double> a) {
  const double r2 = z_norm_sq(a);
  const double u = a.back();
  return std::sqrt(std::sqrt(r2 * r2 + u * u));
}

double homogeneous_norm(const GroupPoint& a) { return raw::homogeneous_norm(a.coords()); }

double distance(const GroupPoint& a, const GroupPoint& b) {
  require_same_dim(a, b);
  std::vector<double> q(a.coords().size());
  raw::left_quotient(a.coords(), b.coords(), q);
  return raw::homogeneous_norm(q);
}

double distance_right(const GroupPoint& a, const GroupPoint& b) {
  require_same_dim(a, b);
  return homogeneous_norm(multiply(a, inverse(b)));
}

GroupPoint dilate(double r, const GroupPoint& a) {
  if (!(r > 0.0) || !std::isfinite(r)) throw InvalidArgument("dilation factor must be positive");
  GroupPoint out = a;
  auto c = out.coords_mut();
  for (std::size_t i = 0; i + 1 < c.size(); ++i) c[i] *= r;
  c.back() *= r * r;
  return out;
}

}  // namespace hwiener
