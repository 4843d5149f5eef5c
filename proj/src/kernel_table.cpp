#include "hwiener/kernel_table.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace hwiener {

namespace {

/// Lagrange weights for nodes at offsets -1, 0, 1, 2 and fractional position f in [0, 1).
std::array<double, 4> cubic_weights(double f) {
  return {-f * (f - 1.0) * (f - 2.0) / 6.0, (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0,
          -(f + 1.0) * f * (f - 2.0) / 2.0, (f + 1.0) * f * (f - 1.0) / 6.0};
}

}  // namespace

KernelTable::KernelTable(int n, const TableOptions& opt) : n_(n), opt_(opt) {
  if (n < 1) throw InvalidArgument("kernel table: n must be >= 1");
  cfg_.n = n;
  cfg_.rel_tol = opt.rel_tol;
  nz_ = static_cast<int>(std::lround(opt.z_max / opt.z_step)) + 1;
  nu_ = static_cast<int>(std::lround(opt.u_max / opt.u_step)) + 1;
  origin_value_ = kernel_eval(cfg_, 1.0, 0.0, 0.0);
  const auto rule = quad::composite(-60.0, 60.0, 120, 20);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double x = rule.nodes[i];
    contour_const_ += rule.weights[i] * std::pow(std::hypot(x, std::numbers::pi / 2.0) / std::cosh(x), n);
  }
  p_.resize(static_cast<std::size_t>(nz_) * nu_);
  cond_.resize(p_.size());
  for (int i = 0; i < nz_; ++i) {
    const double r = i * opt.z_step;
    const double half = 0.5 * z_marginal(1.0, r);
    double acc = 0.0;
    for (int j = 0; j < nu_; ++j) {
      const double v = j * opt.u_step;
      p_[static_cast<std::size_t>(i) * nu_ + j] = kernel_eval(cfg_, 1.0, r, v);
      // Accumulate the u-integral cell by cell so each piece is a short, well-conditioned range.
      if (j > 0) acc += kernel_u_integral(cfg_, 1.0, r, v - opt.u_step, v);
      cond_[static_cast<std::size_t>(i) * nu_ + j] = acc / half;
    }
  }
}

const KernelTable& KernelTable::shared(int n) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<KernelTable>> tables;
  std::lock_guard lock(mu);
  auto& slot = tables[n];
  if (!slot) slot = std::make_unique<KernelTable>(n);
  return *slot;
}

double KernelTable::z_marginal(double t, double z_norm) const {
  double pref = 1.0;
  for (int i = 0; i < n_; ++i) pref /= 4.0 * std::numbers::pi * t;
  return pref * std::exp(-z_norm * z_norm / (4.0 * t));
}

double KernelTable::upper_bound(double t, double z_norm, double u) const {
  const double pi = std::numbers::pi;
  const double by_z = std::pow(t, -n_ - 1) * origin_value_ * std::exp(-z_norm * z_norm / (4.0 * t));
  const double by_u = std::pow(4.0 * pi * t, -n_) / (2.0 * pi * 4.0 * t) * contour_const_ *
                      std::exp(-pi * std::abs(u) / (8.0 * t));
  return std::min(by_z, by_u);
}

double KernelTable::interp(const std::vector<double>& tab, double r, double v, bool odd_in_v) const {
  const double fr = r / opt_.z_step;
  const double fv = v / opt_.u_step;
  // Keep the 4-point stencil inside the table at the far edges.
  const int ir = std::min(static_cast<int>(fr), nz_ - 3);
  const int iv = std::min(static_cast<int>(fv), nu_ - 3);
  const auto wr = cubic_weights(fr - ir);
  const auto wv = cubic_weights(fv - iv);
  double acc = 0.0;
  for (int a = 0; a < 4; ++a) {
    const int ia = std::abs(ir - 1 + a);  // even in |z|
    double row = 0.0;
    for (int b = 0; b < 4; ++b) {
      int jb = iv - 1 + b;
      double sign = 1.0;
      if (jb < 0) {
        jb = -jb;
        if (odd_in_v) sign = -1.0;
      }
      row += wv[b] * sign * tab[static_cast<std::size_t>(ia) * nu_ + jb];
    }
    acc += wr[a] * row;
  }
  return acc;
}

double KernelTable::density(double t, double z_norm, double u) const {
  if (!(t > 0.0)) throw InvalidArgument("kernel table: time must be positive");
  const double r = z_norm / std::sqrt(t);
  const double v = std::abs(u) / t;
  if (r > opt_.z_max || v > opt_.u_max) {
    // Below this level the lambda-quadrature only resolves cancellation noise.
    if (upper_bound(1.0, r, v) < 1e-10 * origin_value_) return 0.0;
    return kernel_eval(cfg_, t, z_norm, u);
  }
  return std::pow(t, -n_ - 1) * std::max(0.0, interp(p_, r, v, false));
}

double KernelTable::u_cdf(double t, double z_norm, double u) const {
  if (!(t > 0.0)) throw InvalidArgument("kernel table: time must be positive");
  const double zm = z_marginal(t, z_norm);
  if (std::isinf(u)) return u > 0 ? zm : 0.0;
  const double r = z_norm / std::sqrt(t);
  const double v = std::abs(u) / t;
  double c = 1.0;
  // Beyond the u range the conditional tail is below exp(-pi u_max / 8); beyond
  // the |z| range the marginal itself is negligible and the tail is dropped.
  if (r <= opt_.z_max && v <= opt_.u_max) c = std::clamp(interp(cond_, r, v, true), 0.0, 1.0);
  return 0.5 * zm * (1.0 + (u < 0 ? -c : c));
}

}  // namespace hwiener
