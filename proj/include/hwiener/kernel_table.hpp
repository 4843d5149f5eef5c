#pragma once

// Tabulated heat kernel for the Monte Carlo and nested-quadrature paths, where
// millions of evaluations make the direct lambda-quadrature too slow.
//
// Both tables live at t = 1 on a (|z|, |u|) grid and are mapped to other times
// by parabolic scaling:
//   p_t(z, u)                 = t^{-n-1} p_1(z / sqrt t, u / t)
//   int_{-inf}^u p_t(z, v) dv = t^{-n}   F_1(z / sqrt t, u / t)
// The u-integral is stored as the conditional distribution function of u
// given |z|, which lies in [0, 1). Far out in u the lambda-integral resolves
// the density only to an absolute accuracy near rel_tol * p_1(0), so both
// tables are interpolated in linear space rather than log space.
// Interpolation is bicubic Lagrange with mirrored ghost nodes at the axes.

#include "hwiener/heat_kernel.hpp"

#include <vector>

namespace hwiener {

struct TableOptions {
  double z_max = 10.0;
  double z_step = 0.1;
  double u_max = 60.0;
  double u_step = 0.25;
  double rel_tol = 1e-11;
};

class KernelTable {
 public:
  KernelTable(int n, const TableOptions& opt = {});

  /// Table built once per n and shared for the rest of the process.
  static const KernelTable& shared(int n);

  int n() const { return n_; }

  /// p_t at (|z|, u). Points outside the table fall back to direct quadrature,
  /// or to 0 where upper_bound is below 1e-10 p_t(0).
  double density(double t, double z_norm, double u) const;

  /// int_{-inf}^{u} p_t(z, v) dv as a density in z (u may be infinite).
  double u_cdf(double t, double z_norm, double u) const;

  /// Rigorous upper bound on p_t(z, u), cheap to evaluate:
  ///   p_t <= p_t(0) exp(-|z|^2 / (4t))                      (cos <= 1, l coth l >= 1)
  ///   p_t <= (2 pi)^{-1} (4 pi t)^{-n} (4t)^{-1} C_n exp(-pi |u| / (8t))
  /// the second by moving the lambda contour to Im l = pi/2, where
  /// |l / sinh l| = |l| / cosh(Re l) and Re(l coth l) >= 0.
  double upper_bound(double t, double z_norm, double u) const;

  /// (4 pi t)^{-n} exp(-|z|^2 / (4t)), the z-marginal of p_t.
  double z_marginal(double t, double z_norm) const;

 private:
  double interp(const std::vector<double>& tab, double r, double v, bool odd_in_v) const;

  int n_;
  TableOptions opt_;
  int nz_;
  int nu_;
  std::vector<double> p_;      // p_1, row-major [iz][iu]
  std::vector<double> cond_;   // int_0^u p_1 dv / (z_marginal / 2)
  double origin_value_ = 0.0;  // p_1(0)
  double contour_const_ = 0.0; // int_R (x^2 + pi^2/4)^{n/2} / cosh^n x dx
  KernelConfig cfg_;
};

}  // namespace hwiener
