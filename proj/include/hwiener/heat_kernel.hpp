#pragma once

// Heat kernel of the sub-Laplacian L = -sum_i (X_i^2 + Y_i^2) on H^n,
// X_i = d/dx_i + 2 y_i d/du, Y_i = d/dy_i - 2 x_i d/du.
//
// Pinned convention (the density of the diffusion generated by sum X_i^2 + Y_i^2):
//
//   p_t(z, u) = (2 pi)^{-1} (4 pi t)^{-n} (4t)^{-1}
//               * int_R (|l| / sinh|l|)^n exp(-|l| coth|l| |z|^2 / (4t)) cos(l u / (4t)) dl
//
// It integrates to one, has E|z(t)|^2 = 4nt, Var u(t) = 16 n t^2 and
// E exp(i l u(t)) = sech^n(4 l t).

#include "hwiener/box.hpp"
#include "hwiener/group.hpp"
#include "hwiener/quadrature.hpp"

#include <cstdint>
#include <vector>

namespace hwiener {

struct KernelConfig {
  int n = 1;
  /// Truncation of the lambda-integral; 0 picks it from the analytic tail bound.
  double lambda_cutoff = 0.0;
  /// Minimum number of Kronrod nodes laid on [0, cutoff] before adaptive refinement.
  int node_count = 60;
  /// Error target relative to the non-oscillatory envelope of the integrand.
  double rel_tol = 1e-10;
  /// Smallest admissible time.
  double t_floor = 1e-4;
  unsigned max_depth = 20;

  void validate() const;
};

struct KernelValue {
  double value = 0.0;
  double tail_bound = 0.0;   // discarded lambda > cutoff, in density units
  double quad_error = 0.0;   // Kronrod estimate, in density units
  double cutoff = 0.0;
};

/// |l| / sinh|l| with the removable singularity at 0 handled by its series.
double lambda_over_sinh(double l);
/// |l| coth|l|, equal to 1 at 0.
double lambda_coth(double l);

KernelValue kernel_eval_detailed(const KernelConfig& cfg, double t, double z_norm, double u);
double kernel_eval(const KernelConfig& cfg, double t, double z_norm, double u);
double kernel_eval(const KernelConfig& cfg, double t, const GroupPoint& xi);

/// E[exp(i l u(t))] with z integrated out: sech^n(4 l t).
double marginal_char_u(const KernelConfig& cfg, double t, double lambda);

struct NormalizationResult {
  double value = 0.0;
  double truncation_bound = 0.0;
};

/// Integral of p_t over H^n as a 2-D quadrature over (|z|, u) carrying the
/// sphere factor |S^{2n-1}| |z|^{2n-1}.
NormalizationResult normalization(const KernelConfig& cfg, double t);

/// Probability that (|z(t)|, u(t)) falls in [z_lo, z_hi] x [u_lo, u_hi]
/// (z_hi and the u bounds may be infinite). The |z| and u integrals are done
/// in closed form inside the lambda integral.
double kernel_bin_mass(const KernelConfig& cfg, double t, double z_lo, double z_hi, double u_lo,
                       double u_hi);

/// int_{u_lo}^{u_hi} p_t(z, v) dv at fixed |z| (finite bounds), done in closed
/// form inside the lambda integral.
double kernel_u_integral(const KernelConfig& cfg, double t, double z_norm, double u_lo, double u_hi);

/// Probability that x(t) lies in an axis-aligned box (started at the identity).
double kernel_box_mass(const KernelConfig& cfg, double t, const Box& box);

/// Probability that the homogeneous norm of x(t) exceeds `radius`. Values below
/// rel_tol are replaced by a rigorous upper bound.
double kernel_norm_tail(const KernelConfig& cfg, double t, double radius);

/// Constants of the Gaussian upper bound p_t(xi) <= c M t^{-n-1} exp(-|xi|^2 / (M t)).
struct BoundFit {
  double M = 0.0;
  double c = 0.0;
};

struct BoundFitOptions {
  double M_max = 1e3;
  double c_max = 1e3;
  int bisection_steps = 200;
};

/// Smallest M certifying the bound with c = 1 on every (t, xi) of the product
/// set; when c = 1 is unattainable below M_max, M = M_max and the smallest c.
/// Throws NumericalFailure when neither works.
BoundFit gaussian_bound_fit(const KernelConfig& cfg, const std::vector<double>& t_set,
                            const std::vector<GroupPoint>& grid, const BoundFitOptions& opt = {});

/// Smallest slack of the bound over the product set (>= 0 means it holds).
double gaussian_bound_margin(const KernelConfig& cfg, const BoundFit& fit,
                             const std::vector<double>& t_set, const std::vector<GroupPoint>& grid);

/// Radius R such that the bound certifies mass(|xi| > R) < tail_mass at time t.
/// The box [-R, R]^{2n} x [-R^2, R^2] contains the homogeneous ball of radius R.
double truncation_radius(const BoundFit& fit, int n, double t, double tail_mass);

/// Bound fit computed once per n on a broad default grid; used for truncating
/// unbounded boxes.
const BoundFit& default_bound_fit(int n);

/// truncation_radius with default_bound_fit(n); the radius at t = 1 is cached
/// per (n, tail_mass) and scaled by sqrt(t).
double default_truncation_radius(int n, double t, double tail_mass = 1e-6);

/// Default grid at t = 1: homogeneous shells out to |xi|^2 = `extent` in
/// directions interpolating between the horizontal and vertical axes. By
/// scaling, a fit on this grid at t = 1 holds on the dilated grid at every t.
std::vector<GroupPoint> default_bound_grid(int n, int radial_steps = 40, int angular_steps = 12,
                                           double extent = 200.0);

struct SemigroupOptions {
  int substeps = 1000;          // sampler substeps on [0, s]
  double reference_shift = 0.0; // compare against p_{s+t+shift} (negative control)
  unsigned workers = 0;
  bool use_table = true;        // p_t via the interpolation table
};

struct SemigroupResult {
  double estimate = 0.0;   // MC mean of p_t(eta^{-1} xi), eta ~ x(s)
  double stderr_ = 0.0;
  double reference = 0.0;  // p_{s+t(+shift)}(xi)
  double residual = 0.0;   // |estimate - reference| / reference
  double residual_stderr = 0.0;
  double z_score = 0.0;
  std::uint64_t n_samples = 0;
};

/// Monte Carlo Chapman-Kolmogorov check at xi: E_{eta ~ p_s}[p_t(eta^{-1} xi)] vs p_{s+t}(xi).
SemigroupResult semigroup_residual(const KernelConfig& cfg, double s, double t, const GroupPoint& xi,
                                   std::uint64_t n_samples, std::uint64_t seed,
                                   const SemigroupOptions& opt = {});

/// Same check at several points on one shared set of samples eta.
std::vector<SemigroupResult> semigroup_residuals(const KernelConfig& cfg, double s, double t,
                                                 const std::vector<GroupPoint>& points,
                                                 std::uint64_t n_samples, std::uint64_t seed,
                                                 const SemigroupOptions& opt = {});

}  // namespace hwiener
