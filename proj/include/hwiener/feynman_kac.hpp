#pragma once

// Monte Carlo Feynman-Kac solver for (d/dt + L) u = -V u, L = -sum (X_i^2 + Y_i^2):
//   u(t, xi) = E[ f(xi x(t)) exp(-int_0^t V(xi x(s)) ds) ]
// and executable forms of the identities around it (Markov property of the
// weighted measure, the Duhamel equation, symmetry of the weighted kernel).
//
// Point densities are not evaluable, so every delta-comparison here is made on
// boxes: both sides of an identity are integrated over the same box, which
// removes the smoothing bias instead of bounding it.

#include "hwiener/box.hpp"
#include "hwiener/group.hpp"
#include "hwiener/heat_kernel.hpp"
#include "hwiener/measure.hpp"
#include "hwiener/parallel.hpp"
#include "hwiener/sampler.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace hwiener {

/// Lower-bounded potential, evaluable pointwise.
struct Potential {
  enum class Kind { constant, quadratic_radial, tabulated };

  Kind kind = Kind::constant;
  double value = 0.0;  // constant
  double alpha = 0.0;  // quadratic_radial: alpha |z|^2 + beta, alpha >= 0
  double beta = 0.0;
  // tabulated: regular grid over every coordinate, multilinear, clamped at the edges
  std::vector<double> grid_lo;
  std::vector<double> grid_step;
  std::vector<int> grid_count;
  std::vector<double> values;  // row-major, last coordinate fastest

  static Potential constant(double c);
  static Potential quadratic_radial(double alpha, double beta);
  static Potential tabulated(std::vector<double> lo, std::vector<double> step, std::vector<int> count,
                             std::vector<double> values);

  void validate(int n) const;
  double operator()(std::span<const double> p) const;
  /// V >= lower_bound() everywhere.
  double lower_bound() const;
  bool is_constant() const { return kind == Kind::constant; }
};

/// Bounded initial datum.
struct InitialData {
  enum class Kind { constant, gaussian_bump, indicator_box };

  Kind kind = Kind::constant;
  double amplitude = 1.0;
  std::vector<double> center;  // gaussian_bump
  double width = 1.0;          // gaussian_bump
  Box box;                     // indicator_box

  static InitialData constant(double c);
  /// amplitude * exp(-(|z - z_c|^2 + (u - u_c)^2) / (2 width^2)), Euclidean in coordinates.
  static InitialData gaussian_bump(std::vector<double> center, double width, double amplitude = 1.0);
  static InitialData indicator_box(Box box, double amplitude = 1.0);

  void validate(int n) const;
  double operator()(std::span<const double> p) const;
  double sup_bound() const;
};

using FKEstimate = Estimate;

struct FKOptions {
  int n = 1;
  int substeps = 200;  // substeps on [0, t]
  unsigned workers = 0;
};

/// int_0^t V(base x(s)) ds by the trapezoid rule over the recorded grid times.
/// A constant potential gives value * horizon exactly.
double weight_integral(const SamplePath& path, const Potential& V, const GroupPoint& base);

FKEstimate fk_solve(double t, const GroupPoint& xi, const InitialData& f, const Potential& V,
                    std::uint64_t n_paths, std::uint64_t seed, const FKOptions& opt = {});

struct HeatReferenceResult {
  double value = 0.0;
  double error = 0.0;  // truncation bound plus resolution difference
};

/// int f(eta) p_t(xi^{-1} eta) d eta by tensor quadrature (n = 1). Indicator
/// data go through the closed-form u-integral; other data use a rule centred
/// on the kernel or on the bump, whichever is narrower.
HeatReferenceResult heat_reference(double t, const GroupPoint& xi, const InitialData& f, const KernelConfig& cfg);

/// Bins over (|z|, u).
struct DensityGrid {
  std::vector<double> r_edges;  // increasing, r_edges[0] >= 0
  std::vector<double> u_edges;  // increasing

  void validate() const;
  std::size_t r_bins() const { return r_edges.size() - 1; }
  std::size_t u_bins() const { return u_edges.size() - 1; }
  /// Lebesgue volume of bin (i, j) in R^{2n+1}.
  double volume(int n, std::size_t i, std::size_t j) const;
};

struct DensityEstimate {
  DensityGrid grid;
  int n = 1;
  double t = 0.0;
  std::uint64_t n_paths = 0;
  RngStreamSpec seed;
  // per bin, row-major [r][u]
  std::vector<double> mass;
  std::vector<double> mass_stderr;
  std::vector<double> density;
  std::vector<double> density_stderr;
  std::vector<bool> empty;  // no path landed in the bin
  double total_mass = 0.0;
  double max_weight = 0.0;

  std::size_t index(std::size_t i, std::size_t j) const { return i * grid.u_bins() + j; }
};

struct DensityOptions : FKOptions {
  /// Use the time-reversed paths x(t)^{-1} x(t - s) instead of x(s).
  bool reverse_paths = false;
};

/// FK-weighted histogram of x(t) for paths started at the identity; with V = 0
/// the bin densities estimate p_t.
DensityEstimate fk_kernel_density(double t, const Potential& V, const DensityGrid& grid, std::uint64_t n_paths,
                                  std::uint64_t seed, const DensityOptions& opt = {});

/// E[w 1{start x(t) in box}] / vol(box), w the FK weight along start x.
FKEstimate fk_box_density(double t, const GroupPoint& start, const Potential& V, const Box& box,
                          std::uint64_t n_paths, std::uint64_t seed, const FKOptions& opt = {});

/// Functional of the path restricted to [0, s].
struct PathFunctional {
  enum class Kind { one, fk_weight, cylinder };

  Kind kind = Kind::one;
  Potential V;           // fk_weight
  CylinderSet cylinder;  // cylinder: times in (0, s]

  static PathFunctional one() { return {}; }
  static PathFunctional fk_weight(Potential V);
  static PathFunctional indicator(CylinderSet c);
};

struct IdentityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;  // (lhs - rhs) / rhs
  double residual_stderr = 0.0;
  double z_score = 0.0;
  std::uint64_t n_paths = 0;
};

struct BoxCheckOptions : FKOptions {
  double half_z = 0.5;
  double half_u = 0.5;
  double density = 1.0;  // node density of the inner box-mass quadrature
};

/// Markov property at time s for the box B around xi:
///   E[G 1{x(t) in B}] = E[G P(x(s) x'(t - s) in B | x(s))],
/// the inner probability by quadrature. Both sides on the same paths (n = 1).
IdentityCheck markov_check(double s, double t, const GroupPoint& xi, const PathFunctional& G,
                           std::uint64_t n_paths, std::uint64_t seed, const BoxCheckOptions& opt = {});

struct DuhamelOptions : BoxCheckOptions {
  int tau_nodes = 7;  // Gauss-Legendre nodes for the time integral
};

/// Duhamel equation integrated over the box B around xi (n = 1):
///   int_B u(t) = P(x(t) in B) - int_0^t E[w_tau V(x_tau) P(x_tau x'(t - tau) in B)] d tau,
/// with u the FK solution from the delta at the identity. The left side is the
/// weighted box count, with the unweighted count replaced by its quadrature
/// value as a control variate; the right side uses the same paths at the tau
/// nodes.
IdentityCheck duhamel_residual(double t, const GroupPoint& xi, const Potential& V, std::uint64_t n_paths,
                               std::uint64_t seed, const DuhamelOptions& opt = {});

struct SymmetryResult {
  Estimate forward;   // box average of p^V(t, xi + a, eta + b) over start a, end b
  Estimate backward;  // same with the roles of xi and eta exchanged
  double z_score = 0.0;
};

/// Box averages of the weighted kernel in both directions: starts uniform in
/// the box around one point, weighted hits in the box around the other. The
/// two averages are equal exactly when p^V is symmetric, for any box size.
SymmetryResult symmetry_check(double t, const GroupPoint& xi, const GroupPoint& eta, const Potential& V,
                              std::uint64_t n_paths, std::uint64_t seed, const BoxCheckOptions& opt = {});

}  // namespace hwiener
