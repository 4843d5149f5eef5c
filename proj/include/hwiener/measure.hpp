#pragma once

// Wiener measure of cylinder sets
//   W(I) = int_{B_1 x ... x B_m} prod_j p_{t_j - t_{j-1}}(x_{j-1}^{-1} x_j) dx_1 ... dx_m
// with t_0 = 0, x_0 = identity, by nested quadrature (n = 1, m <= 2) and by
// Monte Carlo over sampled paths.

#include "hwiener/box.hpp"
#include "hwiener/heat_kernel.hpp"
#include "hwiener/kernel_table.hpp"
#include "hwiener/parallel.hpp"

#include <span>
#include <vector>

namespace hwiener {

struct CylinderSet {
  int n = 1;
  std::vector<double> times;  // strictly increasing, in (0, 1]
  std::vector<Box> boxes;     // one per time, 2n+1 intervals each

  void validate() const;
};

/// Adds an unconstrained slice at t_new.
CylinderSet insert_slice(const CylinderSet& I, double t_new);

/// Whether the path values at the cylinder times lie in the boxes.
bool cylinder_contains(const CylinderSet& I, std::span<const std::span<const double>> values);

struct CylinderQuadOptions {
  /// Mass discarded when an unbounded coordinate is cut off, per slice.
  double tail_mass = 1e-6;
  /// Node density multiplier for every axis rule.
  double density = 1.0;
  /// Repeat at density * 1.5 and report the difference as the error.
  bool estimate_error = true;
};

struct CylinderQuadResult {
  double value = 0.0;
  double error = 0.0;  // truncation bound plus resolution difference
};

/// Nested quadrature. The u-coordinate of the last slice is integrated in
/// closed form through the tabulated conditional distribution of u given |z|.
CylinderQuadResult cylinder_measure_quadrature(const KernelConfig& cfg, const CylinderSet& I,
                                               const CylinderQuadOptions& opt = {});

/// P(eta x(t) in box): the probability that a path started at eta lands in an
/// axis-aligned box after time t.
double translated_box_mass(const KernelTable& table, double t, std::span<const double> eta, const Box& box,
                           double density = 1.0, double tail_mass = 1e-6);

struct CylinderMcOptions {
  int substeps_per_interval = 200;
  unsigned workers = 0;
};

/// Fraction of sampled paths in I, with binomial standard error.
Estimate cylinder_measure_mc(const CylinderSet& I, std::uint64_t n_paths, std::uint64_t seed,
                             const CylinderMcOptions& opt = {});

/// Several cylinders sharing one time list, evaluated on the same paths.
std::vector<Estimate> cylinder_measure_mc_batch(const std::vector<CylinderSet>& sets,
                                                std::uint64_t n_paths, std::uint64_t seed,
                                                const CylinderMcOptions& opt = {});

}  // namespace hwiener
