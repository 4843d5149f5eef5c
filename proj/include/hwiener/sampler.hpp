#pragma once

// Horizontal Brownian motion on H^n with its Levy-area vertical part.
//
// Each substep of length h draws 2n independent N(0, 2h) increments dz and
// applies
//   z += dz,   u += 2 sum_i (y_i dx_i - x_i dy_i)
// with pre-step (x, y). This is the midpoint rule for the area term: the dz dz
// corrections cancel. The generator is sum_i (X_i^2 + Y_i^2), with no factor 1/2.

#include "hwiener/group.hpp"
#include "hwiener/parallel.hpp"

#include <boost/random/normal_distribution.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace hwiener {

struct PathGrid {
  std::vector<double> times;  // starts at 0, strictly increasing
  int substeps_per_interval = 1;

  void validate() const;
  double horizon() const { return times.back(); }
  std::size_t size() const { return times.size(); }
  /// Closed under s -> T - s.
  bool symmetric() const;

  static PathGrid uniform(double t_end, int intervals, int substeps_per_interval);
  /// times k 2^{-depth} t_end, k = 0..2^depth.
  static PathGrid dyadic(int depth, int substeps_per_interval, double t_end = 1.0);
};

struct SamplePath {
  PathGrid grid;
  int n = 1;
  RngStreamSpec seed;
  std::vector<double> coords;  // 2n+1 values per grid time

  std::size_t size() const { return grid.size(); }
  std::size_t dim() const { return 2 * static_cast<std::size_t>(n) + 1; }
  std::span<const double> at(std::size_t i) const { return {coords.data() + i * dim(), dim()}; }
  std::span<double> at_mut(std::size_t i) { return {coords.data() + i * dim(), dim()}; }
  GroupPoint point(std::size_t i) const { return GroupPoint::from_coords(at(i)); }
};

/// Per-path stream for path index i of a run.
inline RngStreamSpec path_stream(std::uint64_t master_seed, std::uint64_t path_index) {
  return {master_seed, path_index};
}

/// Drives one path through its substeps. on_substep(time, coords) sees every
/// applied substep (including time 0); on_grid(k, coords) sees grid times.
///
/// With coarsen > 1 the same normals are drawn as for the fine scheme, but
/// `coarsen` consecutive increments are summed and applied as one substep, so
/// fine and coarse paths share their Brownian motion.
template <class OnSubstep, class OnGrid>
void walk_path(int n, const PathGrid& grid, const RngStreamSpec& spec, OnSubstep&& on_substep,
               OnGrid&& on_grid, int coarsen = 1) {
  Engine eng = make_engine(spec);
  boost::random::normal_distribution<double> normal;
  const std::size_t m = 2 * static_cast<std::size_t>(n);
  std::vector<double> x(m + 1, 0.0);
  std::vector<double> dz(m);
  const int steps = grid.substeps_per_interval / coarsen;
  on_grid(std::size_t{0}, std::span<const double>(x));
  on_substep(0.0, std::span<const double>(x));
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double t0 = grid.times[k - 1];
    const double h = (grid.times[k] - t0) / grid.substeps_per_interval;
    const double sd = std::sqrt(2.0 * h);
    for (int s = 0; s < steps; ++s) {
      std::fill(dz.begin(), dz.end(), 0.0);
      for (int c = 0; c < coarsen; ++c) {
        for (std::size_t i = 0; i < m; ++i) dz[i] += sd * normal(eng);
      }
      double area = 0.0;
      for (std::size_t i = 0; i < m; i += 2) area += x[i + 1] * dz[i] - x[i] * dz[i + 1];
      for (std::size_t i = 0; i < m; ++i) x[i] += dz[i];
      x[m] += 2.0 * area;
      const double time = s + 1 == steps ? grid.times[k] : t0 + (s + 1) * coarsen * h;
      on_substep(time, std::span<const double>(x));
    }
    on_grid(k, std::span<const double>(x));
  }
}

/// Path recorded at the grid times. coarsen must divide substeps_per_interval.
SamplePath sample_path(int n, const PathGrid& grid, const RngStreamSpec& rng, int coarsen = 1);

/// x(t_i)^{-1} x(t_j), i <= j.
GroupPoint increment(const SamplePath& path, std::size_t i, std::size_t j);

/// (T x)(s) = x(t)^{-1} x(t - s) on a symmetric grid.
SamplePath time_reverse(const SamplePath& path);

/// (T_g x)(s) = g x(s).
SamplePath translate_path(const GroupPoint& g, const SamplePath& path);

struct EndpointMoments {
  std::uint64_t n_paths = 0;
  std::vector<double> mean_z;   // per horizontal coordinate
  std::vector<double> mean_z_stderr;
  double z_sq = 0.0;            // E|z(t)|^2
  double z_sq_stderr = 0.0;
  double u_mean = 0.0;
  double u_var = 0.0;           // Var u(t)
  double u_var_stderr = 0.0;
  std::vector<double> lambdas;
  std::vector<double> cos_mean;  // E cos(lambda u(t))
  std::vector<double> cos_stderr;
};

/// Endpoint moments at time t over n_paths paths with `substeps` steps on [0, t].
EndpointMoments endpoint_moments(int n, double t, int substeps, std::uint64_t n_paths,
                                 std::uint64_t seed, const std::vector<double>& lambdas,
                                 unsigned workers = 0, int coarsen = 1);

}  // namespace hwiener
