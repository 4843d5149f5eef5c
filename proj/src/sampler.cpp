#include "hwiener/sampler.hpp"

#include <string>

namespace hwiener {

void PathGrid::validate() const {
  if (times.size() < 2) throw InvalidArgument("path grid needs at least two times");
  if (times.front() != 0.0) throw InvalidArgument("path grid must start at 0");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1]) || !std::isfinite(times[i])) {
      throw InvalidArgument("path grid times must be finite and strictly increasing");
    }
  }
  if (substeps_per_interval < 1) throw InvalidArgument("substeps_per_interval must be >= 1");
}

bool PathGrid::symmetric() const {
  const double t = horizon();
  const std::size_t k = times.size();
  for (std::size_t i = 0; i < k; ++i) {
    if (std::abs(times[i] + times[k - 1 - i] - t) > 1e-12 * t) return false;
  }
  return true;
}

PathGrid PathGrid::uniform(double t_end, int intervals, int substeps_per_interval) {
  if (!(t_end > 0.0) || intervals < 1) throw InvalidArgument("uniform grid needs t_end > 0, intervals >= 1");
  PathGrid g;
  g.substeps_per_interval = substeps_per_interval;
  g.times.resize(static_cast<std::size_t>(intervals) + 1);
  for (int i = 0; i <= intervals; ++i) g.times[i] = t_end * i / intervals;
  g.validate();
  return g;
}

PathGrid PathGrid::dyadic(int depth, int substeps_per_interval, double t_end) {
  if (depth < 0 || depth > 30) throw InvalidArgument("dyadic depth out of range");
  return uniform(t_end, 1 << depth, substeps_per_interval);
}

SamplePath sample_path(int n, const PathGrid& grid, const RngStreamSpec& rng, int coarsen) {
  if (n < 1) throw InvalidArgument("sample_path: n must be >= 1");
  grid.validate();
  if (coarsen < 1 || grid.substeps_per_interval % coarsen != 0) {
    throw InvalidArgument("sample_path: coarsen must divide substeps_per_interval");
  }
  SamplePath p;
  p.grid = grid;
  p.n = n;
  p.seed = rng;
  p.coords.resize(grid.size() * p.dim());
  walk_path(
      n, grid, rng, [](double, std::span<const double>) {},
      [&](std::size_t k, std::span<const double> x) { std::copy(x.begin(), x.end(), p.at_mut(k).begin()); },
      coarsen);
  return p;
}

GroupPoint increment(const SamplePath& path, std::size_t i, std::size_t j) {
  if (i > j || j >= path.size()) {
    throw InvalidArgument("increment: indices " + std::to_string(i) + ", " + std::to_string(j) +
                          " invalid for a path of " + std::to_string(path.size()) + " points");
  }
  GroupPoint out(path.n);
  raw::left_quotient(path.at(i), path.at(j), out.coords_mut());
  return out;
}

SamplePath time_reverse(const SamplePath& path) {
  if (!path.grid.symmetric()) throw InvalidArgument("time_reverse: grid is not symmetric");
  SamplePath r = path;
  const std::size_t k = path.size() - 1;
  for (std::size_t i = 0; i <= k; ++i) raw::left_quotient(path.at(k), path.at(k - i), r.at_mut(i));
  return r;
}

SamplePath translate_path(const GroupPoint& g, const SamplePath& path) {
  if (g.n() != path.n) throw InvalidArgument("translate_path: dimension mismatch");
  SamplePath r = path;
  for (std::size_t i = 0; i < path.size(); ++i) raw::multiply(g.coords(), path.at(i), r.at_mut(i));
  return r;
}

namespace {

struct MomentPartial {
  std::vector<RunningStats> z;
  RunningStats z_sq;
  RunningStats u;
  RunningStats u_sq;
  std::vector<RunningStats> cosines;
};

}  // namespace

EndpointMoments endpoint_moments(int n, double t, int substeps, std::uint64_t n_paths,
                                 std::uint64_t seed, const std::vector<double>& lambdas,
                                 unsigned workers, int coarsen) {
  if (n_paths < 2) throw InvalidArgument("endpoint_moments: need at least two paths");
  PathGrid grid = PathGrid::uniform(t, 1, substeps);
  if (substeps % coarsen != 0) throw InvalidArgument("endpoint_moments: coarsen must divide substeps");
  const std::size_t m = 2 * static_cast<std::size_t>(n);

  auto block = [&](std::uint64_t begin, std::uint64_t end) {
    MomentPartial part;
    part.z.resize(m);
    part.cosines.resize(lambdas.size());
    std::vector<double> last(m + 1);
    for (std::uint64_t i = begin; i < end; ++i) {
      walk_path(
          n, grid, path_stream(seed, i), [](double, std::span<const double>) {},
          [&](std::size_t, std::span<const double> x) { std::copy(x.begin(), x.end(), last.begin()); },
          coarsen);
      double zz = 0.0;
      for (std::size_t c = 0; c < m; ++c) {
        part.z[c].add(last[c]);
        zz += last[c] * last[c];
      }
      part.z_sq.add(zz);
      part.u.add(last[m]);
      part.u_sq.add(last[m] * last[m]);
      for (std::size_t l = 0; l < lambdas.size(); ++l) part.cosines[l].add(std::cos(lambdas[l] * last[m]));
    }
    return part;
  };
  auto merge = [&](MomentPartial& acc, const MomentPartial& p) {
    if (acc.z.empty()) {
      acc.z.resize(m);
      acc.cosines.resize(lambdas.size());
    }
    for (std::size_t c = 0; c < m; ++c) acc.z[c].merge(p.z[c]);
    acc.z_sq.merge(p.z_sq);
    acc.u.merge(p.u);
    acc.u_sq.merge(p.u_sq);
    for (std::size_t l = 0; l < lambdas.size(); ++l) acc.cosines[l].merge(p.cosines[l]);
  };
  const MomentPartial all = reduce_blocks<MomentPartial>(n_paths, workers, block, merge);

  EndpointMoments out;
  out.n_paths = n_paths;
  for (std::size_t c = 0; c < m; ++c) {
    out.mean_z.push_back(all.z[c].mean);
    out.mean_z_stderr.push_back(all.z[c].stderr_());
  }
  out.z_sq = all.z_sq.mean;
  out.z_sq_stderr = all.z_sq.stderr_();
  out.u_mean = all.u.mean;
  const double nd = static_cast<double>(n_paths);
  out.u_var = (all.u_sq.mean - all.u.mean * all.u.mean) * nd / (nd - 1.0);
  // Delta method: the spread of u^2 dominates the spread of the variance estimate.
  out.u_var_stderr = all.u_sq.stderr_();
  out.lambdas = lambdas;
  for (std::size_t l = 0; l < lambdas.size(); ++l) {
    out.cos_mean.push_back(all.cosines[l].mean);
    out.cos_stderr.push_back(all.cosines[l].stderr_());
  }
  return out;
}

}  // namespace hwiener
