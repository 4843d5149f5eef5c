#include "hwiener/heat_kernel.hpp"
#include "hwiener/kernel_table.hpp"
#include "hwiener/sampler.hpp"

#include <cmath>

namespace hwiener {

std::vector<SemigroupResult> semigroup_residuals(const KernelConfig& cfg, double s, double t,
                                                 const std::vector<GroupPoint>& points,
                                                 std::uint64_t n_samples, std::uint64_t seed,
                                                 const SemigroupOptions& opt) {
  cfg.validate();
  if (!(s > 0.0) || !(t > 0.0)) throw InvalidArgument("semigroup_residual: s and t must be positive");
  if (n_samples < 2) throw InvalidArgument("semigroup_residual: need at least two samples");
  if (points.empty()) return {};
  for (const auto& p : points) {
    if (p.n() != cfg.n) throw InvalidArgument("semigroup_residual: point dimension differs from config");
  }
  const KernelTable* table = opt.use_table ? &KernelTable::shared(cfg.n) : nullptr;
  const PathGrid grid = PathGrid::uniform(s, 1, opt.substeps);
  const std::size_t d = 2 * static_cast<std::size_t>(cfg.n) + 1;

  auto block = [&](std::uint64_t begin, std::uint64_t end) {
    std::vector<RunningStats> part(points.size());
    std::vector<double> eta(d);
    std::vector<double> q(d);
    for (std::uint64_t i = begin; i < end; ++i) {
      walk_path(
          cfg.n, grid, path_stream(seed, i), [](double, std::span<const double>) {},
          [&](std::size_t, std::span<const double> x) { std::copy(x.begin(), x.end(), eta.begin()); });
      for (std::size_t k = 0; k < points.size(); ++k) {
        raw::left_quotient(eta, points[k].coords(), q);
        const double rho = std::sqrt(raw::z_norm_sq(q));
        part[k].add(table ? table->density(t, rho, q.back()) : kernel_eval(cfg, t, rho, q.back()));
      }
    }
    return part;
  };
  auto merge = [&](std::vector<RunningStats>& acc, const std::vector<RunningStats>& p) {
    acc.resize(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) acc[k].merge(p[k]);
  };
  const auto stats = reduce_blocks<std::vector<RunningStats>>(n_samples, opt.workers, block, merge);

  std::vector<SemigroupResult> out;
  for (std::size_t k = 0; k < points.size(); ++k) {
    SemigroupResult r;
    r.n_samples = n_samples;
    r.estimate = stats[k].mean;
    r.stderr_ = stats[k].stderr_();
    r.reference = kernel_eval(cfg, s + t + opt.reference_shift, points[k]);
    r.residual = std::abs(r.estimate - r.reference) / r.reference;
    r.residual_stderr = r.stderr_ / r.reference;
    r.z_score = r.stderr_ > 0.0 ? (r.estimate - r.reference) / r.stderr_ : 0.0;
    out.push_back(r);
  }
  return out;
}

SemigroupResult semigroup_residual(const KernelConfig& cfg, double s, double t, const GroupPoint& xi,
                                   std::uint64_t n_samples, std::uint64_t seed,
                                   const SemigroupOptions& opt) {
  return semigroup_residuals(cfg, s, t, {xi}, n_samples, seed, opt).front();
}

}  // namespace hwiener
