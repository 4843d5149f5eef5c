#include "hwiener/holder.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

namespace hwiener {

namespace {

void require_dyadic(const SamplePath& path, int depth) {
  const std::size_t count = (std::size_t{1} << depth) + 1;
  if (path.size() != count) {
    throw InvalidArgument("dyadic grid of depth " + std::to_string(depth) + " needs " +
                          std::to_string(count) + " points, path has " + std::to_string(path.size()));
  }
  const double scale = static_cast<double>(count - 1);
  for (std::size_t k = 0; k < count; ++k) {
    if (std::abs(path.grid.times[k] - static_cast<double>(k) / scale) > 1e-12) {
      throw InvalidArgument("path grid is not the dyadic grid of [0, 1]");
    }
  }
}

double increment_norm(const SamplePath& path, std::size_t i, std::size_t j, std::vector<double>& buf) {
  raw::left_quotient(path.at(i), path.at(j), buf);
  return raw::homogeneous_norm(buf);
}

/// a_star from a flat coordinate buffer holding 2^depth + 1 points.
double a_star_flat(const std::vector<double>& pts, std::size_t d, double r, int depth, std::vector<double>& buf) {
  const std::size_t total = std::size_t{1} << depth;
  double best = 0.0;
  for (int m = 0; m <= depth; ++m) {
    const std::size_t step = total >> m;
    const double scale = std::pow(2.0, m * r);
    for (std::size_t k = 1; k <= (std::size_t{1} << m); ++k) {
      std::span<const double> a(pts.data() + (k - 1) * step * d, d);
      std::span<const double> b(pts.data() + k * step * d, d);
      raw::left_quotient(a, b, buf);
      best = std::max(best, raw::homogeneous_norm(buf) * scale);
    }
  }
  return best;
}

}  // namespace

void HolderSpec::validate() const {
  if (!(a > 0.0)) throw InvalidArgument("holder spec: a must be positive");
  if (!(r > 0.0 && r < 0.5)) throw InvalidArgument("holder spec: r must lie in (0, 1/2)");
  if (depth < 1 || depth > 16) throw InvalidArgument("holder spec: depth must lie in [1, 16]");
}

double HolderSpec::chain_constant() const { return 2.0 * a / (1.0 - std::pow(2.0, -r)); }

double dyadic_a_star(const SamplePath& path, double r, int depth) {
  require_dyadic(path, depth);
  std::vector<double> buf(path.dim());
  return a_star_flat(path.coords, path.dim(), r, depth, buf);
}

HolderCertificate dyadic_to_holder(const SamplePath& path, const HolderSpec& spec) {
  spec.validate();
  require_dyadic(path, spec.depth);
  const int depth = spec.depth;
  const std::size_t total = std::size_t{1} << depth;
  std::vector<double> buf(path.dim());

  HolderCertificate cert;
  cert.constant = spec.chain_constant();
  cert.a_star = a_star_flat(path.coords, path.dim(), spec.r, depth, buf);
  // Relative slack absorbs the rounding of the fourth root in the norm.
  const double slack = 1.0 + 1e-12;
  for (int m = 0; m <= depth; ++m) {
    const std::size_t step = total >> m;
    const double bound = spec.a * std::pow(2.0, -m * spec.r) * slack;
    for (std::size_t k = 1; k <= (std::size_t{1} << m); ++k) {
      if (increment_norm(path, (k - 1) * step, k * step, buf) > bound) ++cert.hypothesis_violations;
    }
  }
  cert.hypothesis_holds = cert.hypothesis_violations == 0;
  if (!cert.hypothesis_holds) return cert;

  std::vector<double> piece(depth + 1);
  for (int m = 0; m <= depth; ++m) piece[m] = spec.a * std::pow(2.0, -m * spec.r);
  std::vector<double> span_r(total + 1);
  for (std::size_t k = 1; k <= total; ++k) {
    span_r[k] = std::pow(static_cast<double>(k) / static_cast<double>(total), spec.r);
  }
  for (std::size_t i = 0; i < total; ++i) {
    for (std::size_t j = i + 1; j <= total; ++j) {
      // Greedy walk over maximal aligned dyadic blocks; each level is used at most twice.
      double chain = 0.0;
      std::size_t pos = i;
      while (pos < j) {
        std::size_t size = pos == 0 ? total : (pos & (~pos + 1));
        while (pos + size > j) size >>= 1;
        chain += piece[depth - std::countr_zero(size)];
        pos += size;
      }
      const double ratio = increment_norm(path, i, j, buf) / span_r[j - i];
      cert.max_ratio = std::max(cert.max_ratio, ratio);
      cert.max_chain_ratio = std::max(cert.max_chain_ratio, chain / span_r[j - i]);
      if (ratio > cert.constant * slack) ++cert.conclusion_violations;
      ++cert.pairs_checked;
    }
  }
  return cert;
}

SamplePath extremal_path(int n, const HolderSpec& spec) {
  spec.validate();
  const std::size_t total = std::size_t{1} << spec.depth;
  std::vector<double> f(total + 1, 0.0);
  f[total] = spec.a;
  for (int m = 0; m < spec.depth; ++m) {
    const std::size_t step = total >> m;
    const double half_bound = spec.a * std::pow(2.0, -(m + 1) * spec.r);
    for (std::size_t lo = 0; lo < total; lo += step) {
      const double delta = f[lo + step] - f[lo];
      const double sign = delta < 0.0 ? -1.0 : 1.0;
      // First half takes exactly the level-(m+1) bound; the rest, |delta| - bound,
      // is within the bound because |delta| <= 2^r bound <= 2 bound.
      f[lo + step / 2] = f[lo] + sign * half_bound;
    }
  }
  SamplePath p;
  p.grid = PathGrid::dyadic(spec.depth, 1);
  p.n = n;
  p.coords.assign((total + 1) * p.dim(), 0.0);
  for (std::size_t k = 0; k <= total; ++k) p.at_mut(k)[0] = f[k];
  return p;
}

std::vector<Estimate> holder_tail_curve(double r, int depth, const std::vector<double>& a_values,
                                        std::uint64_t n_paths, std::uint64_t seed,
                                        const HolderTailOptions& opt) {
  HolderSpec{1.0, r, depth}.validate();
  if (depth > 12) throw InvalidArgument("holder_tail: depth must be <= 12");
  if (n_paths < 1) throw InvalidArgument("holder_tail: need at least one path");
  const PathGrid grid = PathGrid::dyadic(depth, opt.substeps_per_interval);
  const std::size_t d = 2 * static_cast<std::size_t>(opt.n) + 1;

  auto block = [&](std::uint64_t begin, std::uint64_t end) {
    std::vector<std::uint64_t> exceed(a_values.size(), 0);
    std::vector<double> pts(grid.size() * d);
    std::vector<double> buf(d);
    for (std::uint64_t i = begin; i < end; ++i) {
      walk_path(
          opt.n, grid, path_stream(seed, i), [](double, std::span<const double>) {},
          [&](std::size_t k, std::span<const double> x) { std::copy(x.begin(), x.end(), pts.begin() + k * d); });
      const double a_star = a_star_flat(pts, d, r, depth, buf);
      for (std::size_t l = 0; l < a_values.size(); ++l) {
        if (a_star > a_values[l]) ++exceed[l];
      }
    }
    return exceed;
  };
  auto merge = [](std::vector<std::uint64_t>& acc, const std::vector<std::uint64_t>& p) {
    acc.resize(p.size(), 0);
    for (std::size_t l = 0; l < p.size(); ++l) acc[l] += p[l];
  };
  const auto exceed = reduce_blocks<std::vector<std::uint64_t>>(n_paths, opt.workers, block, merge);

  std::vector<Estimate> out;
  const double nd = static_cast<double>(n_paths);
  for (std::size_t l = 0; l < a_values.size(); ++l) {
    const double p = static_cast<double>(exceed[l]) / nd;
    out.push_back({p, std::sqrt(p * (1.0 - p) / nd), n_paths, {seed, 0}});
  }
  return out;
}

Estimate holder_tail(const HolderSpec& spec, std::uint64_t n_paths, std::uint64_t seed,
                     const HolderTailOptions& opt) {
  spec.validate();
  return holder_tail_curve(spec.r, spec.depth, {spec.a}, n_paths, seed, opt).front();
}

double holder_union_bound(const KernelConfig& cfg, double r, int depth, double a) {
  HolderSpec{a, r, depth}.validate();
  double total = 0.0;
  for (int m = 0; m <= depth; ++m) {
    const double t = std::pow(2.0, -m);
    total += std::pow(2.0, m) * kernel_norm_tail(cfg, t, a * std::pow(2.0, -m * r));
  }
  return total;
}

}  // namespace hwiener
