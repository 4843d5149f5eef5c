#pragma once

// Dyadic chaining for paths on [0, 1].
//
// Hypothesis at level a: every level-m dyadic increment satisfies
//   |x((k-1) 2^-m)^{-1} x(k 2^-m)| <= a 2^{-m r},   m <= depth.
// Conclusion: for all dyadic t1 < t2 on the grid,
//   |x(t1)^{-1} x(t2)| <= 2a / (1 - 2^{-r}) |t2 - t1|^r.
// The check walks the decomposition of [t1, t2] into maximal dyadic intervals,
// at most two per level, which is where the constant comes from.

#include "hwiener/heat_kernel.hpp"
#include "hwiener/parallel.hpp"
#include "hwiener/sampler.hpp"

#include <cstdint>
#include <vector>

namespace hwiener {

struct HolderSpec {
  double a = 1.0;
  double r = 0.4;
  int depth = 8;

  void validate() const;
  double chain_constant() const;  // 2a / (1 - 2^{-r})
};

struct HolderCertificate {
  bool hypothesis_holds = false;
  std::uint64_t hypothesis_violations = 0;
  /// Smallest a for which the hypothesis would hold on this path.
  double a_star = 0.0;
  double constant = 0.0;
  /// max over dyadic pairs of |x(t1)^{-1} x(t2)| / |t2 - t1|^r (only when the hypothesis holds)
  double max_ratio = 0.0;
  /// max over pairs of (sum of per-piece hypothesis bounds) / |t2 - t1|^r
  double max_chain_ratio = 0.0;
  std::uint64_t conclusion_violations = 0;
  std::uint64_t pairs_checked = 0;
};

/// Smallest a such that the dyadic hypothesis holds up to `depth`.
double dyadic_a_star(const SamplePath& path, double r, int depth);

/// Checks the hypothesis and, when it holds, the conclusion at every dyadic
/// pair. The path grid must be the dyadic grid of [0, 1] at spec.depth.
HolderCertificate dyadic_to_holder(const SamplePath& path, const HolderSpec& spec);

/// Horizontal path on the dyadic grid with at least one increment of norm
/// exactly a 2^{-m r} at every level m, built by midpoint displacement.
SamplePath extremal_path(int n, const HolderSpec& spec);

struct HolderTailOptions {
  int n = 1;
  int substeps_per_interval = 4;
  unsigned workers = 0;
};

/// Fraction of sampled paths violating the hypothesis at each a, on common paths.
std::vector<Estimate> holder_tail_curve(double r, int depth, const std::vector<double>& a_values,
                                        std::uint64_t n_paths, std::uint64_t seed,
                                        const HolderTailOptions& opt = {});

Estimate holder_tail(const HolderSpec& spec, std::uint64_t n_paths, std::uint64_t seed,
                     const HolderTailOptions& opt = {});

/// Union bound sum_{m <= depth} 2^m P(|x(2^-m)| > a 2^{-m r}) from the kernel's
/// exact norm tail.
double holder_union_bound(const KernelConfig& cfg, double r, int depth, double a);

}  // namespace hwiener
