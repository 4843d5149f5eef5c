#include "hwiener/measure.hpp"

#include "hwiener/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hwiener {

namespace {

/// Rule for a horizontal coordinate: Gaussian-like integrand of width ~scale.
quad::Rule z_rule(const Interval& iv, double limit, double scale, double density) {
  const double lo = std::max(iv.lo, -limit);
  const double hi = std::min(iv.hi, limit);
  if (!(lo < hi)) return {};
  return quad::at_least(lo, hi, density * (8.0 + 1.05 * (hi - lo) / scale));
}

/// Rule for the vertical coordinate in the variable w = asinh(u / c), which
/// compresses the exponential tails of the u-marginal.
quad::Rule u_rule(const Interval& iv, double limit, double c, double density) {
  const double lo = std::max(iv.lo, -limit);
  const double hi = std::min(iv.hi, limit);
  if (!(lo < hi)) return {};
  return quad::sinh_mapped(lo, hi, c, density);
}

bool has_unbounded(const Box& b) {
  return std::any_of(b.begin(), b.end(), [](const Interval& iv) { return !iv.bounded(); });
}

}  // namespace

void CylinderSet::validate() const {
  if (n < 1) throw InvalidArgument("cylinder: n must be >= 1");
  if (times.empty()) throw InvalidArgument("cylinder: needs at least one time");
  if (boxes.size() != times.size()) throw InvalidArgument("cylinder: one box per time required");
  for (std::size_t j = 0; j < times.size(); ++j) {
    if (!(times[j] > (j == 0 ? 0.0 : times[j - 1])) || !std::isfinite(times[j])) {
      throw InvalidArgument("cylinder: times must be positive and strictly increasing");
    }
    if (boxes[j].size() != 2 * static_cast<std::size_t>(n) + 1) {
      throw InvalidArgument("cylinder: box " + std::to_string(j + 1) + " has the wrong dimension");
    }
    for (const auto& iv : boxes[j]) {
      if (!(iv.lo <= iv.hi)) throw InvalidArgument("cylinder: interval with lo > hi");
    }
  }
}

CylinderSet insert_slice(const CylinderSet& I, double t_new) {
  I.validate();
  if (!(t_new > 0.0) || !std::isfinite(t_new)) throw InvalidArgument("insert_slice: time must be positive");
  if (std::find(I.times.begin(), I.times.end(), t_new) != I.times.end()) {
    throw InvalidArgument("insert_slice: time already present");
  }
  CylinderSet out = I;
  const auto pos = std::upper_bound(out.times.begin(), out.times.end(), t_new) - out.times.begin();
  out.times.insert(out.times.begin() + pos, t_new);
  out.boxes.insert(out.boxes.begin() + pos, whole_space(I.n));
  return out;
}

bool cylinder_contains(const CylinderSet& I, std::span<const std::span<const double>> values) {
  for (std::size_t j = 0; j < I.boxes.size(); ++j) {
    if (!box_contains(I.boxes[j], values[j])) return false;
  }
  return true;
}

double translated_box_mass(const KernelTable& table, double t, std::span<const double> eta, const Box& box,
                           double density, double tail_mass) {
  const int n = table.n();
  const std::size_t m = 2 * static_cast<std::size_t>(n);
  if (box.size() != m + 1 || eta.size() != m + 1) {
    throw InvalidArgument("translated_box_mass: dimension mismatch");
  }
  const double limit = default_truncation_radius(n, t, tail_mass);
  // The u-window seen by the increment shears with the horizontal offset of eta.
  double scale = std::sqrt(t);
  const double eta_z = std::sqrt(raw::z_norm_sq(eta));
  if (eta_z > 0.0 && !box[m].is_all()) scale = std::min(scale, 1.5 * t / eta_z);

  std::vector<quad::Rule> rules(m);
  for (std::size_t i = 0; i < m; ++i) {
    rules[i] = z_rule({box[i].lo - eta[i], box[i].hi - eta[i]}, limit, scale, density);
    if (rules[i].size() == 0) return 0.0;
  }
  const Interval& uiv = box[m];
  std::vector<std::size_t> idx(m, 0);
  std::vector<double> zeta(m + 1, 0.0);
  double total = 0.0;
  for (;;) {
    double w = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
      zeta[i] = rules[i].nodes[idx[i]];
      w *= rules[i].weights[idx[i]];
    }
    const double rho = std::sqrt(raw::z_norm_sq(zeta));
    // u of eta * zeta = eta_u + zeta_u + 2 Im(z_eta . conj z_zeta)
    const double base = eta[m] + 2.0 * raw::symplectic(eta, zeta);
    total += w * (table.u_cdf(t, rho, uiv.hi - base) - table.u_cdf(t, rho, uiv.lo - base));
    std::size_t k = 0;
    while (k < m && ++idx[k] == rules[k].size()) idx[k++] = 0;
    if (k == m) break;
  }
  return total;
}

CylinderQuadResult cylinder_measure_quadrature(const KernelConfig& cfg, const CylinderSet& I,
                                               const CylinderQuadOptions& opt) {
  I.validate();
  cfg.validate();
  if (I.n != 1 || cfg.n != 1) throw InvalidArgument("cylinder quadrature supports n = 1 only");
  if (I.times.size() > 2) {
    throw InvalidArgument("cylinder quadrature supports at most 2 times; use Monte Carlo beyond");
  }
  const KernelTable& table = KernelTable::shared(1);
  const GroupPoint origin(1);

  auto run = [&](double density) {
    if (I.times.size() == 1) {
      return translated_box_mass(table, I.times[0], origin.coords(), I.boxes[0], density, opt.tail_mass);
    }
    const double t1 = I.times[0];
    const double dt = I.times[1] - I.times[0];
    const Box& b1 = I.boxes[0];
    const double limit = default_truncation_radius(1, t1, opt.tail_mass);
    const double zs = std::min(std::sqrt(t1), std::sqrt(dt));
    const double uc = std::min(t1, dt);
    const auto rx = z_rule(b1[0], limit, zs, density);
    const auto ry = z_rule(b1[1], limit, zs, density);
    const auto ru = u_rule(b1[2], limit * limit, uc, density);
    double total = 0.0;
    std::vector<double> eta(3);
    for (std::size_t a = 0; a < rx.size(); ++a) {
      eta[0] = rx.nodes[a];
      for (std::size_t b = 0; b < ry.size(); ++b) {
        eta[1] = ry.nodes[b];
        const double rho = std::hypot(eta[0], eta[1]);
        double row = 0.0;
        for (std::size_t c = 0; c < ru.size(); ++c) {
          eta[2] = ru.nodes[c];
          // The inner probability is at most one, so negligible outer weight is skipped.
          const double w = ru.weights[c] * rx.weights[a] * ry.weights[b];
          const double bound = w * table.upper_bound(t1, rho, eta[2]);
          if (bound < 1e-15) continue;
          // Nodes carrying almost no mass only need a coarse inner rule.
          const double inner = bound < 1e-9 ? 0.3 * density : density;
          const double p = table.density(t1, rho, eta[2]);
          row += ru.weights[c] * p * translated_box_mass(table, dt, eta, I.boxes[1], inner, opt.tail_mass);
        }
        total += rx.weights[a] * ry.weights[b] * row;
      }
    }
    return total;
  };

  CylinderQuadResult res;
  res.value = run(opt.density);
  for (const auto& b : I.boxes) {
    if (has_unbounded(b)) res.error += opt.tail_mass;
  }
  if (opt.estimate_error) res.error += std::abs(run(1.5 * opt.density) - res.value);
  return res;
}

std::vector<Estimate> cylinder_measure_mc_batch(const std::vector<CylinderSet>& sets,
                                                std::uint64_t n_paths, std::uint64_t seed,
                                                const CylinderMcOptions& opt) {
  if (sets.empty()) return {};
  if (n_paths < 1) throw InvalidArgument("cylinder_measure_mc: need at least one path");
  for (const auto& s : sets) {
    s.validate();
    if (s.times != sets.front().times || s.n != sets.front().n) {
      throw InvalidArgument("cylinder_measure_mc_batch: sets must share n and times");
    }
  }
  const CylinderSet& first = sets.front();
  PathGrid grid;
  grid.times.push_back(0.0);
  grid.times.insert(grid.times.end(), first.times.begin(), first.times.end());
  grid.substeps_per_interval = opt.substeps_per_interval;
  grid.validate();
  const std::size_t d = 2 * static_cast<std::size_t>(first.n) + 1;
  const std::size_t m = first.times.size();

  auto block = [&](std::uint64_t begin, std::uint64_t end) {
    std::vector<std::uint64_t> hits(sets.size(), 0);
    std::vector<double> vals(m * d);
    std::vector<std::span<const double>> views(m);
    for (std::size_t j = 0; j < m; ++j) views[j] = {vals.data() + j * d, d};
    for (std::uint64_t i = begin; i < end; ++i) {
      walk_path(
          first.n, grid, path_stream(seed, i), [](double, std::span<const double>) {},
          [&](std::size_t k, std::span<const double> x) {
            if (k > 0) std::copy(x.begin(), x.end(), vals.begin() + (k - 1) * d);
          });
      for (std::size_t s = 0; s < sets.size(); ++s) {
        if (cylinder_contains(sets[s], views)) ++hits[s];
      }
    }
    return hits;
  };
  auto merge = [](std::vector<std::uint64_t>& acc, const std::vector<std::uint64_t>& p) {
    acc.resize(p.size(), 0);
    for (std::size_t s = 0; s < p.size(); ++s) acc[s] += p[s];
  };
  const auto hits = reduce_blocks<std::vector<std::uint64_t>>(n_paths, opt.workers, block, merge);

  std::vector<Estimate> out;
  const double nd = static_cast<double>(n_paths);
  for (std::size_t s = 0; s < sets.size(); ++s) {
    const double p = static_cast<double>(hits[s]) / nd;
    out.push_back({p, std::sqrt(p * (1.0 - p) / nd), n_paths, {seed, 0}});
  }
  return out;
}

Estimate cylinder_measure_mc(const CylinderSet& I, std::uint64_t n_paths, std::uint64_t seed,
                             const CylinderMcOptions& opt) {
  return cylinder_measure_mc_batch({I}, n_paths, seed, opt).front();
}

}  // namespace hwiener
