#include "hwiener/feynman_kac.hpp"

#include "hwiener/kernel_table.hpp"

#include <boost/random/uniform_real_distribution.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace hwiener {

Potential Potential::constant(double c) {
  Potential p;
  p.kind = Kind::constant;
  p.value = c;
  return p;
}

Potential Potential::quadratic_radial(double alpha, double beta) {
  Potential p;
  p.kind = Kind::quadratic_radial;
  p.alpha = alpha;
  p.beta = beta;
  return p;
}

Potential Potential::tabulated(std::vector<double> lo, std::vector<double> step, std::vector<int> count,
                               std::vector<double> values) {
  Potential p;
  p.kind = Kind::tabulated;
  p.grid_lo = std::move(lo);
  p.grid_step = std::move(step);
  p.grid_count = std::move(count);
  p.values = std::move(values);
  return p;
}

void Potential::validate(int n) const {
  switch (kind) {
    case Kind::constant:
      if (!std::isfinite(value)) throw InvalidArgument("potential: constant must be finite");
      break;
    case Kind::quadratic_radial:
      if (!(alpha >= 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
        throw InvalidArgument("potential: quadratic_radial needs finite alpha >= 0 and finite beta");
      }
      break;
    case Kind::tabulated: {
      const std::size_t d = 2 * static_cast<std::size_t>(n) + 1;
      if (grid_lo.size() != d || grid_step.size() != d || grid_count.size() != d) {
        throw InvalidArgument("potential: tabulated grid needs one axis per coordinate");
      }
      std::size_t total = 1;
      for (std::size_t i = 0; i < d; ++i) {
        if (grid_count[i] < 2 || !(grid_step[i] > 0.0)) {
          throw InvalidArgument("potential: each tabulated axis needs >= 2 nodes and a positive step");
        }
        total *= static_cast<std::size_t>(grid_count[i]);
      }
      if (values.size() != total) throw InvalidArgument("potential: tabulated value count does not match grid");
      for (double v : values) {
        if (!std::isfinite(v)) throw InvalidArgument("potential: tabulated values must be finite");
      }
      break;
    }
  }
}

double Potential::operator()(std::span<const double> p) const {
  switch (kind) {
    case Kind::constant:
      return value;
    case Kind::quadratic_radial:
      return alpha * raw::z_norm_sq(p) + beta;
    case Kind::tabulated: {
      const std::size_t d = grid_count.size();
      // Multilinear over the enclosing cell; coordinates are clamped to the grid.
      std::size_t base = 0;
      std::size_t stride = 1;
      std::vector<std::size_t> strides(d);
      std::vector<double> frac(d);
      for (std::size_t i = d; i-- > 0;) {
        const double pos = std::clamp((p[i] - grid_lo[i]) / grid_step[i], 0.0, grid_count[i] - 1.0);
        const std::size_t cell = std::min(static_cast<std::size_t>(pos), static_cast<std::size_t>(grid_count[i] - 2));
        frac[i] = pos - static_cast<double>(cell);
        strides[i] = stride;
        base += cell * stride;
        stride *= static_cast<std::size_t>(grid_count[i]);
      }
      double acc = 0.0;
      for (std::size_t corner = 0; corner < (std::size_t{1} << d); ++corner) {
        double w = 1.0;
        std::size_t idx = base;
        for (std::size_t i = 0; i < d; ++i) {
          if (corner >> i & 1) {
            w *= frac[i];
            idx += strides[i];
          } else {
            w *= 1.0 - frac[i];
          }
        }
        if (w != 0.0) acc += w * values[idx];
      }
      return acc;
    }
  }
  return 0.0;
}

double Potential::lower_bound() const {
  switch (kind) {
    case Kind::constant:
      return value;
    case Kind::quadratic_radial:
      return beta;
    case Kind::tabulated:
      return values.empty() ? 0.0 : *std::min_element(values.begin(), values.end());
  }
  return 0.0;
}

InitialData InitialData::constant(double c) {
  InitialData f;
  f.kind = Kind::constant;
  f.amplitude = c;
  return f;
}

InitialData InitialData::gaussian_bump(std::vector<double> center, double width, double amplitude) {
  InitialData f;
  f.kind = Kind::gaussian_bump;
  f.center = std::move(center);
  f.width = width;
  f.amplitude = amplitude;
  return f;
}

InitialData InitialData::indicator_box(Box box, double amplitude) {
  InitialData f;
  f.kind = Kind::indicator_box;
  f.box = std::move(box);
  f.amplitude = amplitude;
  return f;
}

void InitialData::validate(int n) const {
  const std::size_t d = 2 * static_cast<std::size_t>(n) + 1;
  if (!std::isfinite(amplitude)) throw InvalidArgument("initial data: amplitude must be finite");
  if (kind == Kind::gaussian_bump) {
    if (center.size() != d) throw InvalidArgument("initial data: bump centre has the wrong dimension");
    if (!(width > 0.0) || !std::isfinite(width)) throw InvalidArgument("initial data: bump width must be positive");
  }
  if (kind == Kind::indicator_box) {
    if (box.size() != d) throw InvalidArgument("initial data: box has the wrong dimension");
    for (const auto& iv : box) {
      if (!(iv.lo <= iv.hi)) throw InvalidArgument("initial data: box interval with lo > hi");
    }
  }
}

double InitialData::operator()(std::span<const double> p) const {
  switch (kind) {
    case Kind::constant:
      return amplitude;
    case Kind::gaussian_bump: {
      double r2 = 0.0;
      for (std::size_t i = 0; i < center.size(); ++i) r2 += (p[i] - center[i]) * (p[i] - center[i]);
      return amplitude * std::exp(-r2 / (2.0 * width * width));
    }
    case Kind::indicator_box:
      return box_contains(box, p) ? amplitude : 0.0;
  }
  return 0.0;
}

double InitialData::sup_bound() const { return std::abs(amplitude); }

namespace {

/// Walks start x(s), tracking the trapezoid integral of V along the substeps.
/// on_grid(k, point, integral) sees the translated point at grid time k.
/// With freeze_after set, the integral stops accumulating past that time.
template <class OnGrid>
void walk_weighted(int n, const PathGrid& grid, const RngStreamSpec& spec, std::span<const double> start,
                   const Potential& V, OnGrid&& on_grid, double freeze_after = INFINITY) {
  const std::size_t d = 2 * static_cast<std::size_t>(n) + 1;
  std::vector<double> y(d);
  double integral = 0.0;
  double prev_time = 0.0;
  double prev_v = 0.0;
  const bool constant = V.is_constant();
  walk_path(
      n, grid, spec,
      [&](double time, std::span<const double> x) {
        if (time > freeze_after) return;
        if (constant) {
          integral = V.value * time;
          return;
        }
        raw::multiply(start, x, y);
        const double v = V(y);
        if (time > 0.0) integral += 0.5 * (time - prev_time) * (v + prev_v);
        prev_time = time;
        prev_v = v;
      },
      [&](std::size_t k, std::span<const double> x) {
        raw::multiply(start, x, y);
        on_grid(k, std::span<const double>(y), integral);
      });
}

/// Grid through the given times (0 and t included), fine enough that no
/// substep exceeds t / substeps.
PathGrid grid_through(std::vector<double> times, double t, int substeps) {
  times.push_back(0.0);
  times.push_back(t);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  double widest = 0.0;
  for (std::size_t i = 1; i < times.size(); ++i) widest = std::max(widest, times[i] - times[i - 1]);
  PathGrid g;
  g.times = std::move(times);
  g.substeps_per_interval = std::max(1, static_cast<int>(std::ceil(substeps * widest / t - 1e-9)));
  g.validate();
  return g;
}

std::size_t index_of(const PathGrid& g, double time) {
  return static_cast<std::size_t>(std::find(g.times.begin(), g.times.end(), time) - g.times.begin());
}

void require_positive(double t, const char* what) {
  if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument(std::string(what) + ": time must be positive");
}

void require_paths(std::uint64_t n_paths, const char* what) {
  if (n_paths < 1) throw InvalidArgument(std::string(what) + ": need at least one path");
}

struct PairStats {
  RunningStats a;
  RunningStats b;
  RunningStats diff;

  void add(double x, double y) {
    a.add(x);
    b.add(y);
    diff.add(x - y);
  }
  void merge(const PairStats& o) {
    a.merge(o.a);
    b.merge(o.b);
    diff.merge(o.diff);
  }
};

/// lhs = scale (offset + E[a]), rhs = scale (offset + E[b]), spread from the
/// paired differences.
IdentityCheck finish_check(const PairStats& st, double scale, double offset = 0.0) {
  IdentityCheck c;
  c.n_paths = st.a.count;
  c.lhs = (offset + st.a.mean) * scale;
  c.rhs = (offset + st.b.mean) * scale;
  const double se = st.diff.stderr_() * scale;
  const double delta = c.lhs - c.rhs;
  c.residual = c.rhs != 0.0 ? delta / c.rhs : delta;
  c.residual_stderr = c.rhs != 0.0 ? se / std::abs(c.rhs) : se;
  c.z_score = se > 0.0 ? delta / se : (delta == 0.0 ? 0.0 : INFINITY);
  return c;
}

}  // namespace

double weight_integral(const SamplePath& path, const Potential& V, const GroupPoint& base) {
  if (base.n() != path.n) throw InvalidArgument("weight_integral: dimension mismatch");
  V.validate(path.n);
  if (V.is_constant()) return V.value * path.grid.horizon();
  std::vector<double> y(path.dim());
  double total = 0.0;
  double prev = 0.0;
  for (std::size_t k = 0; k < path.size(); ++k) {
    raw::multiply(base.coords(), path.at(k), y);
    const double v = V(y);
    if (k > 0) total += 0.5 * (path.grid.times[k] - path.grid.times[k - 1]) * (v + prev);
    prev = v;
  }
  return total;
}

FKEstimate fk_solve(double t, const GroupPoint& xi, const InitialData& f, const Potential& V,
                    std::uint64_t n_paths, std::uint64_t seed, const FKOptions& opt) {
  require_positive(t, "fk_solve");
  require_paths(n_paths, "fk_solve");
  if (xi.n() != opt.n) throw InvalidArgument("fk_solve: base point dimension mismatch");
  f.validate(opt.n);
  V.validate(opt.n);
  const PathGrid grid = PathGrid::uniform(t, 1, opt.substeps);
  const std::size_t last = grid.size() - 1;

  auto block = [&](std::uint64_t begin, std::uint64_t end) {
    RunningStats st;
    for (std::uint64_t i = begin; i < end; ++i) {
      double value = 0.0;
      walk_weighted(opt.n, grid, path_stream(seed, i), xi.coords(), V,
                    [&](std::size_t k, std::span<const double> y, double integral) {
                      if (k == last) value = f(y) * std::exp(-integral);
                    });
      st.add(value);
    }
    return st;
  };
  const auto st = reduce_blocks<RunningStats>(n_paths, opt.workers, block,
                                              [](RunningStats& a, const RunningStats& b) { a.merge(b); });
  return {st.mean, st.stderr_(), n_paths, {seed, 0}};
}

namespace {

/// One tensor-quadrature pass of heat_reference at node density `density`.
double heat_reference_pass(const KernelTable& table, double t, const GroupPoint& xi, const InitialData& f,
                           double density) {
  const double sqt = std::sqrt(t);
  std::vector<double> eta(3);
  std::vector<double> zeta(3);
  double total = 0.0;
  const bool bump_centred = f.kind == InitialData::Kind::gaussian_bump && f.width < sqt;
  if (bump_centred) {
    // Integrate over eta near the bump; p_t(xi^{-1} eta) is smooth on the bump scale.
    const double w = f.width;
    const double reach = 8.0 * w;
    const double zs = std::min(w, sqt);
    const double us = std::min(w, t);
    const auto rx = quad::at_least(f.center[0] - reach, f.center[0] + reach, density * (8.0 + 1.05 * 2.0 * reach / zs));
    const auto ry = quad::at_least(f.center[1] - reach, f.center[1] + reach, density * (8.0 + 1.05 * 2.0 * reach / zs));
    const auto ru = quad::at_least(f.center[2] - reach, f.center[2] + reach, density * (8.0 + 1.05 * 2.0 * reach / us));
    for (std::size_t a = 0; a < rx.size(); ++a) {
      eta[0] = rx.nodes[a];
      for (std::size_t b = 0; b < ry.size(); ++b) {
        eta[1] = ry.nodes[b];
        for (std::size_t c = 0; c < ru.size(); ++c) {
          eta[2] = ru.nodes[c];
          raw::left_quotient(xi.coords(), eta, zeta);
          const double p = table.density(t, std::sqrt(raw::z_norm_sq(zeta)), zeta[2]);
          total += rx.weights[a] * ry.weights[b] * ru.weights[c] * f(eta) * p;
        }
      }
    }
    return total;
  }
  // Integrate over the increment zeta = xi^{-1} eta, truncated where the
  // Gaussian bound leaves mass below 1e-6.
  const double limit = default_truncation_radius(1, t);
  const double zs = f.kind == InitialData::Kind::gaussian_bump ? std::min(sqt, f.width) : sqt;
  const double uc = f.kind == InitialData::Kind::gaussian_bump ? std::min(t, f.width) : t;
  const auto rz = quad::at_least(-limit, limit, density * (8.0 + 1.05 * 2.0 * limit / zs));
  const auto ru = quad::sinh_mapped(-limit * limit, limit * limit, uc, 2.0 * density);
  for (std::size_t a = 0; a < rz.size(); ++a) {
    zeta[0] = rz.nodes[a];
    for (std::size_t b = 0; b < rz.size(); ++b) {
      zeta[1] = rz.nodes[b];
      const double rho = std::hypot(zeta[0], zeta[1]);
      double row = 0.0;
      for (std::size_t c = 0; c < ru.size(); ++c) {
        zeta[2] = ru.nodes[c];
        raw::multiply(xi.coords(), zeta, eta);
        row += ru.weights[c] * table.density(t, rho, zeta[2]) * f(eta);
      }
      total += rz.weights[a] * rz.weights[b] * row;
    }
  }
  return total;
}

}  // namespace

HeatReferenceResult heat_reference(double t, const GroupPoint& xi, const InitialData& f, const KernelConfig& cfg) {
  cfg.validate();
  require_positive(t, "heat_reference");
  if (cfg.n != 1 || xi.n() != 1) throw InvalidArgument("heat_reference supports n = 1 only");
  f.validate(1);
  const KernelTable& table = KernelTable::shared(1);
  HeatReferenceResult res;
  if (f.kind == InitialData::Kind::indicator_box) {
    const double lo = translated_box_mass(table, t, xi.coords(), f.box, 1.0);
    const double hi = translated_box_mass(table, t, xi.coords(), f.box, 1.5);
    res.value = f.amplitude * lo;
    res.error = f.sup_bound() * (std::abs(hi - lo) + 1e-6);
    return res;
  }
  const double lo = heat_reference_pass(table, t, xi, f, 1.0);
  const double hi = heat_reference_pass(table, t, xi, f, 1.5);
  res.value = lo;
  res.error = std::abs(hi - lo) + f.sup_bound() * 1e-6;
  return res;
}

void DensityGrid::validate() const {
  if (r_edges.size() < 2 || u_edges.size() < 2) throw InvalidArgument("density grid: need at least one bin per axis");
  if (!(r_edges.front() >= 0.0)) throw InvalidArgument("density grid: radial edges must be non-negative");
  for (std::size_t i = 1; i < r_edges.size(); ++i) {
    if (!(r_edges[i] > r_edges[i - 1])) throw InvalidArgument("density grid: radial edges must increase");
  }
  for (std::size_t j = 1; j < u_edges.size(); ++j) {
    if (!(u_edges[j] > u_edges[j - 1])) throw InvalidArgument("density grid: u edges must increase");
  }
}

double DensityGrid::volume(int n, std::size_t i, std::size_t j) const {
  // |{|z| <= r}| in R^{2n} is pi^n r^{2n} / n!
  const double ball = std::pow(std::numbers::pi, n) / std::tgamma(n + 1.0);
  const double shell = ball * (std::pow(r_edges[i + 1], 2 * n) - std::pow(r_edges[i], 2 * n));
  return shell * (u_edges[j + 1] - u_edges[j]);
}

DensityEstimate fk_kernel_density(double t, const Potential& V, const DensityGrid& grid, std::uint64_t n_paths,
                                  std::uint64_t seed, const DensityOptions& opt) {
  require_positive(t, "fk_kernel_density");
  require_paths(n_paths, "fk_kernel_density");
  grid.validate();
  V.validate(opt.n);
  const int n = opt.n;
  const std::size_t d = 2 * static_cast<std::size_t>(n) + 1;
  const std::size_t bins = grid.r_bins() * grid.u_bins();
  const PathGrid pg = PathGrid::uniform(t, 1, opt.substeps);
  const double h = t / opt.substeps;

  struct Partial {
    std::vector<double> s1;
    std::vector<double> s2;
    std::vector<std::uint64_t> hits;
    double total = 0.0;
    double max_weight = 0.0;
  };

  auto bin_of = [&](std::span<const double> p) -> std::ptrdiff_t {
    const double r = std::sqrt(raw::z_norm_sq(p));
    const double u = p[d - 1];
    const auto ri = std::upper_bound(grid.r_edges.begin(), grid.r_edges.end(), r) - grid.r_edges.begin() - 1;
    const auto uj = std::upper_bound(grid.u_edges.begin(), grid.u_edges.end(), u) - grid.u_edges.begin() - 1;
    if (ri < 0 || uj < 0 || ri >= static_cast<std::ptrdiff_t>(grid.r_bins()) ||
        uj >= static_cast<std::ptrdiff_t>(grid.u_bins())) {
      return -1;
    }
    return ri * static_cast<std::ptrdiff_t>(grid.u_bins()) + uj;
  };

  auto block = [&](std::uint64_t begin, std::uint64_t end) {
    Partial part{std::vector<double>(bins, 0.0), std::vector<double>(bins, 0.0),
                 std::vector<std::uint64_t>(bins, 0), 0.0, 0.0};
    std::vector<double> pts;
    std::vector<double> q(d);
    std::vector<double> endpoint(d);
    for (std::uint64_t i = begin; i < end; ++i) {
      double weight = 1.0;
      if (opt.reverse_paths) {
        pts.clear();
        walk_path(
            n, pg, path_stream(seed, i),
            [&](double, std::span<const double> x) { pts.insert(pts.end(), x.begin(), x.end()); },
            [](std::size_t, std::span<const double>) {});
        const std::size_t steps = pts.size() / d;
        std::span<const double> last(pts.data() + (steps - 1) * d, d);
        // Reversed path at time s is x(t)^{-1} x(t - s); it ends at x(t)^{-1}.
        double integral = 0.0;
        double prev = 0.0;
        for (std::size_t k = 0; k < steps; ++k) {
          raw::left_quotient(last, std::span<const double>(pts.data() + (steps - 1 - k) * d, d), q);
          if (k + 1 == steps) endpoint = q;
          if (V.is_constant()) continue;
          const double v = V(q);
          if (k > 0) integral += 0.5 * h * (v + prev);
          prev = v;
        }
        weight = std::exp(-(V.is_constant() ? V.value * t : integral));
      } else {
        walk_weighted(n, pg, path_stream(seed, i), GroupPoint(n).coords(), V,
                      [&](std::size_t k, std::span<const double> y, double integral) {
                        if (k + 1 == pg.size()) {
                          std::copy(y.begin(), y.end(), endpoint.begin());
                          weight = std::exp(-integral);
                        }
                      });
      }
      part.total += weight;
      part.max_weight = std::max(part.max_weight, weight);
      const auto b = bin_of(endpoint);
      if (b >= 0) {
        part.s1[b] += weight;
        part.s2[b] += weight * weight;
        ++part.hits[b];
      }
    }
    return part;
  };
  auto merge = [&](Partial& acc, const Partial& p) {
    if (acc.s1.empty()) {
      acc = p;
      return;
    }
    for (std::size_t b = 0; b < bins; ++b) {
      acc.s1[b] += p.s1[b];
      acc.s2[b] += p.s2[b];
      acc.hits[b] += p.hits[b];
    }
    acc.total += p.total;
    acc.max_weight = std::max(acc.max_weight, p.max_weight);
  };
  const Partial all = reduce_blocks<Partial>(n_paths, opt.workers, block, merge);

  DensityEstimate est;
  est.grid = grid;
  est.n = n;
  est.t = t;
  est.n_paths = n_paths;
  est.seed = {seed, 0};
  est.mass.resize(bins);
  est.mass_stderr.resize(bins);
  est.density.resize(bins);
  est.density_stderr.resize(bins);
  est.empty.resize(bins);
  const double nd = static_cast<double>(n_paths);
  for (std::size_t i = 0; i < grid.r_bins(); ++i) {
    for (std::size_t j = 0; j < grid.u_bins(); ++j) {
      const std::size_t b = est.index(i, j);
      const double m = all.s1[b] / nd;
      const double var = std::max(0.0, all.s2[b] / nd - m * m);
      const double vol = grid.volume(n, i, j);
      est.mass[b] = m;
      est.mass_stderr[b] = std::sqrt(var / nd);
      est.density[b] = m / vol;
      est.density_stderr[b] = est.mass_stderr[b] / vol;
      est.empty[b] = all.hits[b] == 0;
    }
  }
  est.total_mass = all.total / nd;
  est.max_weight = all.max_weight;
  return est;
}

FKEstimate fk_box_density(double t, const GroupPoint& start, const Potential& V, const Box& box,
                          std::uint64_t n_paths, std::uint64_t seed, const FKOptions& opt) {
  require_positive(t, "fk_box_density");
  require_paths(n_paths, "fk_box_density");
  V.validate(opt.n);
  if (start.n() != opt.n || box.size() != start.coords().size()) {
    throw InvalidArgument("fk_box_density: dimension mismatch");
  }
  const double vol = box_volume(box);
  if (!(vol > 0.0) || !std::isfinite(vol)) throw InvalidArgument("fk_box_density: box needs finite positive volume");
  const PathGrid grid = PathGrid::uniform(t, 1, opt.substeps);
  const std::size_t last = grid.size() - 1;
  auto block = [&](std::uint64_t begin, std::uint64_t end) {
    RunningStats st;
    for (std::uint64_t i = begin; i < end; ++i) {
      double value = 0.0;
      walk_weighted(opt.n, grid, path_stream(seed, i), start.coords(), V,
                    [&](std::size_t k, std::span<const double> y, double integral) {
                      if (k == last && box_contains(box, y)) value = std::exp(-integral);
                    });
      st.add(value);
    }
    return st;
  };
  const auto st = reduce_blocks<RunningStats>(n_paths, opt.workers, block,
                                              [](RunningStats& a, const RunningStats& b) { a.merge(b); });
  return {st.mean / vol, st.stderr_() / vol, n_paths, {seed, 0}};
}

PathFunctional PathFunctional::fk_weight(Potential V) {
  PathFunctional g;
  g.kind = Kind::fk_weight;
  g.V = std::move(V);
  return g;
}

PathFunctional PathFunctional::indicator(CylinderSet c) {
  PathFunctional g;
  g.kind = Kind::cylinder;
  g.cylinder = std::move(c);
  return g;
}

IdentityCheck markov_check(double s, double t, const GroupPoint& xi, const PathFunctional& G,
                           std::uint64_t n_paths, std::uint64_t seed, const BoxCheckOptions& opt) {
  if (!(s > 0.0 && s < t) || !std::isfinite(t)) throw InvalidArgument("markov_check: need 0 < s < t");
  require_paths(n_paths, "markov_check");
  if (opt.n != 1 || xi.n() != 1) throw InvalidArgument("markov_check supports n = 1 only");
  std::vector<double> times{s};
  if (G.kind == PathFunctional::Kind::cylinder) {
    G.cylinder.validate();
    if (G.cylinder.n != 1 || G.cylinder.times.back() > s) {
      throw InvalidArgument("markov_check: cylinder functional must live on [0, s]");
    }
    times.insert(times.end(), G.cylinder.times.begin(), G.cylinder.times.end());
  }
  if (G.kind == PathFunctional::Kind::fk_weight) G.V.validate(1);
  const PathGrid grid = grid_through(times, t, opt.substeps);
  const std::size_t ks = index_of(grid, s);
  const std::size_t last = grid.size() - 1;
  std::vector<std::size_t> cyl_index;
  for (double c : G.cylinder.times) cyl_index.push_back(index_of(grid, c));
  const Box target = box_around(xi.coords(), opt.half_z, opt.half_u);
  const KernelTable& table = KernelTable::shared(1);
  const Potential none = Potential::constant(0.0);
  const Potential& V = G.kind == PathFunctional::Kind::fk_weight ? G.V : none;
  const GroupPoint origin(1);

  auto block = [&](std::uint64_t begin, std::uint64_t end) {
    PairStats st;
    std::vector<double> xs(3);
    for (std::uint64_t i = begin; i < end; ++i) {
      double g = 1.0;
      bool hit = false;
      std::size_t next_cyl = 0;
      walk_weighted(
          1, grid, path_stream(seed, i), origin.coords(), V,
          [&](std::size_t k, std::span<const double> y, double integral) {
            while (next_cyl < cyl_index.size() && cyl_index[next_cyl] == k) {
              if (!box_contains(G.cylinder.boxes[next_cyl], y)) g = 0.0;
              ++next_cyl;
            }
            if (k == ks) {
              std::copy(y.begin(), y.end(), xs.begin());
              if (G.kind == PathFunctional::Kind::fk_weight) g *= std::exp(-integral);
            }
            if (k == last) hit = box_contains(target, y);
          },
          s);
      const double lhs = hit ? g : 0.0;
      const double rhs = g == 0.0 ? 0.0 : g * translated_box_mass(table, t - s, xs, target, opt.density);
      st.add(lhs, rhs);
    }
    return st;
  };
  const auto st = reduce_blocks<PairStats>(n_paths, opt.workers, block,
                                           [](PairStats& a, const PairStats& b) { a.merge(b); });
  return finish_check(st, 1.0 / box_volume(target));
}

IdentityCheck duhamel_residual(double t, const GroupPoint& xi, const Potential& V, std::uint64_t n_paths,
                               std::uint64_t seed, const DuhamelOptions& opt) {
  require_positive(t, "duhamel_residual");
  require_paths(n_paths, "duhamel_residual");
  if (opt.n != 1 || xi.n() != 1) throw InvalidArgument("duhamel_residual supports n = 1 only");
  if (opt.tau_nodes < 1) throw InvalidArgument("duhamel_residual: need at least one tau node");
  V.validate(1);
  const auto tau = quad::at_least(0.0, t, opt.tau_nodes);
  const PathGrid grid = grid_through(tau.nodes, t, opt.substeps);
  std::vector<std::size_t> tau_index;
  for (double x : tau.nodes) tau_index.push_back(index_of(grid, x));
  const std::size_t last = grid.size() - 1;
  const Box target = box_around(xi.coords(), opt.half_z, opt.half_u);
  const KernelTable& table = KernelTable::shared(1);
  const GroupPoint origin(1);
  const double free_mass = translated_box_mass(table, t, origin.coords(), target, 2.0 * opt.density);

  auto block = [&](std::uint64_t begin, std::uint64_t end) {
    PairStats st;
    for (std::uint64_t i = begin; i < end; ++i) {
      double lhs = 0.0;
      double correction = 0.0;
      std::size_t next = 0;
      walk_weighted(1, grid, path_stream(seed, i), origin.coords(), V,
                    [&](std::size_t k, std::span<const double> y, double integral) {
                      if (next < tau_index.size() && tau_index[next] == k) {
                        const double v = V(y);
                        if (v != 0.0) {
                          correction += tau.weights[next] * std::exp(-integral) * v *
                                        translated_box_mass(table, t - tau.nodes[next], y, target, opt.density);
                        }
                        ++next;
                      }
                      if (k == last && box_contains(target, y)) lhs = std::exp(-integral) - 1.0;
                    });
      // The unweighted hit has known mean free_mass and serves as a control
      // variate: lhs counts (w - 1) 1{x(t) in B}.
      st.add(lhs, -correction);
    }
    return st;
  };
  const auto st = reduce_blocks<PairStats>(n_paths, opt.workers, block,
                                           [](PairStats& a, const PairStats& b) { a.merge(b); });
  return finish_check(st, 1.0 / box_volume(target), free_mass);
}

SymmetryResult symmetry_check(double t, const GroupPoint& xi, const GroupPoint& eta, const Potential& V,
                              std::uint64_t n_paths, std::uint64_t seed, const BoxCheckOptions& opt) {
  require_positive(t, "symmetry_check");
  require_paths(n_paths, "symmetry_check");
  if (xi.n() != opt.n || eta.n() != opt.n) throw InvalidArgument("symmetry_check: dimension mismatch");
  if (!(opt.half_z > 0.0 && opt.half_u > 0.0)) throw InvalidArgument("symmetry_check: box half-widths must be positive");
  V.validate(opt.n);
  const std::size_t d = 2 * static_cast<std::size_t>(opt.n) + 1;
  const Box box_xi = box_around(xi.coords(), opt.half_z, opt.half_u);
  const Box box_eta = box_around(eta.coords(), opt.half_z, opt.half_u);
  const double vol = box_volume(box_xi);
  const PathGrid grid = PathGrid::uniform(t, 1, opt.substeps);
  const std::size_t last = grid.size() - 1;
  const std::uint64_t offset_seed = splitmix64(seed ^ 0x6a09e667f3bcc909ULL);

  auto block = [&](std::uint64_t begin, std::uint64_t end) {
    PairStats st;
    std::vector<double> offset(d);
    std::vector<double> start(d);
    for (std::uint64_t i = begin; i < end; ++i) {
      Engine eng = make_engine({offset_seed, i});
      boost::random::uniform_real_distribution<double> unit(-1.0, 1.0);
      for (std::size_t c = 0; c < d; ++c) offset[c] = unit(eng) * (c + 1 == d ? opt.half_u : opt.half_z);
      // Both directions reuse the same offset and the same Brownian increments.
      auto run = [&](const GroupPoint& from, const Box& to) {
        for (std::size_t c = 0; c < d; ++c) start[c] = from.coords()[c] + offset[c];
        double value = 0.0;
        walk_weighted(opt.n, grid, path_stream(seed, i), start, V,
                      [&](std::size_t k, std::span<const double> y, double integral) {
                        if (k == last && box_contains(to, y)) value = std::exp(-integral);
                      });
        return value;
      };
      const double fwd = run(xi, box_eta);
      const double bwd = run(eta, box_xi);
      st.add(fwd, bwd);
    }
    return st;
  };
  const auto st = reduce_blocks<PairStats>(n_paths, opt.workers, block,
                                           [](PairStats& a, const PairStats& b) { a.merge(b); });
  SymmetryResult r;
  r.forward = {st.a.mean / vol, st.a.stderr_() / vol, n_paths, {seed, 0}};
  r.backward = {st.b.mean / vol, st.b.stderr_() / vol, n_paths, {seed, 0}};
  const double se = st.diff.stderr_();
  const double delta = st.a.mean - st.b.mean;
  r.z_score = se > 0.0 ? delta / se : (delta == 0.0 ? 0.0 : INFINITY);
  return r;
}

}  // namespace hwiener
