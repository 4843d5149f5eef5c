#include "hwiener/heat_kernel.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

namespace hwiener {

namespace {

constexpr double kPi = std::numbers::pi;

void require_time(const KernelConfig& cfg, double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument("time must be positive");
  if (t < cfg.t_floor) {
    throw InvalidArgument("time " + std::to_string(t) + " below the configured floor " +
                          std::to_string(cfg.t_floor));
  }
}

double sech_pow(double l, int n) { return std::pow(1.0 / std::cosh(std::min(std::abs(l), 700.0)), n); }

/// (sin(l b) - sin(l a)) / l, continuous at l = 0.
double sin_diff_over(double l, double a, double b) {
  const double m = std::max(std::abs(a), std::abs(b));
  if (std::abs(l) * m < 1e-4) return (b - a) - l * l * (b * b * b - a * a * a) / 6.0;
  return (std::sin(l * b) - std::sin(l * a)) / l;
}

/// Lower bound of int_0^1 (l/sinh l)^n exp(-l coth(l) a) dl, the envelope scale.
double envelope_scale(int n, double a) {
  const double head = std::pow(0.85, n) * std::exp(-a);
  if (a < 1e-12) return head;
  return head * std::sqrt(3.0 * kPi / (4.0 * a)) * std::erf(std::sqrt(a / 3.0));
}

/// Bound on int_cut^inf (l/sinh l)^n exp(-l a) dl.
double kernel_tail_bound(int n, double a, double cut) {
  const double k = n + a;
  const double c = 2.0 / (1.0 - std::exp(-2.0 * cut));
  return std::pow(c, n) * boost::math::tgamma(n + 1.0, k * cut) / std::pow(k, n + 1);
}

/// Rigorous bound on P(|z| > r sqrt t) + P(|u| > v t).
/// |z|^2/(4t) ~ Gamma(n, 1); Chernoff bound on |u| via sec^n at 4 theta t = pi/2 - delta.
double outside_bound(int n, double r, double v) {
  const double z_tail = boost::math::gamma_q(static_cast<double>(n), r * r / 4.0);
  const double delta = std::min(0.5, 4.0 * n / v);
  const double u_tail = 2.0 * std::pow(1.0 / std::sin(delta), n) * std::exp(-(kPi / 2.0 - delta) * v / 4.0);
  return z_tail + u_tail;
}

/// Splits an interval into c_half * (whole line) + [a, b] with finite a, b,
/// using the evenness of the u-marginal.
struct USplit {
  double half = 0.0;
  double a = 0.0;
  double b = 0.0;
};

USplit split_u(double lo, double hi) {
  if (!(lo <= hi)) throw InvalidArgument("interval with lo > hi");
  const bool lo_inf = std::isinf(lo);
  const bool hi_inf = std::isinf(hi);
  if (lo_inf && hi_inf) return {1.0, 0.0, 0.0};
  if (hi_inf) return {0.5, lo, 0.0};
  if (lo_inf) return {0.5, 0.0, hi};
  return {0.0, lo, hi};
}

/// Integrates g on [0, cut] with panels no wider than half a period of the
/// fastest oscillation, then bisects adaptively to abs_tol.
template <class G>
quad::Result lambda_quadrature(G&& g, double cut, double omega, int min_nodes, double abs_tol,
                               unsigned max_depth) {
  const int by_nodes = std::max(1, min_nodes / 15);
  const int by_osc = static_cast<int>(std::ceil(cut * std::abs(omega) / kPi));
  const int panels = std::max(by_nodes, by_osc);
  const double h = cut / panels;
  quad::Result total;
  for (int p = 0; p < panels; ++p) {
    auto r = quad::adaptive(g, p * h, (p + 1) * h, abs_tol / panels, max_depth);
    total.value += r.value;
    total.error += r.error;
    total.l1 += r.l1;
  }
  return total;
}

/// Cutoff for integrands dominated by C sech^n(l) / l: tail <= 2^{n+1} e^{-n L} / (pi n L).
double sech_cutoff(int n, double tol) {
  double cut = 4.0;
  while (std::pow(2.0, n + 1) * std::exp(-n * cut) / (kPi * n * cut) > 1e-3 * tol) cut *= 1.1;
  return cut;
}

/// (1/pi) int_0^inf sech^n(l) zfac(l) (sin(l b/4t) - sin(l a/4t)) / l dl + half * zfac(0)
template <class ZFactor>
double u_interval_mass(const KernelConfig& cfg, double t, double lo, double hi, ZFactor&& zfac) {
  const USplit sp = split_u(lo, hi);
  const int n = cfg.n;
  double mass = sp.half * zfac(0.0);
  if (sp.a == sp.b) return mass;
  const double a = sp.a / (4.0 * t);
  const double b = sp.b / (4.0 * t);
  const double tol = cfg.rel_tol;
  const double cut = cfg.lambda_cutoff > 0.0 ? cfg.lambda_cutoff : sech_cutoff(n, tol);
  auto g = [&](double l) { return sech_pow(l, n) * zfac(l) * sin_diff_over(l, a, b); };
  auto r = lambda_quadrature(g, cut, std::max(std::abs(a), std::abs(b)), cfg.node_count,
                             0.1 * kPi * tol, cfg.max_depth);
  if (r.error > kPi * tol) {
    throw NumericalFailure("u-interval mass quadrature did not converge (error " +
                           std::to_string(r.error / kPi) + ")");
  }
  return mass + r.value / kPi;
}

/// Normalized mass of exp(-b x^2) on an interval.
double gauss_interval(double b, const Interval& iv) {
  const double s = std::sqrt(b);
  const double hi = std::isinf(iv.hi) ? (iv.hi > 0 ? 1.0 : -1.0) : std::erf(s * iv.hi);
  const double lo = std::isinf(iv.lo) ? (iv.lo > 0 ? 1.0 : -1.0) : std::erf(s * iv.lo);
  return 0.5 * (hi - lo);
}

}  // namespace

void KernelConfig::validate() const {
  if (n < 1) throw InvalidArgument("kernel config: n must be >= 1");
  if (lambda_cutoff < 0.0) throw InvalidArgument("kernel config: lambda_cutoff must be >= 0");
  if (node_count < 1) throw InvalidArgument("kernel config: node_count must be >= 1");
  if (!(rel_tol > 0.0)) throw InvalidArgument("kernel config: rel_tol must be positive");
  if (!(t_floor > 0.0)) throw InvalidArgument("kernel config: t_floor must be positive");
}

double lambda_over_sinh(double l) {
  const double a = std::abs(l);
  if (a < 1e-3) {
    const double a2 = a * a;
    return 1.0 - a2 / 6.0 + 7.0 * a2 * a2 / 360.0;
  }
  if (a > 700.0) return 2.0 * a * std::exp(-a);
  return a / std::sinh(a);
}

double lambda_coth(double l) {
  const double a = std::abs(l);
  if (a < 1e-3) {
    const double a2 = a * a;
    return 1.0 + a2 / 3.0 - a2 * a2 / 45.0;
  }
  return a / std::tanh(a);
}

KernelValue kernel_eval_detailed(const KernelConfig& cfg, double t, double z_norm, double u) {
  cfg.validate();
  require_time(cfg, t);
  if (!(z_norm >= 0.0) || !std::isfinite(z_norm) || !std::isfinite(u)) {
    throw InvalidArgument("kernel_eval: |z| must be finite and non-negative, u finite");
  }
  const int n = cfg.n;
  const double a = z_norm * z_norm / (4.0 * t);
  const double omega = std::abs(u) / (4.0 * t);
  // p_t <= p_t(0) exp(-a); beyond this the value underflows anyway.
  if (a > 700.0) return {0.0, 0.0, 0.0, 0.0};
  const double scale = envelope_scale(n, a);
  const double target = cfg.rel_tol * scale;

  double cut = cfg.lambda_cutoff;
  if (cut <= 0.0) {
    cut = 1.0;
    while (kernel_tail_bound(n, a, cut) > 1e-3 * target) cut *= 1.1;
  }
  const double tail = kernel_tail_bound(n, a, cut);
  if (tail > target) {
    throw NumericalFailure("kernel_eval: lambda tail bound " + std::to_string(tail) +
                           " exceeds tolerance " + std::to_string(target));
  }

  auto g = [&](double l) {
    return std::pow(lambda_over_sinh(l), n) * std::exp(-lambda_coth(l) * a) * std::cos(l * omega);
  };
  auto r = lambda_quadrature(g, cut, omega, cfg.node_count, 0.1 * target, cfg.max_depth);
  if (r.error > target) {
    throw NumericalFailure("kernel_eval: quadrature error " + std::to_string(r.error) +
                           " exceeds tolerance " + std::to_string(target));
  }
  // (2 pi)^{-1} (4 pi t)^{-n} (4t)^{-1}, doubled for the half-line
  const double pref = 2.0 / (2.0 * kPi) * std::pow(4.0 * kPi * t, -n) / (4.0 * t);
  return {pref * r.value, pref * tail, pref * r.error, cut};
}

double kernel_eval(const KernelConfig& cfg, double t, double z_norm, double u) {
  return kernel_eval_detailed(cfg, t, z_norm, u).value;
}

double kernel_eval(const KernelConfig& cfg, double t, const GroupPoint& xi) {
  if (xi.n() != cfg.n) throw InvalidArgument("kernel_eval: point dimension differs from config");
  return kernel_eval(cfg, t, std::sqrt(xi.z_norm_sq()), xi.u());
}

double marginal_char_u(const KernelConfig& cfg, double t, double lambda) {
  cfg.validate();
  require_time(cfg, t);
  // Integrating exp(-l coth(l) |z|^2/(4t)) over R^{2n} gives (4 pi t / (l coth l))^n,
  // which against the prefactor leaves ((l/sinh l) / (l coth l))^n at l = 4 t lambda.
  const double l = 4.0 * t * lambda;
  if (std::abs(l) > 700.0) return 0.0;
  return std::pow(lambda_over_sinh(l) / lambda_coth(l), cfg.n);
}

NormalizationResult normalization(const KernelConfig& cfg, double t) {
  cfg.validate();
  require_time(cfg, t);
  const int n = cfg.n;
  // Scaled variables r = |z| / sqrt(t), v = u / t.
  const double r_max = 12.0;
  const double v_max = 72.0;
  const auto r_rule = quad::composite_by_width(0.0, r_max, 0.75, 10);
  const auto v_rule = quad::composite_by_width(0.0, v_max, 2.0, 10);
  const double sphere = 2.0 * std::pow(kPi, n) / std::tgamma(n);
  const double jac = sphere * std::pow(t, n + 1);

  double total = 0.0;
  for (std::size_t i = 0; i < r_rule.size(); ++i) {
    const double r = r_rule.nodes[i];
    double inner = 0.0;
    for (std::size_t j = 0; j < v_rule.size(); ++j) {
      inner += v_rule.weights[j] * kernel_eval(cfg, t, std::sqrt(t) * r, t * v_rule.nodes[j]);
    }
    total += r_rule.weights[i] * std::pow(r, 2 * n - 1) * 2.0 * inner;
  }
  return {jac * total, outside_bound(n, r_max, v_max)};
}

double kernel_bin_mass(const KernelConfig& cfg, double t, double z_lo, double z_hi, double u_lo,
                       double u_hi) {
  cfg.validate();
  require_time(cfg, t);
  if (!(z_lo >= 0.0) || !(z_lo <= z_hi)) throw InvalidArgument("kernel_bin_mass: bad |z| range");
  const double nd = cfg.n;
  auto zfac = [&](double l) {
    const double b = lambda_coth(l) / (4.0 * t);
    const double hi = std::isinf(z_hi) ? 1.0 : boost::math::gamma_p(nd, b * z_hi * z_hi);
    const double lo = z_lo == 0.0 ? 0.0 : boost::math::gamma_p(nd, b * z_lo * z_lo);
    return hi - lo;
  };
  return u_interval_mass(cfg, t, u_lo, u_hi, zfac);
}

double kernel_u_integral(const KernelConfig& cfg, double t, double z_norm, double u_lo, double u_hi) {
  cfg.validate();
  require_time(cfg, t);
  if (!(z_norm >= 0.0) || !std::isfinite(u_lo) || !std::isfinite(u_hi)) {
    throw InvalidArgument("kernel_u_integral: needs |z| >= 0 and finite u bounds");
  }
  if (u_lo == u_hi) return 0.0;
  const int n = cfg.n;
  const double a = z_norm * z_norm / (4.0 * t);
  const double lo = u_lo / (4.0 * t);
  const double hi = u_hi / (4.0 * t);
  const double target = cfg.rel_tol * std::exp(-a);
  double cut = cfg.lambda_cutoff;
  if (cut <= 0.0) {
    cut = 1.0;
    while (kernel_tail_bound(n, a, cut) / cut > 1e-3 * target) cut *= 1.1;
  }
  auto g = [&](double l) {
    return std::pow(lambda_over_sinh(l), n) * std::exp(-lambda_coth(l) * a) * sin_diff_over(l, lo, hi);
  };
  auto r = lambda_quadrature(g, cut, std::max(std::abs(lo), std::abs(hi)), cfg.node_count,
                             0.1 * target, cfg.max_depth);
  if (r.error > target) throw NumericalFailure("kernel_u_integral: quadrature did not converge");
  return std::pow(4.0 * kPi * t, -n) / kPi * r.value;
}

double kernel_box_mass(const KernelConfig& cfg, double t, const Box& box) {
  cfg.validate();
  require_time(cfg, t);
  if (box.size() != 2 * static_cast<std::size_t>(cfg.n) + 1) {
    throw InvalidArgument("kernel_box_mass: box dimension differs from config");
  }
  auto zfac = [&](double l) {
    const double b = lambda_coth(l) / (4.0 * t);
    double prod = 1.0;
    for (std::size_t i = 0; i + 1 < box.size(); ++i) prod *= gauss_interval(b, box[i]);
    return prod;
  };
  return u_interval_mass(cfg, t, box.back().lo, box.back().hi, zfac);
}

double kernel_norm_tail(const KernelConfig& cfg, double t, double radius) {
  cfg.validate();
  require_time(cfg, t);
  if (!(radius >= 0.0)) throw InvalidArgument("kernel_norm_tail: radius must be non-negative");
  if (radius == 0.0) return 1.0;
  const int n = cfg.n;
  const double r2 = radius * radius;
  // |xi| > R forces |z|^4 > R^4 / 2 or u^2 > R^4 / 2. Once that bound is below
  // rel_tol, it is returned in place of the value.
  const double cheap = outside_bound(n, std::sqrt(r2 / (std::sqrt(2.0) * t)), r2 / (std::sqrt(2.0) * t));
  if (cheap <= cfg.rel_tol) return cheap;
  // Inside = 2 int_0^{pi/2} R^2 cos(th) dth (1/(4 pi t)) int_0^inf sech^n(l)
  //          P(n, b R^2 cos th) cos(l R^2 sin th / (4t)) dl,  b = l coth(l)/(4t).
  const double cut = cfg.lambda_cutoff > 0.0 ? cfg.lambda_cutoff : sech_cutoff(n, cfg.rel_tol) + 10.0;
  bool failed = false;
  // The theta integrand has features of width ~ t / R^2.
  auto slice = [&](double th) {
    const double rho2 = r2 * std::cos(th);
    const double omega = r2 * std::sin(th) / (4.0 * t);
    auto g = [&](double l) {
      const double b = lambda_coth(l) / (4.0 * t);
      return sech_pow(l, n) * boost::math::gamma_p(static_cast<double>(n), b * rho2) *
             std::cos(l * omega);
    };
    auto r = lambda_quadrature(g, cut, omega, cfg.node_count, 0.1 * cfg.rel_tol, cfg.max_depth);
    if (r.error > cfg.rel_tol * 10.0) failed = true;
    return r2 * std::cos(th) * r.value;
  };
  const int panels = std::max(4, static_cast<int>(std::ceil(r2 / (2.0 * t))));
  const auto th_rule = quad::composite(0.0, kPi / 2.0, panels, 15);
  double inside = 0.0;
  for (std::size_t i = 0; i < th_rule.size(); ++i) inside += th_rule.weights[i] * slice(th_rule.nodes[i]);
  if (failed) throw NumericalFailure("kernel_norm_tail: quadrature failed");
  inside *= 2.0 / (4.0 * kPi * t);
  return std::max(0.0, 1.0 - inside);
}

BoundFit gaussian_bound_fit(const KernelConfig& cfg, const std::vector<double>& t_set,
                            const std::vector<GroupPoint>& grid, const BoundFitOptions& opt) {
  if (t_set.empty() || grid.empty()) throw InvalidArgument("gaussian_bound_fit: empty grid");
  const int n = cfg.n;
  struct Constraint {
    double q;  // p_t(xi) t^{n+1}
    double s;  // |xi|^2 / t
  };
  std::vector<Constraint> cons;
  cons.reserve(t_set.size() * grid.size());
  for (double t : t_set) {
    for (const auto& xi : grid) {
      const double p = kernel_eval(cfg, t, xi);
      const double nrm = homogeneous_norm(xi);
      cons.push_back({p * std::pow(t, n + 1), nrm * nrm / t});
    }
  }
  auto holds = [&](double M, double c) {
    for (const auto& k : cons) {
      if (c * M * std::exp(-k.s / M) < k.q) return false;
    }
    return true;
  };

  if (holds(opt.M_max, 1.0)) {
    double lo = 0.0;
    double hi = opt.M_max;
    for (int i = 0; i < opt.bisection_steps && hi - lo > 1e-15 * hi; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (mid > 0.0 && holds(mid, 1.0)) hi = mid; else lo = mid;
    }
    return {hi, 1.0};
  }
  double c = 0.0;
  for (const auto& k : cons) c = std::max(c, k.q / (opt.M_max * std::exp(-k.s / opt.M_max)));
  while (!holds(opt.M_max, c)) c = std::nextafter(c, INFINITY);
  if (c > opt.c_max) {
    throw NumericalFailure("gaussian_bound_fit: no certificate with M <= " +
                           std::to_string(opt.M_max) + " and c <= " + std::to_string(opt.c_max));
  }
  return {opt.M_max, c};
}

double gaussian_bound_margin(const KernelConfig& cfg, const BoundFit& fit,
                             const std::vector<double>& t_set, const std::vector<GroupPoint>& grid) {
  double margin = INFINITY;
  for (double t : t_set) {
    for (const auto& xi : grid) {
      const double nrm = homogeneous_norm(xi);
      const double bound = fit.c * fit.M * std::pow(t, -cfg.n - 1) * std::exp(-nrm * nrm / (fit.M * t));
      margin = std::min(margin, (bound - kernel_eval(cfg, t, xi)) / bound);
    }
  }
  return margin;
}

double truncation_radius(const BoundFit& fit, int n, double t, double tail_mass) {
  if (!(tail_mass > 0.0 && tail_mass < 1.0)) throw InvalidArgument("tail mass must lie in (0, 1)");
  // mass(|xi| > R) <= c M^{n+2} Q V_1 / 2 * Gamma(n+1, R^2 / (M t)),
  // Q = 2n+2, V_1 = |{|xi| <= 1}| = pi^n / n! * sqrt(pi) Gamma(n/2+1) / Gamma(n/2+3/2).
  const double Q = 2.0 * n + 2.0;
  const double v1 = std::pow(kPi, n) / std::tgamma(n + 1.0) * std::sqrt(kPi) * std::tgamma(n / 2.0 + 1.0) /
                    std::tgamma(n / 2.0 + 1.5);
  const double pre = fit.c * std::pow(fit.M, n + 2) * Q * v1 / 2.0;
  double s = 1.0;
  while (pre * boost::math::tgamma(n + 1.0, s) > tail_mass) s *= 1.05;
  return std::sqrt(fit.M * t * s);
}

std::vector<GroupPoint> default_bound_grid(int n, int radial_steps, int angular_steps,
                                           double extent) {
  std::vector<GroupPoint> grid;
  grid.emplace_back(n);
  const double r_max = std::sqrt(extent);
  for (int i = 1; i <= radial_steps; ++i) {
    const double r = r_max * i / radial_steps;
    for (int j = 0; j <= angular_steps; ++j) {
      // |z| = r cos(phi)^{1/2}, u = r^2 sin(phi) keeps |xi| = r.
      const double phi = 0.5 * kPi * j / angular_steps;
      std::vector<double> z(2 * n, 0.0);
      z[0] = r * std::sqrt(std::max(0.0, std::cos(phi)));
      grid.emplace_back(std::move(z), r * r * std::sin(phi));
    }
  }
  return grid;
}

const BoundFit& default_bound_fit(int n) {
  static std::mutex mu;
  static std::vector<std::pair<int, BoundFit>> cache;
  std::lock_guard lock(mu);
  for (const auto& [k, fit] : cache) {
    if (k == n) return fit;
  }
  KernelConfig cfg;
  cfg.n = n;
  cache.emplace_back(n, gaussian_bound_fit(cfg, {1.0}, default_bound_grid(n)));
  return cache.back().second;
}

double default_truncation_radius(int n, double t, double tail_mass) {
  static std::mutex mu;
  static std::map<std::pair<int, double>, double> unit_radius;
  std::lock_guard lock(mu);
  auto [it, fresh] = unit_radius.try_emplace({n, tail_mass}, 0.0);
  if (fresh) it->second = truncation_radius(default_bound_fit(n), n, 1.0, tail_mass);
  return it->second * std::sqrt(t);
}

}  // namespace hwiener
