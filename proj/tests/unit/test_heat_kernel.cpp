#include "hwiener/heat_kernel.hpp"
#include "hwiener/kernel_table.hpp"

#include "generators.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace hwiener;
using hwtest::close;

TEST_CASE("origin values match closed forms") {
  KernelConfig c1;
  CHECK(kernel_eval(c1, 1.0, 0.0, 0.0) == doctest::Approx(1.0 / 64.0).epsilon(1e-12));
  KernelConfig c2;
  c2.n = 2;
  CHECK(kernel_eval(c2, 1.0, 0.0, 0.0) == doctest::Approx(1.0 / (384.0 * std::numbers::pi)).epsilon(1e-12));
  KernelConfig c3;
  c3.n = 3;
  // frozen from an independent 40-digit evaluation of the lambda-integral
  CHECK(kernel_eval(c3, 1.0, 0.0, 0.0) == doctest::Approx(5.269878020216144e-05).epsilon(1e-10));
}

TEST_CASE("frozen kernel values") {
  KernelConfig c;
  CHECK(kernel_eval(c, 1.0, 0.0, 0.5) == doctest::Approx(0.015037758329731631).epsilon(1e-10));
  CHECK(kernel_eval(c, 1.0, 1.0, 0.5) == doctest::Approx(0.009602639112242064).epsilon(1e-10));
  CHECK(kernel_eval(c, 2.0, 1.0, 0.5) == doctest::Approx(0.003050605249454579).epsilon(1e-10));
}

TEST_CASE("parabolic scaling on random points") {
  hwtest::Gen g(31);
  for (int k = 0; k < 40; ++k) {
    KernelConfig c;
    c.n = g.integer(1, 2);
    const double t = g.log_uniform(0.1, 10.0);
    const double z = g.uniform(0.0, 2.5), u = g.uniform(-4.0, 4.0);
    const double lhs = kernel_eval(c, t, z * std::sqrt(t), u * t);
    const double rhs = std::pow(t, -c.n - 1.0) * kernel_eval(c, 1.0, z, u);
    CHECK(close(lhs, rhs, 1e-8, 1e-12 * kernel_eval(c, t, 0.0, 0.0)));
  }
}

TEST_CASE("kernel is even in u and rotation invariant in z") {
  hwtest::Gen g(32);
  KernelConfig c;
  for (int k = 0; k < 30; ++k) {
    const double t = g.log_uniform(0.2, 5.0), x = g.uniform(-2, 2), y = g.uniform(-2, 2), u = g.uniform(-3, 3);
    const double a = kernel_eval(c, t, GroupPoint({x, y}, u));
    CHECK(close(a, kernel_eval(c, t, GroupPoint({x, y}, -u)), 1e-12, 1e-15));
    CHECK(close(a, kernel_eval(c, t, GroupPoint({-y, x}, u)), 1e-12, 1e-15));
    CHECK(close(a, kernel_eval(c, t, std::hypot(x, y), u), 1e-12, 1e-15));
  }
}

TEST_CASE("u-marginal characteristic function is sech^n") {
  for (int n : {1, 2, 3}) {
    KernelConfig c;
    c.n = n;
    for (double l : {0.0, 0.1, 0.3, 1.0}) {
      CHECK(marginal_char_u(c, 0.7, l) == doctest::Approx(std::pow(1.0 / std::cosh(2.8 * l), n)));
    }
  }
}

TEST_CASE("bin masses match the chi-square law of |z|") {
  KernelConfig c;
  hwtest::Gen g(33);
  for (int k = 0; k < 10; ++k) {
    const double t = g.log_uniform(0.2, 4.0), r = g.uniform(0.1, 4.0) * std::sqrt(t);
    const double inf = std::numeric_limits<double>::infinity();
    CHECK(kernel_bin_mass(c, t, 0.0, r, -inf, inf) == doctest::Approx(1 - std::exp(-r * r / (4 * t))).epsilon(1e-8));
  }
  const double inf = std::numeric_limits<double>::infinity();
  // halves in u by symmetry
  CHECK(kernel_bin_mass(c, 1.0, 0.0, inf, 0.0, inf) == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(kernel_bin_mass(c, 1.0, 0.0, inf, -inf, inf) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("normalization and norm tail") {
  KernelConfig c;
  const auto nr = normalization(c, 1.0);
  CHECK(std::abs(nr.value - 1.0) < 1e-6);
  CHECK(kernel_norm_tail(c, 1.0, 0.0) == doctest::Approx(1.0));
  double prev = 1.0;
  for (double R : {1.0, 2.0, 4.0, 6.0, 8.0}) {
    const double tail = kernel_norm_tail(c, 1.0, R);
    CHECK(tail <= prev);
    prev = tail;
  }
  // scaling: |x(t)| has the law of sqrt(t) |x(1)|
  CHECK(kernel_norm_tail(c, 4.0, 6.0) == doctest::Approx(kernel_norm_tail(c, 1.0, 3.0)).epsilon(1e-6));
}

TEST_CASE("kernel_u_integral matches a direct integral of the density") {
  KernelConfig c;
  const double t = 0.8, z = 0.6;
  const auto r = quad::adaptive([&](double v) { return kernel_eval(c, t, z, v); }, -0.5, 1.5, 1e-12);
  CHECK(kernel_u_integral(c, t, z, -0.5, 1.5) == doctest::Approx(r.value).epsilon(1e-8));
}

TEST_CASE("Gaussian upper bound holds on its grid and truncation radius grows with t") {
  KernelConfig c;
  const auto& fit = default_bound_fit(1);
  CHECK(fit.M > 0);
  const auto grid = default_bound_grid(1, 10, 5, 50.0);
  CHECK(gaussian_bound_margin(c, fit, {0.5, 1.0, 2.0}, grid) >= 0.0);
  CHECK(default_truncation_radius(1, 4.0) == doctest::Approx(2.0 * default_truncation_radius(1, 1.0)));
}

TEST_CASE("table agrees with direct evaluation and its own bound") {
  const auto& tab = KernelTable::shared(1);
  KernelConfig c;
  hwtest::Gen g(34);
  for (int k = 0; k < 60; ++k) {
    const double t = g.log_uniform(0.1, 4.0);
    const double z = g.uniform(0.0, 3.0) * std::sqrt(t), u = g.uniform(-8.0, 8.0) * t;
    const double direct = kernel_eval(c, t, z, u);
    const double scale = kernel_eval(c, t, 0.0, 0.0);
    CHECK(close(tab.density(t, z, u), direct, 5e-5, 1e-9 * scale));
    CHECK(tab.upper_bound(t, z, u) >= direct * (1 - 1e-9));
  }
  CHECK(tab.u_cdf(1.0, 0.5, std::numeric_limits<double>::infinity()) ==
        doctest::Approx(tab.z_marginal(1.0, 0.5)).epsilon(1e-8));
}

TEST_CASE("invalid kernel input is rejected") {
  KernelConfig c;
  CHECK_THROWS_AS(kernel_eval(c, -1.0, 0.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(kernel_eval(c, 1.0, -1.0, 0.0), InvalidArgument);
  c.n = 0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
}

TEST_CASE("semigroup residual: zero at matched times, detected when times mismatch") {
  KernelConfig c;
  SemigroupOptions o;
  o.substeps = 200;
  for (const auto& xi : {GroupPoint(1), GroupPoint({1.0, 0.0}, 1.0)}) {
    const auto ok = semigroup_residual(c, 0.5, 0.5, xi, 20'000, 35, o);
    CHECK(std::abs(ok.z_score) < 4.0);
    o.reference_shift = 0.5;
    const auto off = semigroup_residual(c, 0.5, 0.5, xi, 20'000, 35, o);
    CHECK(std::abs(off.z_score) > 10.0);
    o.reference_shift = 0.0;
  }
}
