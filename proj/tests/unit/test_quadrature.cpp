#include "hwiener/quadrature.hpp"

#include "generators.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace hwiener;

namespace {

double apply(const quad::Rule& r, auto&& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) s += r.weights[i] * f(r.nodes[i]);
  return s;
}

}  // namespace

TEST_CASE("Gauss-Legendre rules integrate polynomials of degree 2k-1 exactly") {
  for (int order : {7, 10, 15, 20, 25, 30}) {
    const auto& r = quad::gauss_legendre(order);
    REQUIRE(r.size() == static_cast<std::size_t>(order));
    for (int deg = 0; deg < 2 * order; ++deg) {
      const double exact = deg % 2 == 1 ? 0.0 : 2.0 / (deg + 1);
      CHECK(apply(r, [&](double x) { return std::pow(x, deg); }) == doctest::Approx(exact).epsilon(1e-13));
    }
  }
  CHECK_THROWS_AS(quad::gauss_legendre(8), std::invalid_argument);
}

TEST_CASE("composite and sized rules cover their interval") {
  hwtest::Gen g(21);
  for (int k = 0; k < 50; ++k) {
    const double lo = g.uniform(-5, 5), hi = lo + g.log_uniform(1e-3, 20);
    const double want = g.uniform(1, 200);
    const auto a = quad::at_least(lo, hi, want);
    CHECK(static_cast<double>(a.size()) >= want);
    CHECK(apply(a, [](double) { return 1.0; }) == doctest::Approx(hi - lo).epsilon(1e-13));
    const auto c = quad::composite(lo, hi, g.integer(1, 9), 10);
    CHECK(apply(c, [](double x) { return x * x; }) ==
          doctest::Approx((hi * hi * hi - lo * lo * lo) / 3).epsilon(1e-12));
    // peaked on scale c at the origin with algebraic tails
    const double cw = g.log_uniform(0.01, 1.0);
    const auto s = quad::sinh_mapped(lo, hi, cw, 1.0);
    CHECK(apply(s, [&](double x) { return cw / (cw * cw + x * x); }) ==
          doctest::Approx(std::atan(hi / cw) - std::atan(lo / cw)).epsilon(1e-8));
  }
}

TEST_CASE("adaptive driver meets its absolute target") {
  const auto r = quad::adaptive([](double x) { return std::exp(-x * x); }, -8.0, 8.0, 1e-13);
  CHECK(r.value == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-13));
  const auto osc = quad::adaptive([](double x) { return std::cos(40 * x); }, 0.0, 1.0, 1e-12);
  CHECK(std::abs(osc.value - std::sin(40.0) / 40.0) < 1e-11);
}
