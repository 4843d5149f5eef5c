#include "hwiener/kernel_table.hpp"
#include "hwiener/measure.hpp"

#include "generators.hpp"

#include <doctest.h>

#include <cmath>

using namespace hwiener;

namespace {

const double inf = std::numeric_limits<double>::infinity();

CylinderSet one_slice(double t, Box b) { return {1, {t}, {std::move(b)}}; }

}  // namespace

TEST_CASE("whole-space cylinders have measure one") {
  KernelConfig c;
  const auto q = cylinder_measure_quadrature(c, one_slice(1.0, whole_space(1)));
  CHECK(q.value == doctest::Approx(1.0).epsilon(1e-5));
  const auto mc = cylinder_measure_mc(one_slice(1.0, whole_space(1)), 1000, 1);
  CHECK(mc.value == 1.0);
  CHECK(mc.stderr_ == 0.0);
}

TEST_CASE("single-slice quadrature matches the kernel box mass") {
  KernelConfig c;
  const Box b{{-1, 1}, {-0.5, 2}, {-1, 3}};
  const double direct = kernel_box_mass(c, 0.7, b);
  const auto q = cylinder_measure_quadrature(c, one_slice(0.7, b));
  CHECK(q.value == doctest::Approx(direct).epsilon(1e-4));
  CHECK(q.error < 1e-4);
}

TEST_CASE("translated box mass at the identity equals the box mass") {
  const auto& tab = KernelTable::shared(1);
  KernelConfig c;
  hwtest::Gen g(51);
  for (int k = 0; k < 5; ++k) {
    const double t = g.uniform(0.3, 1.5);
    const Box b{{g.uniform(-2, 0), g.uniform(0.1, 2)}, {g.uniform(-2, 0), g.uniform(0.1, 2)},
                {g.uniform(-2, 0), g.uniform(0.1, 2)}};
    const std::vector<double> origin{0, 0, 0};
    CHECK(translated_box_mass(tab, t, origin, b) == doctest::Approx(kernel_box_mass(c, t, b)).epsilon(1e-4));
  }
}

TEST_CASE("central translation shifts the box in u") {
  const auto& tab = KernelTable::shared(1);
  KernelConfig c;
  hwtest::Gen g(53);
  for (int k = 0; k < 5; ++k) {
    const double t = g.uniform(0.3, 1.5), shift = g.uniform(-2, 2);
    const Box b{{-1, 1.5}, {-0.7, 0.7}, {g.uniform(-2, 0), g.uniform(0.1, 2)}};
    Box moved = b;
    moved[2] = {b[2].lo - shift, b[2].hi - shift};
    const std::vector<double> eta{0, 0, shift};
    CHECK(translated_box_mass(tab, t, eta, b) == doctest::Approx(kernel_box_mass(c, t, moved)).epsilon(1e-4));
  }
}

TEST_CASE("insert_slice adds an unconstrained slice in time order") {
  const CylinderSet I{1, {0.5, 1.0}, {Box{{-1, 1}, {-1, 1}, {-1, 1}}, whole_space(1)}};
  const auto J = insert_slice(I, 0.75);
  REQUIRE(J.times.size() == 3);
  CHECK(J.times[1] == 0.75);
  CHECK(box_is_all(J.boxes[1]));
  CHECK_THROWS_AS(insert_slice(I, 0.5), InvalidArgument);
  CHECK_THROWS_AS(insert_slice(I, -1.0), InvalidArgument);
}

TEST_CASE("Monte Carlo cylinder estimates respect inclusion on common paths") {
  hwtest::Gen g(52);
  for (int k = 0; k < 5; ++k) {
    const double h = g.uniform(0.3, 2.0);
    const CylinderSet small{1, {0.5, 1.0}, {Box{{-h, h}, {-h, h}, {-inf, inf}}, Box{{-inf, inf}, {-inf, inf}, {0, inf}}}};
    CylinderSet big = small;
    big.boxes[0][0].hi += 0.5;
    const auto est = cylinder_measure_mc_batch({small, big}, 2000, 52 + k);
    CHECK(est[0].value <= est[1].value);
  }
}

TEST_CASE("cylinder membership") {
  const CylinderSet I{1, {0.5}, {Box{{0, 1}, {0, 1}, {-inf, 0}}}};
  const std::vector<double> in{0.5, 0.5, -1}, out{0.5, 0.5, 1};
  std::vector<std::span<const double>> vin{in}, vout{out};
  CHECK(cylinder_contains(I, vin));
  CHECK_FALSE(cylinder_contains(I, vout));
}

TEST_CASE("malformed cylinders are rejected") {
  CHECK_THROWS_AS((CylinderSet{1, {}, {}}).validate(), InvalidArgument);
  CHECK_THROWS_AS((CylinderSet{1, {1.0, 0.5}, {whole_space(1), whole_space(1)}}).validate(), InvalidArgument);
  CHECK_THROWS_AS((CylinderSet{1, {0.5}, {whole_space(2)}}).validate(), InvalidArgument);
  CHECK_THROWS_AS((CylinderSet{1, {0.5}, {Box{{1, 0}, {0, 1}, {0, 1}}}}).validate(), InvalidArgument);
}
