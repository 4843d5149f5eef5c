#include "hwiener/feynman_kac.hpp"

#include "generators.hpp"

#include <doctest.h>

#include <cmath>

using namespace hwiener;

TEST_CASE("tabulated potential reproduces affine functions exactly") {
  hwtest::Gen g(71);
  const double c0 = 0.3, c1 = -0.2, c2 = 0.7, c3 = 1.1;
  std::vector<double> values;
  const std::vector<double> lo{-2, -2, -3}, step{0.5, 1.0, 0.75};
  const std::vector<int> count{9, 5, 9};
  for (int i = 0; i < count[0]; ++i)
    for (int j = 0; j < count[1]; ++j)
      for (int k = 0; k < count[2]; ++k)
        values.push_back(c0 + c1 * (lo[0] + i * step[0]) + c2 * (lo[1] + j * step[1]) + c3 * (lo[2] + k * step[2]));
  const auto V = Potential::tabulated(lo, step, count, values);
  V.validate(1);
  for (int k = 0; k < hwtest::kDraws; ++k) {
    const std::vector<double> p{g.uniform(-2, 2), g.uniform(-2, 2), g.uniform(-3, 3)};
    CHECK(V(p) == doctest::Approx(c0 + c1 * p[0] + c2 * p[1] + c3 * p[2]).epsilon(1e-12));
    CHECK(V(p) >= V.lower_bound() - 1e-12);
  }
  // clamped outside the grid
  const std::vector<double> far{10, 0, 0}, edge{2, 0, 0};
  CHECK(V(far) == doctest::Approx(V(edge)));
}

TEST_CASE("potential and initial data validation") {
  CHECK_THROWS_AS(Potential::quadratic_radial(-1.0, 0.0).validate(1), InvalidArgument);
  CHECK_THROWS_AS(Potential::tabulated({0, 0, 0}, {1, 1, 1}, {2, 2, 2}, {1, 2}).validate(1), InvalidArgument);
  CHECK_THROWS_AS(InitialData::gaussian_bump({0, 0}, 1.0).validate(1), InvalidArgument);
  CHECK_THROWS_AS(InitialData::gaussian_bump({0, 0, 0}, -1.0).validate(1), InvalidArgument);
  CHECK(Potential::quadratic_radial(0.5, -0.25).lower_bound() == -0.25);
}

TEST_CASE("initial data values") {
  const auto bump = InitialData::gaussian_bump({1, 0, 0}, 0.5, 2.0);
  const std::vector<double> at{1, 0, 0}, off{1, 0, 0.5};
  CHECK(bump(at) == doctest::Approx(2.0));
  CHECK(bump(off) == doctest::Approx(2.0 * std::exp(-0.5)));
  CHECK(bump.sup_bound() == 2.0);
  const auto ind = InitialData::indicator_box(Box{{0, 1}, {0, 1}, {0, 1}}, 3.0);
  const std::vector<double> in{0.5, 0.5, 0.5}, out{0.5, 0.5, 1.5};
  CHECK(ind(in) == 3.0);
  CHECK(ind(out) == 0.0);
}

TEST_CASE("constant data and constant potential are exact with zero spread") {
  hwtest::Gen g(72);
  for (int k = 0; k < 5; ++k) {
    const double c = g.uniform(0, 2), t = g.uniform(0.1, 2), a = g.uniform(0.5, 3);
    FKOptions o;
    o.substeps = 20;
    const auto e = fk_solve(t, g.point(1), InitialData::constant(a), Potential::constant(c), 500, 72, o);
    CHECK(e.value == doctest::Approx(a * std::exp(-c * t)).epsilon(1e-12));
    CHECK(e.stderr_ < 1e-12);
  }
}

TEST_CASE("weight integral of a constant potential is value times horizon") {
  const auto p = sample_path(1, PathGrid::uniform(0.8, 4, 5), path_stream(3, 0));
  CHECK(weight_integral(p, Potential::constant(1.5), GroupPoint(1)) == doctest::Approx(1.2));
}

TEST_CASE("constant potential factors out of the estimate on common paths") {
  FKOptions o;
  o.substeps = 50;
  const GroupPoint xi({0.2, -0.1}, 0.3);
  const auto f = InitialData::gaussian_bump({0.5, 0, 0.2}, 0.7);
  const auto free = fk_solve(0.5, xi, f, Potential::constant(0.0), 4000, 73, o);
  const auto damped = fk_solve(0.5, xi, f, Potential::constant(0.8), 4000, 73, o);
  CHECK(damped.value == doctest::Approx(free.value * std::exp(-0.4)).epsilon(1e-12));
}

TEST_CASE("larger potentials give smaller solutions on common paths") {
  FKOptions o;
  o.substeps = 50;
  const GroupPoint xi(1);
  const auto f = InitialData::constant(1.0);
  const auto small = fk_solve(1.0, xi, f, Potential::quadratic_radial(0.1, 0.0), 2000, 74, o);
  const auto large = fk_solve(1.0, xi, f, Potential::quadratic_radial(0.3, 0.0), 2000, 74, o);
  CHECK(large.value < small.value);
  CHECK(small.value < 1.0);
}

TEST_CASE("heat reference integrates constants and indicators") {
  KernelConfig c;
  const auto one = heat_reference(1.0, GroupPoint(1), InitialData::constant(1.0), c);
  CHECK(one.value == doctest::Approx(1.0).epsilon(1e-5));
  const Box b{{-1, 1}, {-1, 1}, {-1, 1}};
  const auto ind = heat_reference(0.6, GroupPoint(1), InitialData::indicator_box(b), c);
  CHECK(ind.value == doctest::Approx(kernel_box_mass(c, 0.6, b)).epsilon(1e-4));
}

TEST_CASE("fk_solve agrees with the heat reference at small scale") {
  KernelConfig c;
  const GroupPoint xi({0.2, -0.1}, 0.3);
  const auto f = InitialData::gaussian_bump({0.5, 0, 0.2}, 0.7);
  FKOptions o;
  o.substeps = 100;
  const auto e = fk_solve(0.5, xi, f, Potential::constant(0.0), 20'000, 75, o);
  const auto ref = heat_reference(0.5, xi, f, c);
  CHECK(std::abs(e.value - ref.value) < 4 * e.stderr_ + ref.error);
}

TEST_CASE("density histogram carries total mass one without a potential") {
  DensityGrid grid{{0, 1, 2, 3, 1e3}, {-1e3, -2, 0, 2, 1e3}};
  DensityOptions o;
  o.substeps = 50;
  const auto d = fk_kernel_density(1.0, Potential::constant(0.0), grid, 5000, 76, o);
  CHECK(d.total_mass == doctest::Approx(1.0));
  double sum = 0.0;
  for (double m : d.mass) sum += m;
  CHECK(sum == doctest::Approx(1.0));
  CHECK(grid.volume(1, 0, 1) == doctest::Approx(3.14159265358979 * 2.0));
  CHECK_THROWS_AS((DensityGrid{{1, 0}, {0, 1}}).validate(), InvalidArgument);
}

TEST_CASE("identity checks are consistent at small scale") {
  BoxCheckOptions o;
  o.substeps = 50;
  const GroupPoint xi({0.3, 0.1}, -0.2);
  const auto m = markov_check(0.4, 1.0, xi, PathFunctional::one(), 20'000, 77, o);
  CHECK(std::abs(m.z_score) < 4.0);
  const auto s = symmetry_check(0.5, GroupPoint({1, 0}, 0), GroupPoint({0, 1}, 0),
                                Potential::quadratic_radial(0.3, 0.0), 20'000, 78, o);
  CHECK(std::abs(s.z_score) < 4.0);
}

TEST_CASE("solution decays along a ray away from the data") {
  KernelConfig c;
  const auto f = InitialData::gaussian_bump({0, 0, 0}, 0.5);
  double prev = heat_reference(0.5, GroupPoint(1), f, c).value;
  for (double r : {1.0, 2.0, 4.0, 8.0}) {
    const double v = heat_reference(0.5, GroupPoint({r, 0.0}, r), f, c).value;
    CHECK(v < prev);
    prev = v;
  }
  CHECK(prev < 1e-6);
}
