#include "hwiener/parallel.hpp"
#include "hwiener/sampler.hpp"

#include "generators.hpp"

#include <doctest.h>

#include <cmath>

using namespace hwiener;
using hwtest::close;

TEST_CASE("paths are a pure function of (seed, path index)") {
  const PathGrid grid = PathGrid::uniform(1.0, 4, 25);
  const auto a = sample_path(2, grid, path_stream(7, 3));
  const auto b = sample_path(2, grid, path_stream(7, 3));
  const auto c = sample_path(2, grid, path_stream(7, 4));
  CHECK(a.coords == b.coords);
  CHECK(a.coords != c.coords);
  CHECK(a.point(0).is_identity());
}

TEST_CASE("each substep is an exact group product with a horizontal increment") {
  hwtest::Gen g(41);
  for (int k = 0; k < 20; ++k) {
    const int n = g.integer(1, 3);
    const PathGrid grid = PathGrid::uniform(g.uniform(0.1, 2.0), 1, g.integer(2, 30));
    std::vector<std::vector<double>> states;
    walk_path(
        n, grid, path_stream(41, k),
        [&](double, std::span<const double> x) { states.emplace_back(x.begin(), x.end()); },
        [](std::size_t, std::span<const double>) {});
    for (std::size_t s = 1; s < states.size(); ++s) {
      const auto a = GroupPoint::from_coords(states[s - 1]);
      const auto b = GroupPoint::from_coords(states[s]);
      const auto step = multiply(inverse(a), b);
      CHECK(std::abs(step.u()) < 1e-12 * (1 + std::abs(a.u()) + std::abs(b.u())));
    }
  }
}

TEST_CASE("increments compose and reversal is an involution") {
  hwtest::Gen g(42);
  for (int k = 0; k < 30; ++k) {
    const PathGrid grid = PathGrid::uniform(1.0, 8, 4);
    const auto p = sample_path(1, grid, path_stream(42, k));
    const std::size_t i = g.integer(0, 3), j = g.integer(4, 8);
    const auto via = multiply(increment(p, 0, i), increment(p, i, j));
    const auto direct = increment(p, 0, j);
    for (std::size_t c = 0; c < 3; ++c) CHECK(close(via.coords()[c], direct.coords()[c], 1e-10, 1e-12));
    const auto back = time_reverse(time_reverse(p));
    for (std::size_t c = 0; c < p.coords.size(); ++c) CHECK(close(back.coords[c], p.coords[c], 1e-10, 1e-12));
  }
}

TEST_CASE("coarsened paths share the Brownian motion of the fine path") {
  const PathGrid grid = PathGrid::uniform(1.0, 2, 8);
  const auto fine = sample_path(1, grid, path_stream(9, 0));
  const auto coarse = sample_path(1, grid, path_stream(9, 0), 2);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    CHECK(fine.at(k)[0] == doctest::Approx(coarse.at(k)[0]).epsilon(1e-13));
    CHECK(fine.at(k)[1] == doctest::Approx(coarse.at(k)[1]).epsilon(1e-13));
  }
  CHECK_THROWS_AS(sample_path(1, grid, path_stream(9, 0), 3), InvalidArgument);
}

TEST_CASE("translation multiplies every point on the left") {
  const PathGrid grid = PathGrid::uniform(1.0, 3, 5);
  const auto p = sample_path(1, grid, path_stream(5, 1));
  const GroupPoint g({0.3, -1.1}, 0.7);
  const auto q = translate_path(g, p);
  for (std::size_t k = 0; k < p.size(); ++k) {
    const auto expect = multiply(g, p.point(k));
    for (std::size_t c = 0; c < 3; ++c) CHECK(q.at(k)[c] == doctest::Approx(expect.coords()[c]));
  }
}

TEST_CASE("moment estimates are within five standard errors at small scale") {
  const auto m = endpoint_moments(1, 1.0, 200, 20'000, 3, {0.25});
  CHECK(std::abs(m.z_sq - 4.0) < 5 * m.z_sq_stderr);
  // the polygonal path loses a 1/N share of Var u
  CHECK(std::abs(m.u_var - 16.0 * (1 - 1.0 / 200)) < 5 * m.u_var_stderr);
  CHECK(std::abs(m.cos_mean[0] - 1 / std::cosh(1.0)) < 5 * m.cos_stderr[0]);
}

TEST_CASE("reduction is independent of the worker count") {
  auto run = [](unsigned workers) {
    return reduce_blocks<RunningStats>(
        50'000, workers,
        [](std::uint64_t b, std::uint64_t e) {
          RunningStats s;
          for (auto i = b; i < e; ++i) {
            auto eng = make_engine({99, i});
            s.add(static_cast<double>(eng() >> 11) * 0x1.0p-53);
          }
          return s;
        },
        [](RunningStats& acc, const RunningStats& p) { acc.merge(p); }, RunningStats{}, 1000);
  };
  const auto one = run(1), four = run(4), many = run(7);
  CHECK(one.mean == four.mean);
  CHECK(one.m2 == four.m2);
  CHECK(one.mean == many.mean);
  CHECK(one.mean == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("merged statistics equal sequential statistics") {
  hwtest::Gen g(43);
  for (int k = 0; k < 50; ++k) {
    RunningStats all, a, b;
    const int na = g.integer(0, 30), nb = g.integer(0, 30);
    for (int i = 0; i < na + nb; ++i) {
      const double v = g.uniform(-5, 5);
      all.add(v);
      (i < na ? a : b).add(v);
    }
    a.merge(b);
    CHECK(a.count == all.count);
    CHECK(close(a.mean, all.mean, 1e-12, 1e-12));
    CHECK(close(a.m2, all.m2, 1e-10, 1e-10));
  }
}

TEST_CASE("engine seeding separates streams") {
  CHECK(make_engine({1, 0})() != make_engine({1, 1})());
  CHECK(make_engine({1, 0})() != make_engine({2, 0})());
  CHECK(make_engine({1, 5})() == make_engine({1, 5})());
}
