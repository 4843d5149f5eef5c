#include "hwiener/holder.hpp"

#include "generators.hpp"

#include <doctest.h>

#include <cmath>

using namespace hwiener;

TEST_CASE("chain constant") {
  const HolderSpec s{1.5, 0.25, 6};
  CHECK(s.chain_constant() == doctest::Approx(3.0 / (1 - std::pow(2.0, -0.25))));
  CHECK_THROWS_AS((HolderSpec{1.0, 0.5, 6}).validate(), InvalidArgument);
  CHECK_THROWS_AS((HolderSpec{0.0, 0.3, 6}).validate(), InvalidArgument);
  CHECK_THROWS_AS((HolderSpec{1.0, 0.3, 0}).validate(), InvalidArgument);
}

TEST_CASE("extremal path saturates the hypothesis and stays within the constant") {
  for (double r : {0.1, 0.25, 0.4, 0.49}) {
    for (int depth : {1, 4, 8, 10}) {
      const HolderSpec s{2.0, r, depth};
      const auto p = extremal_path(1, s);
      CHECK(dyadic_a_star(p, r, depth) == doctest::Approx(2.0).epsilon(1e-12));
      const auto cert = dyadic_to_holder(p, s);
      CHECK(cert.hypothesis_holds);
      CHECK(cert.conclusion_violations == 0);
      CHECK(cert.max_ratio <= s.chain_constant());
      CHECK(cert.max_chain_ratio <= s.chain_constant() * (1 + 1e-12));
    }
  }
}

TEST_CASE("sampled paths satisfy the conclusion at their own a*") {
  hwtest::Gen g(61);
  for (int k = 0; k < 40; ++k) {
    const int depth = g.integer(2, 8);
    const double r = g.uniform(0.05, 0.45);
    const auto p = sample_path(g.integer(1, 2), PathGrid::dyadic(depth, 2), path_stream(61, k));
    const double a = dyadic_a_star(p, r, depth);
    const HolderSpec s{a, r, depth};
    const auto cert = dyadic_to_holder(p, s);
    CHECK(cert.hypothesis_holds);
    CHECK(cert.conclusion_violations == 0);
    CHECK(cert.pairs_checked == (std::uint64_t{1} << depth) * ((std::uint64_t{1} << depth) + 1) / 2);
    // just below a* the hypothesis fails
    CHECK_FALSE(dyadic_to_holder(p, HolderSpec{a * 0.999, r, depth}).hypothesis_holds);
  }
}

TEST_CASE("non-dyadic grids are rejected") {
  const auto p = sample_path(1, PathGrid::uniform(1.0, 6, 1), path_stream(1, 0));
  CHECK_THROWS_AS(dyadic_to_holder(p, HolderSpec{1.0, 0.3, 3}), InvalidArgument);
}

TEST_CASE("tail curve is non-increasing in a and non-decreasing in depth") {
  const std::vector<double> as{1.0, 2.0, 3.0, 4.0};
  const auto shallow = holder_tail_curve(0.4, 4, as, 2000, 62);
  const auto deep = holder_tail_curve(0.4, 7, as, 2000, 62);
  for (std::size_t i = 0; i < as.size(); ++i) {
    if (i > 0) CHECK(shallow[i].value <= shallow[i - 1].value);
    if (i > 0) CHECK(deep[i].value <= deep[i - 1].value);
    CHECK(deep[i].value >= shallow[i].value);
  }
  CHECK(holder_tail(HolderSpec{3.0, 0.4, 7}, 2000, 62).value == deep[2].value);
}

TEST_CASE("union bound dominates the sampled tail") {
  KernelConfig c;
  const auto est = holder_tail_curve(0.4, 8, {4.0, 5.0}, 4000, 63);
  CHECK(est[0].value <= holder_union_bound(c, 0.4, 8, 4.0) + 3 * est[0].stderr_);
  CHECK(est[1].value <= holder_union_bound(c, 0.4, 8, 5.0) + 3 * est[1].stderr_ + 1e-3);
  CHECK(holder_union_bound(c, 0.4, 8, 6.0) < holder_union_bound(c, 0.4, 8, 4.0));
}
