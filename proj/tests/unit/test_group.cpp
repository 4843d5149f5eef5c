#include "hwiener/group.hpp"

#include "generators.hpp"

#include <doctest.h>

#include <cmath>

using namespace hwiener;
using hwtest::close;

namespace {

bool near(const GroupPoint& a, const GroupPoint& b, double tol) {
  for (std::size_t i = 0; i < a.coords().size(); ++i) {
    if (!close(a.coords()[i], b.coords()[i], tol, tol)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("product on hand-computed points") {
  const GroupPoint a({1.0, 2.0}, 3.0);
  const GroupPoint b({-0.5, 4.0}, 1.0);
  // 2 (y x' - x y') = 2 (2 * -0.5 - 1 * 4) = -10
  const GroupPoint c = multiply(a, b);
  CHECK(c.x(0) == doctest::Approx(0.5));
  CHECK(c.y(0) == doctest::Approx(6.0));
  CHECK(c.u() == doctest::Approx(-6.0));
  CHECK(homogeneous_norm(GroupPoint({3.0, 4.0}, 0.0)) == doctest::Approx(5.0));
  CHECK(homogeneous_norm(GroupPoint({0.0, 0.0}, 16.0)) == doctest::Approx(4.0));
}

TEST_CASE("group axioms hold on random points") {
  hwtest::Gen g(11);
  for (int k = 0; k < hwtest::kDraws; ++k) {
    const int n = g.integer(1, 3);
    const GroupPoint a = g.point(n), b = g.point(n), c = g.point(n);
    CHECK(near(multiply(multiply(a, b), c), multiply(a, multiply(b, c)), 1e-12));
    CHECK(multiply(a, inverse(a)).is_identity());
    CHECK(multiply(inverse(a), a).is_identity());
    CHECK(near(multiply(a, GroupPoint(n)), a, 0.0));
  }
}

TEST_CASE("norm is homogeneous, symmetric and subadditive") {
  hwtest::Gen g(12);
  for (int k = 0; k < hwtest::kDraws; ++k) {
    const int n = g.integer(1, 3);
    const GroupPoint a = g.point(n), b = g.point(n);
    const double r = g.log_uniform(1e-2, 1e2);
    CHECK(close(homogeneous_norm(dilate(r, a)), r * homogeneous_norm(a), 1e-12));
    CHECK(close(homogeneous_norm(inverse(a)), homogeneous_norm(a), 1e-14));
    CHECK(homogeneous_norm(multiply(a, b)) <= (homogeneous_norm(a) + homogeneous_norm(b)) * (1 + 1e-12));
  }
}

TEST_CASE("distance is left invariant, right distance is right invariant") {
  hwtest::Gen g(13);
  for (int k = 0; k < hwtest::kDraws; ++k) {
    const int n = g.integer(1, 2);
    const GroupPoint a = g.point(n), b = g.point(n), h = g.point(n);
    CHECK(close(distance(multiply(h, a), multiply(h, b)), distance(a, b), 1e-9, 1e-12));
    CHECK(close(distance_right(multiply(a, h), multiply(b, h)), distance_right(a, b), 1e-9, 1e-12));
    CHECK(close(distance(a, b), distance(b, a), 1e-12, 1e-14));
  }
}

TEST_CASE("dilation is a homomorphism") {
  hwtest::Gen g(14);
  for (int k = 0; k < hwtest::kDraws; ++k) {
    const GroupPoint a = g.point(2), b = g.point(2);
    const double r = g.log_uniform(0.1, 10.0);
    CHECK(near(dilate(r, multiply(a, b)), multiply(dilate(r, a), dilate(r, b)), 1e-10));
  }
}

TEST_CASE("flat kernels agree with the point API") {
  hwtest::Gen g(15);
  for (int k = 0; k < 50; ++k) {
    const GroupPoint a = g.point(2), b = g.point(2);
    GroupPoint out(2);
    raw::left_quotient(a.coords(), b.coords(), out.coords_mut());
    CHECK(near(out, multiply(inverse(a), b), 1e-12));
  }
}

TEST_CASE("invalid input is rejected") {
  CHECK_THROWS_AS(GroupPoint(0), InvalidArgument);
  CHECK_THROWS_AS(dilate(-1.0, GroupPoint(1)), InvalidArgument);
  CHECK_THROWS_AS(multiply(GroupPoint(1), GroupPoint(2)), InvalidArgument);
}
