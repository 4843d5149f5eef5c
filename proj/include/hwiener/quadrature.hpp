#pragma once

// Thin layer over Boost.Math quadrature: fixed Gauss-Legendre rules expanded
// to full node lists (for tensor-product and composite rules) and an adaptive
// Gauss-Kronrod driver with an absolute error target.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <stdexcept>
#include <vector>

namespace hwiener {

/// Raised when a deterministic quadrature cannot certify its tolerance.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace quad {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

/// Gauss-Legendre rule on [-1, 1]. Supported orders: 7, 10, 15, 20, 25, 30.
const Rule& gauss_legendre(int order);

/// Composite Gauss-Legendre rule on [a, b] with `panels` equal panels.
Rule composite(double a, double b, int panels, int order);

/// Composite rule whose panel width does not exceed `max_width`.
Rule composite_by_width(double a, double b, double max_width, int order);

/// Gauss-Legendre rule on [lo, hi] with at least `want` nodes: the smallest
/// supported order, or composite order-30 panels beyond that.
Rule at_least(double lo, double hi, double want);

/// Rule on [lo, hi] in the variable w = asinh(x / c), which compresses
/// exponential tails; `density` scales the node count (8 + 2 |dw| at 1).
Rule sinh_mapped(double lo, double hi, double c, double density);

struct Result {
  double value = 0.0;
  double error = 0.0;  // Kronrod error estimate
  double l1 = 0.0;     // integral of |f|
};

/// Single G7-K15 panel on [a, b].
template <class F>
Result kronrod15(F&& f, double a, double b) {
  Result r;
  r.value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 0, 0.0, &r.error,
                                                                          &r.l1);
  return r;
}

/// Recursive bisection with an absolute error target shared between halves.
/// Deterministic: the subdivision pattern depends only on f, a, b, abs_tol.
template <class F>
Result adaptive(F&& f, double a, double b, double abs_tol, unsigned max_depth = 20) {
  Result r = kronrod15(f, a, b);
  if (r.error <= abs_tol || max_depth == 0) return r;
  const double mid = 0.5 * (a + b);
  Result lo = adaptive(f, a, mid, 0.5 * abs_tol, max_depth - 1);
  Result hi = adaptive(f, mid, b, 0.5 * abs_tol, max_depth - 1);
  return {lo.value + hi.value, lo.error + hi.error, lo.l1 + hi.l1};
}

}  // namespace quad
}  // namespace hwiener
