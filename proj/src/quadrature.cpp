#include "hwiener/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace hwiener::quad {

namespace {

template <unsigned N>
Rule expand() {
  using G = boost::math::quadrature::gauss<double, N>;
  const auto& x = G::abscissa();
  const auto& w = G::weights();
  Rule r;
  // Boost stores the non-negative half; odd orders carry the node at 0 first.
  const bool odd = (N % 2) == 1;
  for (std::size_t i = x.size(); i-- > 0;) {
    if (odd && i == 0) continue;
    r.nodes.push_back(-x[i]);
    r.weights.push_back(w[i]);
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    r.nodes.push_back(x[i]);
    r.weights.push_back(w[i]);
  }
  return r;
}

}  // namespace

const Rule& gauss_legendre(int order) {
  static const Rule r7 = expand<7>();
  static const Rule r10 = expand<10>();
  static const Rule r15 = expand<15>();
  static const Rule r20 = expand<20>();
  static const Rule r25 = expand<25>();
  static const Rule r30 = expand<30>();
  switch (order) {
    case 7: return r7;
    case 10: return r10;
    case 15: return r15;
    case 20: return r20;
    case 25: return r25;
    case 30: return r30;
    default: throw std::invalid_argument("unsupported Gauss-Legendre order " + std::to_string(order));
  }
}

Rule composite(double a, double b, int panels, int order) {
  if (panels < 1) throw std::invalid_argument("composite rule needs at least one panel");
  const Rule& g = gauss_legendre(order);
  Rule r;
  r.nodes.reserve(g.size() * panels);
  r.weights.reserve(g.size() * panels);
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    const double mid = lo + 0.5 * h;
    for (std::size_t i = 0; i < g.size(); ++i) {
      r.nodes.push_back(mid + 0.5 * h * g.nodes[i]);
      r.weights.push_back(0.5 * h * g.weights[i]);
    }
  }
  return r;
}

Rule composite_by_width(double a, double b, double max_width, int order) {
  const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / max_width - 1e-12)));
  return composite(a, b, panels, order);
}

Rule at_least(double lo, double hi, double want) {
  static constexpr int kOrders[] = {7, 10, 15, 20, 25, 30};
  for (int order : kOrders) {
    if (order >= want) return composite(lo, hi, 1, order);
  }
  return composite(lo, hi, static_cast<int>(std::ceil(want / 30.0)), 30);
}

Rule sinh_mapped(double lo, double hi, double c, double density) {
  const double wl = std::asinh(lo / c);
  const double wh = std::asinh(hi / c);
  Rule r = at_least(wl, wh, density * (8.0 + 2.0 * (wh - wl)));
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double w = r.nodes[i];
    r.nodes[i] = c * std::sinh(w);
    r.weights[i] *= c * std::cosh(w);
  }
  return r;
}

}  // namespace hwiener::quad
