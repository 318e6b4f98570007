#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <vector>

#include "oclab/common.hpp"

namespace oclab {

/// Gauss-Legendre rule on [-1,1]. Nodes are computed once per order by Newton
/// iteration on the Legendre polynomial; exact for polynomials of degree
/// 2n-1. Order 8 is the project default (see limits module).
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendre(int order) {
    if (order < 1) fail(errc::config, "quadrature order must be >= 1");
    nodes.resize(order);
    weights.resize(order);
    const int n = order;
    for (int i = 0; i < (n + 1) / 2; ++i) {
      // Chebyshev initial guess, then Newton on P_n.
      double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      double pp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = 0.0;
        for (int j = 0; j < n; ++j) {
          const double p2 = p1;
          p1 = p0;
          p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
        }
        pp = n * (x * p0 - p1) / (x * x - 1.0);
        const double dx = p0 / pp;
        x -= dx;
        if (std::fabs(dx) < 1e-15) break;
      }
      nodes[i] = -x;
      nodes[n - 1 - i] = x;
      weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
      weights[n - 1 - i] = weights[i];
    }
  }

  static const GaussLegendre& cached(int order) {
    // per-thread cache: workers never contend, nodes are deterministic
    thread_local std::map<int, GaussLegendre> cache;
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, GaussLegendre(order)).first;
    return it->second;
  }

  /// Integral of f over [a,b]; never samples the endpoints.
  template <class F>
  double integrate(double a, double b, F&& f) const {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    std::vector<double> terms(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i)
      terms[i] = weights[i] * f(mid + half * nodes[i]);
    return half * pairwise_sum(terms);
  }
};

/// Integrate f over [a,b] split at the given cut points (sorted, deduplicated
/// against [a,b] internally). Contributions are pairwise-summed left to right.
template <class F>
double integrate_with_cuts(double a, double b, std::vector<double> cuts, F&& f, int order) {
  const auto& rule = GaussLegendre::cached(order);
  cuts.push_back(a);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> pieces;
  double lo = a;
  for (double c : cuts) {
    if (c <= lo || c > b) continue;
    pieces.push_back(rule.integrate(lo, c, f));
    lo = c;
  }
  if (lo < b) pieces.push_back(rule.integrate(lo, b, f));
  return pairwise_sum(pieces);
}

} // namespace oclab
