#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "oclab/common.hpp"
#include "oclab/compactify.hpp"
#include "oclab/families.hpp"
#include "oclab/measures.hpp"
#include "oclab/parallel.hpp"
#include "oclab/quadrature.hpp"

namespace oclab {

/// Integrand F(x, u_k(x), w_k(x)) with declared kinks in the r-argument.
/// The s-argument needs no kink list: w_k is constant on every piece.
struct XRSIntegrand {
  std::function<double(double x, double r, double s)> f;
  std::vector<double> r_kinks;
};

/// Exact-per-piece integral of F(x, u_k, w_k) over the domain: the domain is
/// split at the family breakpoints and at the preimages of the declared
/// r-kinks under the affine u_k, then fixed-order Gauss-Legendre is applied
/// per subinterval. Deterministic left-to-right pairwise summation.
inline double integrate_family(const PiecewiseFamily& fam, std::int64_t k, const XRSIntegrand& F,
                               int quad_order = 8) {
  const auto ps = fam.pieces(k);
  std::vector<double> parts;
  parts.reserve(ps.size());
  for (const auto& pc : ps) {
    std::vector<double> cuts;
    if (pc.slope != 0.0) {
      for (double kink : F.r_kinks) {
        const double x = (kink - pc.intercept) / pc.slope;
        if (x > pc.lo && x < pc.hi) cuts.push_back(x);
      }
    }
    parts.push_back(integrate_with_cuts(
        pc.lo, pc.hi, std::move(cuts), [&](double x) { return F.f(x, pc.u(x), pc.w); }, quad_order));
  }
  return pairwise_sum(parts);
}

/// I_k = int_Omega g(x) f0(u_k) psi(w_k) dx with psi = psi0 (1+|s|^p):
/// the empirical side of the representation formula.
inline double functional_value(const PiecewiseFamily& fam, std::int64_t k, const ScalarField& g,
                               const RingFunction& f0, const RingFunction& psi0, double p,
                               int quad_order = 8) {
  XRSIntegrand F;
  F.r_kinks = f0.kinks();
  F.f = [&](double x, double r, double s) {
    return g(x) * f0(r) * psi0(s) * (1.0 + std::pow(std::fabs(s), p));
  };
  return integrate_family(fam, k, F, quad_order);
}

/// Role-swapped empirical value: the growth lift sits on the u-variable,
/// I*_k = int g(x) f0(u_k) (1+|u_k|^q) psi0(w_k) dx.
inline double functional_value_dual(const PiecewiseFamily& fam, std::int64_t k, const ScalarField& g,
                                    const RingFunction& f0, const RingFunction& psi0, double q,
                                    int quad_order = 8) {
  XRSIntegrand F;
  F.r_kinks = f0.kinks();
  F.r_kinks.push_back(0.0); // |r|^q is not smooth through 0
  F.f = [&](double x, double r, double s) {
    return g(x) * f0(r) * (1.0 + std::pow(std::fabs(r), q)) * psi0(s);
  };
  return integrate_family(fam, k, F, quad_order);
}

/// Extrapolated limit with an error bar and the schedule that produced it.
struct LimitEstimate {
  double value = 0.0;
  double error_bar = 0.0;
  bool diverged = false; // residuals grow along the fitted tail
  std::vector<std::int64_t> ks;
  std::vector<double> samples;
};

/// Fit I_k ~ a + b/k on the last (up to) four schedule points by least
/// squares. The error bar is max residual + |I_{k_max} - a|; all catalog
/// transients are O(1/k) (spike widths 1/k).
inline LimitEstimate extrapolate_samples(std::vector<std::int64_t> ks, std::vector<double> samples) {
  LimitEstimate est;
  est.ks = std::move(ks);
  est.samples = std::move(samples);
  const std::size_t n = est.samples.size();
  if (n == 0) fail(errc::schedule, "empty schedule");
  if (n == 1) {
    est.value = est.samples[0];
    return est;
  }
  const std::size_t m = std::min<std::size_t>(4, n);
  const std::size_t off = n - m;
  // least squares for [1, 1/k]
  double s11 = 0, s1t = 0, stt = 0, s1y = 0, sty = 0;
  for (std::size_t i = off; i < n; ++i) {
    const double tk = 1.0 / double(est.ks[i]);
    const double y = est.samples[i];
    s11 += 1.0; s1t += tk; stt += tk * tk; s1y += y; sty += tk * y;
  }
  const double det = s11 * stt - s1t * s1t;
  double a, bcoef;
  if (std::fabs(det) < 1e-300) {
    a = est.samples[n - 1];
    bcoef = 0.0;
  } else {
    a = (stt * s1y - s1t * sty) / det;
    bcoef = (s11 * sty - s1t * s1y) / det;
  }
  double max_resid = 0.0;
  for (std::size_t i = off; i < n; ++i) {
    const double fit = a + bcoef / double(est.ks[i]);
    max_resid = std::max(max_resid, std::fabs(est.samples[i] - fit));
  }
  est.value = a;
  est.error_bar = max_resid + std::fabs(est.samples[n - 1] - a);
  // a + b/k samples halve their successive differences on a doubling
  // schedule; differences that stop shrinking signal divergence
  if (n - off >= 3) {
    const double d_first = std::fabs(est.samples[off + 1] - est.samples[off]);
    const double d_last = std::fabs(est.samples[n - 1] - est.samples[n - 2]);
    est.diverged = d_last > 0.75 * d_first + 1e-15 &&
                   d_last > 1e-12 * std::max(1.0, std::fabs(a));
  }
  return est;
}

inline LimitEstimate limit_extrapolate(const PiecewiseFamily& fam, const ScalarField& g,
                                       const RingFunction& f0, const RingFunction& psi0, double p,
                                       const std::vector<std::int64_t>& schedule, int quad_order = 8,
                                       int jobs = 1) {
  auto samples = parallel_map(schedule.size(), jobs, [&](std::size_t i) {
    return functional_value(fam, schedule[i], g, f0, psi0, p, quad_order);
  });
  return extrapolate_samples(schedule, std::move(samples));
}

inline LimitEstimate limit_extrapolate_dual(const PiecewiseFamily& fam, const ScalarField& g,
                                            const RingFunction& f0, const RingFunction& psi0, double q,
                                            const std::vector<std::int64_t>& schedule,
                                            int quad_order = 8, int jobs = 1) {
  auto samples = parallel_map(schedule.size(), jobs, [&](std::size_t i) {
    return functional_value_dual(fam, schedule[i], g, f0, psi0, q, quad_order);
  });
  return extrapolate_samples(schedule, std::move(samples));
}

/// One battery row of the empirical-vs-representation comparison.
struct CheckRow {
  std::string g, f0, psi0;
  LimitEstimate empirical;
  double predicted = 0.0;
  double discrepancy = 0.0;
  bool pass = false;
};

struct CheckReport {
  std::vector<CheckRow> rows;
  bool pass = true;
};

/// For every battery member, compare the extrapolated empirical limit with
/// the triple integral; pass iff the discrepancy is within
/// max(limit_tol, 3 * error_bar).
inline CheckReport empirical_triple_check(const PiecewiseFamily& fam, const DMTriple& triple,
                                          const TestBattery& battery, double p,
                                          const std::vector<std::int64_t>& schedule,
                                          double limit_tol = 1e-3, int quad_order = 8, int jobs = 1) {
  CheckReport report;
  auto rows = parallel_map(battery.members.size(), jobs, [&](std::size_t i) {
    const auto& m = battery.members[i];
    CheckRow row;
    row.g = m.g.name;
    row.f0 = m.f0.name();
    row.psi0 = m.psi0.name();
    row.empirical = limit_extrapolate(fam, m.g, m.f0, m.psi0, p, schedule, quad_order, 1);
    row.predicted = integrate_triple(triple, m.g, m.f0, m.psi0, p, quad_order);
    row.discrepancy = std::fabs(row.empirical.value - row.predicted);
    row.pass = row.discrepancy <= std::max(limit_tol, 3.0 * row.empirical.error_bar);
    return row;
  });
  report.rows = std::move(rows);
  for (const auto& r : report.rows) report.pass = report.pass && r.pass;
  return report;
}

} // namespace oclab
