#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "oclab/common.hpp"
#include "oclab/families.hpp"
#include "oclab/limits.hpp"
#include "oclab/represent.hpp"

namespace oclab {

/// int_Omega h(x, u(x), u'(x)) dx for the closed-form limit, split at the
/// limit kinks and the preimages of the declared r-kinks.
inline double functional_at_limit(const PiecewiseFn& u, double a, double b, const Integrand& h,
                                  int quad_order = 8) {
  std::vector<double> parts;
  for (const auto& seg : u.segs) {
    const double lo = std::max(a, seg.lo), hi = std::min(b, seg.hi);
    if (!(hi > lo)) continue;
    std::vector<double> cuts;
    if (seg.slope != 0.0)
      for (double kink : h.r_kinks) {
        const double x = (kink - seg.intercept) / seg.slope;
        if (x > lo && x < hi) cuts.push_back(x);
      }
    parts.push_back(integrate_with_cuts(
        lo, hi, std::move(cuts), [&](double x) { return h.h(x, seg(x), seg.slope); }, quad_order));
  }
  return pairwise_sum(parts);
}

struct LscResult {
  LimitEstimate liminf;        // extrapolated limit along the sequence
  double at_limit = 0.0;       // functional at the weak limit
  double gap = 0.0;            // liminf - at_limit; >= 0 certifies lsc here
};

/// Weak-lower-semicontinuity gap along the family: the extrapolated limit of
/// int h(x, u_k, grad u_k) minus the functional at the weak limit. The
/// "liminf" is the extrapolated limit; the catalog families converge along
/// the full schedule.
inline LscResult lsc_gap(const PiecewiseFamily& fam, const Integrand& h,
                         const std::vector<std::int64_t>& schedule, int quad_order = 8,
                         int jobs = 1) {
  if (!fam.gradient_consistent)
    fail(errc::config, fam.name + " is not gradient-consistent");
  LscResult r;
  r.liminf = limit_extrapolate_integrand(fam, h, schedule, quad_order, jobs);
  r.at_limit = functional_at_limit(fam.u_limit, fam.a, fam.b, h, quad_order);
  r.gap = r.liminf.value - r.at_limit;
  return r;
}

/// Boundary integral of the p <= n sufficient condition: h01 integrated over
/// the boundary part of nu-hat against mu-hat and sigma, with recession
/// values. Nonnegative sign reports "condition satisfied".
inline double plessn_condition(const DMTriple& t, const IntegrandPart& h01,
                               const std::vector<double>& r_kinks = {}, int quad_order = 8) {
  if (!h01.present) fail(errc::config, "plessn_condition needs an h01 part");
  return concentration_term(t, h01, r_kinks, quad_order);
}

inline std::string lsc_verdict(double gap, double tol = 1e-3) {
  return gap >= -tol ? "lsc_along_sequence" : "lsc_fails";
}

inline std::string condition_verdict(std::optional<double> condition_value) {
  if (!condition_value) return "n/a";
  return *condition_value >= 0.0 ? "satisfied" : "negative";
}

} // namespace oclab
