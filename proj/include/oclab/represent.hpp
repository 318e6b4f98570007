#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "oclab/common.hpp"
#include "oclab/families.hpp"
#include "oclab/limits.hpp"
#include "oclab/measures.hpp"
#include "oclab/triples.hpp"

namespace oclab {

/// Sobolev conjugate exponent: p n/(n-p) for p < n, +inf otherwise.
inline double sobolev_conjugate(double p, int n) {
  if (p < double(n)) return p * n / (double(n) - p);
  return std::numeric_limits<double>::infinity();
}

/// q < p* is required by the gradient representation; equality is rejected.
inline void ensure_subcritical(double q, double p, int n) {
  if (!(q < sobolev_conjugate(p, n)))
    fail(errc::subcritical, "q = " + format_double(q) + " is not Sobolev-subcritical for p = " +
                                format_double(p) + ", n = " + std::to_string(n));
}

/// One factor of the integrand class: a bounded-continuous function of
/// (x, r, s) with boundary data in s (always) and in r (when declared).
struct IntegrandPart {
  bool present = false;
  std::function<double(double x, double r, double s)> finite;
  std::function<double(double x, double r, double dir)> s_recession;
  std::function<double(double x, double r_dir, double s)> r_recession;
  bool has_r_recession = false;
};

/// h(x,r,s) = h01(x,r,s)(1+|s|^p) + h02(x,r,s)(1+|r|^q). The split is
/// user-declared: only the boundary restriction of h01 matters and the split
/// is non-unique on finite s.
struct Integrand {
  std::string name;
  IntegrandPart h01, h02;
  double p = 1.0, q = 1.0;
  double growth_C = 1.0; // |h| <= C (1+|r|^q+|s|^p)
  std::vector<double> r_kinks;

  double h(double x, double r, double s) const {
    double v = 0.0;
    if (h01.present) v += h01.finite(x, r, s) * (1.0 + std::pow(std::fabs(s), p));
    if (h02.present) v += h02.finite(x, r, s) * (1.0 + std::pow(std::fabs(r), q));
    return v;
  }
};

/// Named integrand catalog for scenarios and reports.
///   u_weight          clamp(r) (1+|s|),    p=1, q=1
///   u_times_signed    clamp(r) s/(1+|s|) (1+|s|), p=1
///   grad_sq           s^2  as h01 (1+s^2), p=2
///   grad_double_well  (s^2-1)^2 as h01 (1+s^4), p=4
///   conc_abs          |s|/(1+|s|) (1+|s|) = |s|, p=1
///   conc_signed       s/(1+|s|) (1+|s|) = s, p=1
///   h02_one           (1+|r|^2) via h02 = 1,  p=1, q=2
inline Integrand integrand(const std::string& name) {
  Integrand h;
  h.name = name;
  if (name == "u_weight") {
    h.p = 1.0; h.q = 1.0;
    h.r_kinks = {-1.0, 1.0};
    h.h01.present = true;
    h.h01.finite = [](double, double r, double) { return std::clamp(r, -1.0, 1.0); };
    h.h01.s_recession = [](double, double r, double) { return std::clamp(r, -1.0, 1.0); };
    h.growth_C = 1.0;
    return h;
  }
  if (name == "u_times_signed") {
    h.p = 1.0; h.q = 1.0;
    h.r_kinks = {-1.0, 1.0};
    h.h01.present = true;
    h.h01.finite = [](double, double r, double s) {
      return std::clamp(r, -1.0, 1.0) * s / (1.0 + std::fabs(s));
    };
    h.h01.s_recession = [](double, double r, double dir) { return std::clamp(r, -1.0, 1.0) * dir; };
    h.growth_C = 1.0;
    return h;
  }
  if (name == "grad_sq") {
    h.p = 2.0; h.q = 1.0;
    h.h01.present = true;
    h.h01.finite = [](double, double, double s) { return s * s / (1.0 + s * s); };
    h.h01.s_recession = [](double, double, double) { return 1.0; };
    h.growth_C = 1.0;
    return h;
  }
  if (name == "grad_double_well") {
    h.p = 4.0; h.q = 1.0;
    h.h01.present = true;
    h.h01.finite = [](double, double, double s) {
      const double w = (s * s - 1.0);
      return w * w / (1.0 + s * s * s * s);
    };
    h.h01.s_recession = [](double, double, double) { return 1.0; };
    h.growth_C = 2.0;
    return h;
  }
  if (name == "conc_abs") {
    h.p = 1.0; h.q = 1.0;
    h.h01.present = true;
    h.h01.finite = [](double, double, double s) { return std::fabs(s) / (1.0 + std::fabs(s)); };
    h.h01.s_recession = [](double, double, double) { return 1.0; };
    h.growth_C = 1.0;
    return h;
  }
  if (name == "conc_signed") {
    h.p = 1.0; h.q = 1.0;
    h.h01.present = true;
    h.h01.finite = [](double, double, double s) { return s / (1.0 + std::fabs(s)); };
    h.h01.s_recession = [](double, double, double dir) { return dir; };
    h.growth_C = 1.0;
    return h;
  }
  if (name == "h02_one") {
    h.p = 1.0; h.q = 2.0;
    h.h02.present = true;
    h.h02.finite = [](double, double, double) { return 1.0; };
    h.h02.r_recession = [](double, double, double) { return 1.0; };
    h.h02.has_r_recession = true;
    h.growth_C = 1.0;
    return h;
  }
  fail(errc::catalog, "unknown integrand '" + name + "'");
}

inline std::vector<std::string> catalog_integrand_names() {
  return {"u_weight", "u_times_signed", "grad_sq", "grad_double_well",
          "conc_abs", "conc_signed",    "h02_one"};
}

// ---------------------------------------------------------------------------
// Representation formula evaluation
// ---------------------------------------------------------------------------

struct RepresentResult {
  double oscillation = 0.0;   // int_Omega int h(x, u(x), s) nu_x(ds) dx
  double concentration = 0.0; // boundary-s term against (sigma, nu-hat, mu-hat)
  double total = 0.0;
};

namespace detail {

/// Integral of h01(x, ., dir) against a mu-hat fiber, as a function of x.
inline std::function<double(double)> mu_h01(const MuFiber& mu, const IntegrandPart& h01, double dir,
                                            const PiecewiseFn& u, const std::vector<double>& r_kinks,
                                            int quad_order) {
  if (mu.dirac_of_u)
    return [&h01, &u, dir](double x) { return h01.s_recession(x, u(x), dir); };
  if (!mu.measure.boundary.empty() && !h01.has_r_recession)
    fail(errc::recession, "mu-hat charges the r-boundary but h01 declares no r-boundary data");
  return [&, dir](double x) {
    return mu.measure.integrate([&](double r) { return h01.s_recession(x, r, dir); },
                                [&](double rdir) { return h01.r_recession(x, rdir, dir); }, r_kinks,
                                quad_order);
  };
}

} // namespace detail

/// Boundary-s term of the representation: for every part of sigma, the
/// nu-hat boundary weights times the mu-hat average of h01 at the recession
/// direction. This is also the integral tested by the p <= n condition.
inline double concentration_term(const DMTriple& t, const IntegrandPart& h01,
                                 const std::vector<double>& r_kinks, int quad_order = 8) {
  if (!h01.present) return 0.0;
  std::vector<double> parts;
  for (const auto& c : t.cells) {
    if (c.cell.is_point) continue;
    if (c.nu.boundary.empty()) continue;
    std::vector<std::pair<double, std::function<double(double)>>> bdry;
    for (const auto& ba : c.nu.boundary) {
      const MuFiber* mu = nullptr;
      for (const auto& [dir, fiber] : c.mu_boundary)
        if (dir == ba.direction || t.s_kind == CompKind::one_point) { mu = &fiber; break; }
      if (!mu) fail(errc::incomplete_triple, "missing mu-hat at a charged boundary point");
      bdry.emplace_back(ba.weight,
                        detail::mu_h01(*mu, h01, ba.direction, t.u_limit, r_kinks, quad_order));
    }
    std::vector<double> cuts = t.u_limit.interior_kinks();
    for (double d : t.sigma.density_cuts()) cuts.push_back(d);
    std::vector<double> inside;
    for (double x : cuts)
      if (x > c.cell.lo && x < c.cell.hi) inside.push_back(x);
    parts.push_back(integrate_with_cuts(
        c.cell.lo, c.cell.hi, inside,
        [&](double x) {
          double inner = 0.0;
          for (const auto& [w, fx] : bdry) inner += w * fx(x);
          return t.sigma.density_at(x) * inner;
        },
        quad_order));
  }
  for (const auto& a : t.sigma.atoms) {
    const TripleCell* pc = t.point_cell_at(a.point);
    if (!pc) fail(errc::incomplete_triple, "sigma atom without a fiber cell");
    double inner = 0.0;
    for (const auto& ba : pc->nu.boundary) {
      const MuFiber* mu = nullptr;
      for (const auto& [dir, fiber] : pc->mu_boundary)
        if (dir == ba.direction || t.s_kind == CompKind::one_point) { mu = &fiber; break; }
      if (!mu) fail(errc::incomplete_triple, "missing mu-hat at a charged boundary point");
      auto fx = detail::mu_h01(*mu, h01, ba.direction, t.u_limit, r_kinks, quad_order);
      inner += ba.weight * fx(a.point);
    }
    parts.push_back(a.weight * inner);
  }
  return pairwise_sum(parts);
}

/// Oscillation term: the full h against the classical Young measure of the
/// gradients and the Dirac at u(x), integrated over the domain in x.
inline double oscillation_term(const DMTriple& t, const Integrand& h, int quad_order = 8) {
  std::vector<double> parts;
  for (const auto& c : t.cells) {
    if (c.cell.is_point) continue;
    const CompactifiedMeasure young = young_from_dm(c.nu, t.p);
    std::vector<double> cuts = t.u_limit.interior_kinks();
    // preimages of the r-kinks under the affine limit
    for (const auto& seg : t.u_limit.segs)
      if (seg.slope != 0.0)
        for (double kink : h.r_kinks) {
          const double x = (kink - seg.intercept) / seg.slope;
          if (x > seg.lo && x < seg.hi) cuts.push_back(x);
        }
    std::vector<double> inside;
    for (double x : cuts)
      if (x > c.cell.lo && x < c.cell.hi) inside.push_back(x);
    parts.push_back(integrate_with_cuts(
        c.cell.lo, c.cell.hi, inside,
        [&](double x) {
          const double ux = t.u_limit(x);
          return young.integrate([&](double s) { return h.h(x, ux, s); }, [](double) { return 0.0; },
                                 {}, quad_order);
        },
        quad_order));
  }
  return pairwise_sum(parts);
}

/// Decomposed limit of int h(x, u_k, grad u_k): oscillation plus the h01
/// concentration term. Valid for gradient-consistent, Sobolev-subcritical
/// scenarios; the h02 boundary term vanishes there by equi-integrability.
inline RepresentResult represent_limit(const PiecewiseFamily& fam, const DMTriple& triple,
                                       const Integrand& h, int quad_order = 8) {
  if (!fam.gradient_consistent)
    fail(errc::config, fam.name + " is not gradient-consistent");
  ensure_subcritical(h.q, h.p, fam.n);
  RepresentResult r;
  r.oscillation = oscillation_term(triple, h, quad_order);
  r.concentration = concentration_term(triple, h.h01, h.r_kinks, quad_order);
  r.total = r.oscillation + r.concentration;
  return r;
}

/// Empirical limit of the full integrand along the family.
inline LimitEstimate limit_extrapolate_integrand(const PiecewiseFamily& fam, const Integrand& h,
                                                 const std::vector<std::int64_t>& schedule,
                                                 int quad_order = 8, int jobs = 1) {
  XRSIntegrand F;
  F.r_kinks = h.r_kinks;
  F.r_kinks.push_back(0.0);
  F.f = [&h](double x, double r, double s) { return h.h(x, r, s); };
  auto samples = parallel_map(schedule.size(), jobs, [&](std::size_t i) {
    return integrate_family(fam, schedule[i], F, quad_order);
  });
  return extrapolate_samples(schedule, std::move(samples));
}

// ---------------------------------------------------------------------------
// Role swap: the (sigma*, nu-hat*, mu-hat*) triple of the lifted u-variable
// ---------------------------------------------------------------------------

/// Builds the role-swapped triple from the family's closed-form limit and
/// oscillation metadata: sigma* = (1+|u|^q) dx, nu-hat* the Young measure of
/// {w_k}, mu-hat* the Dirac at u(x). The stored exponent p of the returned
/// triple is q (the lift now sits on the u-variable). Boundedness of
/// {u_k} in L^q is checked along the schedule ends.
inline DMTriple dual_triple(const PiecewiseFamily& fam, double q,
                            const std::vector<std::int64_t>& schedule, int quad_order = 8) {
  // detect L^q norm growth
  XRSIntegrand Fq;
  Fq.r_kinks = {0.0};
  Fq.f = [q](double, double r, double) { return std::pow(std::fabs(r), q); };
  const double head = integrate_family(fam, schedule.front(), Fq, quad_order);
  const double tail = integrate_family(fam, schedule.back(), Fq, quad_order);
  if (tail > 2.0 * head + 1e-6)
    fail(errc::boundedness, fam.name + ": L^q norms grow along the schedule");

  DMTriple t;
  t.name = fam.name + "_dual";
  t.a = fam.a;
  t.b = fam.b;
  t.p = q; // lift exponent of the swapped representation
  t.q = fam.p;
  t.u_limit = fam.u_limit;
  for (std::size_t i = 0; i < fam.u_limit.segs.size(); ++i) {
    const auto& seg = fam.u_limit.segs[i];
    DensityPiece dp;
    dp.lo = seg.lo;
    dp.hi = seg.hi;
    if (seg.slope == 0.0) {
      dp.density.coeffs = {1.0 + std::pow(std::fabs(seg.intercept), q)};
    } else if (q == 2.0) {
      // 1 + (slope x + intercept)^2
      dp.density.coeffs = {1.0 + seg.intercept * seg.intercept, 2.0 * seg.slope * seg.intercept,
                           seg.slope * seg.slope};
    } else {
      fail(errc::config, "dual triple needs a piecewise-constant limit or q = 2");
    }
    t.sigma.density.push_back(dp);

    TripleCell cell;
    cell.cell = {false, seg.lo, seg.hi, 0.0};
    CompactifiedMeasure nu;
    const auto& osc = fam.oscillation.at(i);
    for (const auto& [s, prob] : osc.atoms) nu.atoms.push_back({s, prob});
    cell.nu = make_probability(std::move(nu));
    cell.mu_finite = MuFiber{true, {}};
    t.cells.push_back(cell);
  }
  return t;
}

/// Marginalization of mu-hat* over nu-hat*: the r-fiber of the plain
/// DiPerna-Majda measure of {u_k}. Returned as a triple in the r-role so the
/// characterization checks and battery moments apply directly.
inline DMTriple marginalize_dual(const DMTriple& dual) {
  DMTriple t;
  t.name = dual.name + "_marginal";
  t.a = dual.a;
  t.b = dual.b;
  t.p = dual.p; // exponent q of the u-lift
  t.q = dual.q;
  t.u_limit = dual.u_limit;
  t.sigma = dual.sigma;
  for (const auto& c : dual.cells) {
    TripleCell cell;
    cell.cell = c.cell;
    // weighted combination of the mu* fibers; all-dirac cells need a
    // constant u on the cell to materialize as an atom
    bool all_dirac = c.mu_finite.dirac_of_u;
    for (const auto& [dir, fiber] : c.mu_boundary) all_dirac = all_dirac && fiber.dirac_of_u;
    if (!all_dirac) fail(errc::config, "marginalization needs dirac mu* fibers");
    double ux = 0.0;
    bool constant = true;
    for (const auto& seg : dual.u_limit.segs)
      if (seg.lo >= c.cell.lo - 1e-12 && seg.hi <= c.cell.hi + 1e-12) {
        if (seg.slope != 0.0) constant = false;
        ux = seg.intercept;
      }
    if (!constant) fail(errc::config, "marginalization needs a piecewise-constant limit");
    cell.nu = make_probability(dirac(ux, dual.r_kind));
    cell.mu_finite = MuFiber{true, {}};
    t.cells.push_back(cell);
  }
  return t;
}

/// Directly constructed DiPerna-Majda triple of {u_k} alone (bounded case):
/// sigma = (1+|u|^q) dx with Dirac fibers at u(x).
inline DMTriple dm_of_u(const PiecewiseFamily& fam, double q,
                        const std::vector<std::int64_t>& schedule) {
  DMTriple d = dual_triple(fam, q, schedule);
  return marginalize_dual(d);
}

// ---------------------------------------------------------------------------
// simplify_check: the equi-integrable h02 boundary term vanishes
// ---------------------------------------------------------------------------

/// The r-boundary term of the full two-triple representation; zero whenever
/// {|u_k|^q} is equi-integrable.
inline double r_boundary_term(const DMTriple& dual, const IntegrandPart& h02, int quad_order = 8) {
  if (!h02.present) return 0.0;
  std::vector<double> parts;
  for (const auto& c : dual.cells) {
    if (c.cell.is_point) continue;
    double bdry_mass = 0.0;
    if (!c.mu_finite.dirac_of_u) bdry_mass += c.mu_finite.measure.boundary_mass();
    for (const auto& [dir, fiber] : c.mu_boundary)
      if (!fiber.dirac_of_u) bdry_mass += fiber.measure.boundary_mass();
    if (bdry_mass == 0.0) continue;
    if (!h02.has_r_recession)
      fail(errc::recession, "mu* charges the r-boundary but h02 declares no r-boundary data");
    // finite-s fibers only; simultaneous double boundary charges unsupported
    const auto& mu = c.mu_finite.measure;
    parts.push_back(integrate_with_cuts(
        c.cell.lo, c.cell.hi, {},
        [&](double x) {
          double inner = 0.0;
          for (const auto& rb : mu.boundary)
            inner += rb.weight * c.nu.integrate([&](double s) { return h02.r_recession(x, rb.direction, s); },
                                                [](double) { return 0.0; }, {}, quad_order);
          return dual.sigma.density_at(x) * inner;
        },
        quad_order));
  }
  for (const auto& a : dual.sigma.atoms) {
    (void)a;
    fail(errc::config, "atomic sigma* with r-boundary terms is unsupported");
  }
  return pairwise_sum(parts);
}

struct SimplifyReport {
  bool equi_integrable = false;
  double difference = 0.0; // full representation minus the simplified one
  bool pass = false;
};

/// Numerically verifies that dropping the h02 concentration term changes
/// nothing when {|u_k|^q} is equi-integrable.
inline SimplifyReport simplify_check(const PiecewiseFamily& fam, const DMTriple& triple,
                                     const Integrand& h, const std::vector<std::int64_t>& schedule,
                                     double tol = 1e-3, int quad_order = 8) {
  SimplifyReport rep;
  rep.equi_integrable = fam.equi_integrable_q;
  const DMTriple dual = dual_triple(fam, h.q, schedule, quad_order);
  rep.difference = r_boundary_term(dual, h.h02, quad_order);
  // cross-check through the empirical route: full limit vs simplified formula
  const auto full = limit_extrapolate_integrand(fam, h, schedule, quad_order);
  const RepresentResult simplified = represent_limit(fam, triple, h, quad_order);
  const double empirical_gap = std::fabs(full.value - simplified.total - rep.difference);
  rep.pass = std::fabs(rep.difference) <= tol &&
             empirical_gap <= std::max(tol, 3.0 * full.error_bar);
  return rep;
}

} // namespace oclab
