#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "oclab/common.hpp"
#include "oclab/compactify.hpp"
#include "oclab/families.hpp"
#include "oclab/quadrature.hpp"

namespace oclab {

struct Poly {
  std::vector<double> coeffs = {0.0};
  double operator()(double x) const {
    double acc = 0.0;
    for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * x + coeffs[i];
    return acc;
  }
};

struct PointMass {
  double point = 0.0;
  double weight = 0.0;
};

struct BoundaryAtom {
  double direction = 1.0; // +1/-1; ignored by one_point
  double weight = 0.0;
};

/// Absolutely continuous piece on the value axis. `uniform` has density amp;
/// `young_weighted` has density amp/(1+|s|^p) (produced by young_from_dm).
struct Segment {
  double lo = 0.0, hi = 0.0;
  double amp = 0.0;
  enum class Density { uniform, young_weighted } density = Density::uniform;
  double p = 1.0;

  double density_at(double s) const {
    if (density == Density::uniform) return amp;
    return amp / (1.0 + std::pow(std::fabs(s), p));
  }
};

inline Segment uniform_segment(double lo, double hi, double mass) {
  if (!(hi > lo)) fail(errc::config, "segment needs lo < hi");
  return Segment{lo, hi, mass / (hi - lo), Segment::Density::uniform, 1.0};
}

/// Measure on a compactified value space: finite atoms + finite ac segments
/// + weights on the boundary points (two-point ends, the single infinity, or
/// sphere directions, which in the scalar case are +-1).
struct CompactifiedMeasure {
  CompKind kind = CompKind::two_point;
  std::vector<PointMass> atoms;
  std::vector<Segment> segments;
  std::vector<BoundaryAtom> boundary;

  double finite_mass(int quad_order = 8) const {
    std::vector<double> parts;
    for (const auto& a : atoms) parts.push_back(a.weight);
    for (const auto& s : segments)
      parts.push_back(integrate_with_cuts(s.lo, s.hi, {}, [&](double t) { return s.density_at(t); },
                                          quad_order));
    return pairwise_sum(parts);
  }
  double boundary_mass() const {
    std::vector<double> parts;
    for (const auto& b : boundary) parts.push_back(b.weight);
    return pairwise_sum(parts);
  }
  double total_mass(int quad_order = 8) const { return finite_mass(quad_order) + boundary_mass(); }
  bool nonnegative() const {
    for (const auto& a : atoms)
      if (a.weight < 0.0) return false;
    for (const auto& s : segments)
      if (s.amp < 0.0) return false;
    for (const auto& b : boundary)
      if (b.weight < 0.0) return false;
    return true;
  }

  /// Integral of a scalar function with separate finite/boundary evaluators.
  template <class F, class B>
  double integrate(F&& fin, B&& bdry, const std::vector<double>& kinks, int quad_order = 8) const {
    std::vector<double> parts;
    for (const auto& a : atoms) parts.push_back(a.weight * fin(a.point));
    for (const auto& s : segments)
      parts.push_back(integrate_with_cuts(s.lo, s.hi, kinks,
                                          [&](double t) { return s.density_at(t) * fin(t); },
                                          quad_order));
    for (const auto& b : boundary) parts.push_back(b.weight * bdry(b.direction));
    return pairwise_sum(parts);
  }
};

inline CompactifiedMeasure dirac(double point, CompKind kind = CompKind::two_point) {
  CompactifiedMeasure m;
  m.kind = kind;
  m.atoms = {{point, 1.0}};
  return m;
}

/// Checked constructor for probability fibers: total mass must be 1 within
/// the mass tolerance.
inline CompactifiedMeasure make_probability(CompactifiedMeasure m, double mass_tol = 1e-10) {
  if (!m.nonnegative()) fail(errc::config, "probability fiber with negative weight");
  const double mass = m.total_mass();
  if (std::fabs(mass - 1.0) > mass_tol)
    fail(errc::config, "fiber mass " + format_double(mass) + " is not 1");
  return m;
}

/// Boundary value of a ring function against a measure of the given kind.
/// A one-point ring function fits any kind; a two-point ring function fits a
/// one-point measure only when both ends agree.
inline double ring_boundary_value(const RingFunction& f, CompKind measure_kind, double direction) {
  if (f.kind() == CompKind::one_point) return f.boundary(direction);
  if (measure_kind == CompKind::one_point) {
    const double pv = f.boundary(+1.0), mv = f.boundary(-1.0);
    if (pv == mv) return pv;
    fail(errc::kind_mismatch,
         "ring function '" + f.name() + "' has no single limit at the one-point boundary");
  }
  // two_point and sphere coincide for scalar targets
  return f.boundary(direction);
}

// ---------------------------------------------------------------------------
// Radon measures on the (closed) spatial domain
// ---------------------------------------------------------------------------

struct DensityPiece {
  double lo = 0.0, hi = 0.0;
  Poly density;
};

/// sigma = d_sigma(x) dx + atoms. Densities are piecewise polynomials.
struct RadonMeasure {
  std::vector<DensityPiece> density;
  std::vector<PointMass> atoms;

  double density_at(double x) const {
    for (std::size_t i = 0; i < density.size(); ++i)
      if (x <= density[i].hi || i + 1 == density.size()) return density[i].density(x);
    return 0.0;
  }
  std::vector<double> density_cuts() const {
    std::vector<double> cs;
    for (const auto& d : density) cs.push_back(d.hi);
    if (!cs.empty()) cs.pop_back();
    return cs;
  }
  double total_mass(int quad_order = 8) const {
    std::vector<double> parts;
    for (const auto& d : density)
      parts.push_back(
          integrate_with_cuts(d.lo, d.hi, {}, [&](double x) { return d.density(x); }, quad_order));
    for (const auto& a : atoms) parts.push_back(a.weight);
    return pairwise_sum(parts);
  }
  bool nonnegative(int samples = 33) const {
    for (const auto& d : density)
      for (int i = 0; i <= samples; ++i) {
        const double x = d.lo + (d.hi - d.lo) * double(i) / double(samples);
        if (d.density(x) < 0.0) return false;
      }
    for (const auto& a : atoms)
      if (a.weight < 0.0) return false;
    return true;
  }
};

// ---------------------------------------------------------------------------
// The triple (sigma, nu-hat, mu-hat)
// ---------------------------------------------------------------------------

/// mu-hat fiber over a fixed (cell, s-part). Either an explicit measure or
/// the x-parametrized Dirac at the limit function value (the canonical
/// completion).
struct MuFiber {
  bool dirac_of_u = true;
  CompactifiedMeasure measure;
};

struct Cell {
  bool is_point = false;
  double lo = 0.0, hi = 0.0; // interval cells
  double point = 0.0;        // point cells
};

struct TripleCell {
  Cell cell;
  CompactifiedMeasure nu;                               // constant nu-hat fiber on the cell
  MuFiber mu_finite;                                    // mu-hat over finite s
  std::vector<std::pair<double, MuFiber>> mu_boundary;  // keyed by boundary direction
};

/// The anisotropic parametrized measure: sigma on the closed domain, nu-hat
/// fibers per cell, mu-hat fibers per (cell, s-part), plus the closed-form
/// limit u used by the dirac_of_u completion. Immutable in use.
struct DMTriple {
  std::string name;
  double a = 0.0, b = 1.0;
  double p = 1.0, q = 1.0;
  CompKind s_kind = CompKind::two_point;
  CompKind r_kind = CompKind::two_point;
  RadonMeasure sigma;
  std::vector<TripleCell> cells;
  PiecewiseFn u_limit;

  const TripleCell* point_cell_at(double x, double tol = 1e-9) const {
    for (const auto& c : cells)
      if (c.cell.is_point && std::fabs(c.cell.point - x) <= tol) return &c;
    return nullptr;
  }
};

// ---------------------------------------------------------------------------
// validate_dm: the characterization checks
// ---------------------------------------------------------------------------

struct ValidationItem {
  std::string name;
  bool pass = true;
  double defect = 0.0;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationItem> items;
  bool pass = true;

  void add(std::string name, bool ok, double defect, std::string detail = "") {
    items.push_back({std::move(name), ok, defect, std::move(detail)});
    pass = pass && ok;
  }
  const ValidationItem* find(const std::string& name) const {
    for (const auto& it : items)
      if (it.name == name) return &it;
    return nullptr;
  }
};

/// Characterization checks for (sigma, nu-hat): positivity, absolute
/// continuity of sigma_nu (atom fibers carry no finite mass), the density
/// identity d_sigma(x) * int (1+|s|^p)^{-1} nu_x(ds) = 1 on the ac cells,
/// and fiber normalization. Failures are report entries, not errors.
inline ValidationReport validate_dm(const DMTriple& t, double p, const Tolerances& tol = {}) {
  ValidationReport rep;

  bool positive = t.sigma.nonnegative();
  for (const auto& c : t.cells) positive = positive && c.nu.nonnegative();
  rep.add("positivity", positive, positive ? 0.0 : 1.0,
          positive ? "" : "negative weight in sigma or a fiber");

  // atoms of sigma must sit on point cells whose fibers are boundary-only
  double ac_defect = 0.0;
  std::string ac_detail;
  for (const auto& a : t.sigma.atoms) {
    const TripleCell* pc = t.point_cell_at(a.point, tol.atom_location);
    if (!pc) {
      ac_defect = std::max(ac_defect, 1.0);
      ac_detail = "sigma atom at " + format_double(a.point) + " has no fiber cell";
      continue;
    }
    const double fin = pc->nu.finite_mass();
    if (fin > ac_defect) {
      ac_defect = fin;
      if (fin > tol.mass) ac_detail = "atom fiber at " + format_double(a.point) + " has finite mass";
    }
  }
  rep.add("atom_fibers_boundary_only", ac_defect <= tol.mass, ac_defect, ac_detail);

  // density formula on the interval cells, sampled at quadrature nodes
  double dens_defect = 0.0;
  bool dens_pos = true;
  const auto& rule = GaussLegendre::cached(8);
  for (const auto& c : t.cells) {
    if (c.cell.is_point) continue;
    const double fin = c.nu.finite_mass();
    const double weighted = c.nu.integrate([&](double s) { return 1.0 / (1.0 + std::pow(std::fabs(s), p)); },
                                           [](double) { return 0.0; }, {});
    if (fin <= 0.0) {
      dens_pos = false;
      continue;
    }
    for (double node : rule.nodes) {
      const double x = 0.5 * (c.cell.lo + c.cell.hi) + 0.5 * (c.cell.hi - c.cell.lo) * node;
      const double lhs = fin * t.sigma.density_at(x);       // density of sigma_nu
      const double rhs = fin / weighted;                    // characterization item 3
      dens_defect = std::max(dens_defect, std::fabs(lhs - rhs));
    }
  }
  rep.add("density_formula", dens_pos && dens_defect <= tol.moment, dens_defect,
          dens_pos ? "" : "fiber with vanishing finite mass on an ac cell");

  double norm_defect = 0.0;
  for (const auto& c : t.cells) norm_defect = std::max(norm_defect, std::fabs(c.nu.total_mass() - 1.0));
  rep.add("normalization", norm_defect <= tol.mass, norm_defect);

  return rep;
}

// ---------------------------------------------------------------------------
// young_from_dm
// ---------------------------------------------------------------------------

/// Classical Young-measure fiber associated to a nu-hat fiber:
/// nu(ds) = Z^{-1} nu_hat(ds)/(1+|s|^p). Boundary-only fibers are rejected.
inline CompactifiedMeasure young_from_dm(const CompactifiedMeasure& nu_hat, double p) {
  CompactifiedMeasure out;
  out.kind = nu_hat.kind;
  for (const auto& a : nu_hat.atoms)
    out.atoms.push_back({a.point, a.weight / (1.0 + std::pow(std::fabs(a.point), p))});
  for (const auto& s : nu_hat.segments) {
    if (s.density != Segment::Density::uniform)
      fail(errc::config, "young_from_dm expects uniform segments");
    out.segments.push_back(Segment{s.lo, s.hi, s.amp, Segment::Density::young_weighted, p});
  }
  const double z = out.finite_mass();
  if (z <= 0.0) fail(errc::degenerate_fiber, "boundary-only fiber has no Young measure");
  for (auto& a : out.atoms) a.weight /= z;
  for (auto& s : out.segments) s.amp /= z;
  return out;
}

// ---------------------------------------------------------------------------
// barycenter_check
// ---------------------------------------------------------------------------

/// Max defect of the first-moment identity
///   u'(x) = d_sigma(x) * int s/(1+|s|^p) nu_x(ds)
/// over quadrature samples of the ac cells. The boundary contributes the
/// recession of s/(1+|s|^p): the unit direction for p = 1, zero for p > 1.
inline double barycenter_check(const DMTriple& t, const PiecewiseFn& u, double p) {
  const auto& rule = GaussLegendre::cached(8);
  double defect = 0.0;
  for (const auto& c : t.cells) {
    if (c.cell.is_point) continue;
    const double moment = c.nu.integrate(
        [&](double s) { return s / (1.0 + std::pow(std::fabs(s), p)); },
        [&](double dir) {
          if (p > 1.0) return 0.0;
          if (t.s_kind == CompKind::one_point)
            fail(errc::recession, "one-point boundary has no signed recession for p = 1");
          return dir;
        },
        {0.0});
    // split at u kinks inside the cell so u' is sampled per affine piece
    std::vector<double> cuts = u.interior_kinks();
    cuts.push_back(c.cell.lo);
    cuts.push_back(c.cell.hi);
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double lo = std::max(cuts[i], c.cell.lo), hi = std::min(cuts[i + 1], c.cell.hi);
      if (!(hi > lo)) continue;
      for (double node : rule.nodes) {
        const double x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * node;
        defect = std::max(defect, std::fabs(u.derivative(x) - t.sigma.density_at(x) * moment));
      }
    }
  }
  return defect;
}

// ---------------------------------------------------------------------------
// integrate_triple: the right-hand side of the representation formula
// ---------------------------------------------------------------------------

namespace detail {

/// Integral of f0 against a mu-hat fiber; x enters through the dirac_of_u
/// completion. Returns a function of x.
inline std::function<double(double)> mu_integral(const MuFiber& mu, const RingFunction& f0,
                                                 CompKind r_kind, const PiecewiseFn& u,
                                                 int quad_order) {
  if (mu.dirac_of_u)
    return [&f0, &u](double x) { return f0(u(x)); };
  const double value = mu.measure.integrate(
      [&](double r) { return f0(r); },
      [&](double dir) { return ring_boundary_value(f0, r_kind, dir); }, f0.kinks(), quad_order);
  return [value](double) { return value; };
}

inline std::vector<double> cell_cuts(const DMTriple& t, const TripleCell& c, const PiecewiseFn& u,
                                     const std::vector<double>& f0_kinks) {
  std::vector<double> cuts = u.interior_kinks();
  for (double d : t.sigma.density_cuts()) cuts.push_back(d);
  // preimages of the f0 kinks under the affine limit pieces
  for (const auto& seg : u.segs) {
    if (seg.slope == 0.0) continue;
    for (double kink : f0_kinks) {
      const double x = (kink - seg.intercept) / seg.slope;
      if (x > seg.lo && x < seg.hi) cuts.push_back(x);
    }
  }
  std::vector<double> inside;
  for (double x : cuts)
    if (x > c.cell.lo && x < c.cell.hi) inside.push_back(x);
  return inside;
}

} // namespace detail

/// Triple integral of g(x) f0(r) psi0(s) against mu-hat x nu-hat x sigma:
/// a finite sum over atoms and boundary points plus quadrature over the ac
/// parts. Summation order is fixed (cells, then sigma atoms).
inline double integrate_triple(const DMTriple& t, const ScalarField& g, const RingFunction& f0,
                               const RingFunction& psi0, double p, int quad_order = 8) {
  if (std::fabs(p - t.p) > 1e-12)
    fail(errc::config, "battery exponent p does not match the triple");

  std::vector<double> parts;

  for (const auto& c : t.cells) {
    if (c.cell.is_point) continue;
    // finite-s factor: int psi0 d(nu restricted to R) times int f0 d(mu_finite)
    const double psi_fin = c.nu.integrate([&](double s) { return psi0(s); },
                                          [](double) { return 0.0; }, psi0.kinks(), quad_order);
    auto mu_fin = detail::mu_integral(c.mu_finite, f0, t.r_kind, t.u_limit, quad_order);

    // boundary-s factors
    std::vector<std::pair<double, std::function<double(double)>>> bdry; // (psi-weighted, mu integral)
    for (const auto& ba : c.nu.boundary) {
      const MuFiber* mu = nullptr;
      for (const auto& [dir, fiber] : c.mu_boundary)
        if (dir == ba.direction || t.s_kind == CompKind::one_point) { mu = &fiber; break; }
      if (!mu)
        fail(errc::incomplete_triple, "missing mu-hat at a charged boundary point of '" + t.name + "'");
      const double psi_b = ring_boundary_value(psi0, t.s_kind, ba.direction) * ba.weight;
      bdry.emplace_back(psi_b, detail::mu_integral(*mu, f0, t.r_kind, t.u_limit, quad_order));
    }

    const auto cuts = detail::cell_cuts(t, c, t.u_limit, f0.kinks());
    parts.push_back(integrate_with_cuts(
        c.cell.lo, c.cell.hi, cuts,
        [&](double x) {
          double inner = psi_fin * mu_fin(x);
          for (const auto& [psi_b, mu_b] : bdry) inner += psi_b * mu_b(x);
          return g(x) * t.sigma.density_at(x) * inner;
        },
        quad_order));
  }

  for (const auto& a : t.sigma.atoms) {
    const TripleCell* pc = t.point_cell_at(a.point);
    if (!pc) fail(errc::incomplete_triple, "sigma atom without a fiber cell in '" + t.name + "'");
    const double psi_fin = pc->nu.integrate([&](double s) { return psi0(s); },
                                            [](double) { return 0.0; }, psi0.kinks(), quad_order);
    auto mu_fin = detail::mu_integral(pc->mu_finite, f0, t.r_kind, t.u_limit, quad_order);
    double inner = psi_fin * mu_fin(a.point);
    for (const auto& ba : pc->nu.boundary) {
      const MuFiber* mu = nullptr;
      for (const auto& [dir, fiber] : pc->mu_boundary)
        if (dir == ba.direction || t.s_kind == CompKind::one_point) { mu = &fiber; break; }
      if (!mu)
        fail(errc::incomplete_triple, "missing mu-hat at a charged boundary point of '" + t.name + "'");
      const double psi_b = ring_boundary_value(psi0, t.s_kind, ba.direction) * ba.weight;
      auto mu_b = detail::mu_integral(*mu, f0, t.r_kind, t.u_limit, quad_order);
      inner += psi_b * mu_b(a.point);
    }
    parts.push_back(g(a.point) * a.weight * inner);
  }

  return pairwise_sum(parts);
}

/// Battery moments of a triple, in battery order.
inline std::vector<double> battery_moments(const DMTriple& t, const TestBattery& battery, double p,
                                           int quad_order = 8) {
  std::vector<double> out;
  out.reserve(battery.members.size());
  for (const auto& m : battery.members)
    out.push_back(integrate_triple(t, m.g, m.f0, m.psi0, p, quad_order));
  return out;
}

/// Measure equality in the sense of the laboratory: battery moments agree
/// within the moment tolerance.
inline bool moments_match(const DMTriple& lhs, const DMTriple& rhs, const TestBattery& battery,
                          double p, double tol = 1e-8) {
  const auto a = battery_moments(lhs, battery, p);
  const auto b = battery_moments(rhs, battery, p);
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::fabs(a[i] - b[i]) > tol) return false;
  return true;
}

} // namespace oclab
