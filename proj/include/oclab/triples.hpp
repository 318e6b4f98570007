#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "oclab/families.hpp"
#include "oclab/measures.hpp"

namespace oclab {

// ---------------------------------------------------------------------------
// Reference triples: the closed-form (sigma, nu-hat, mu-hat) tables for the
// catalog families.
// ---------------------------------------------------------------------------

namespace detail {

inline CompactifiedMeasure two_point_boundary(double plus, double minus) {
  CompactifiedMeasure m;
  m.kind = CompKind::two_point;
  if (plus != 0.0) m.boundary.push_back({+1.0, plus});
  if (minus != 0.0) m.boundary.push_back({-1.0, minus});
  return make_probability(std::move(m));
}

inline MuFiber mu_measure(CompactifiedMeasure m) { return MuFiber{false, make_probability(std::move(m))}; }

inline MuFiber mu_dirac_of_u() { return MuFiber{true, {}}; }

inline CompactifiedMeasure seg_measure(double lo, double hi, double mass) {
  CompactifiedMeasure m;
  m.segments.push_back(uniform_segment(lo, hi, mass));
  return m;
}

} // namespace detail

/// Reference triple for a catalog family. The optional exponent override is
/// honored for the families whose triple does not depend on p (sawtooth,
/// constant): their gradients take values in {-1,0,+1}.
inline DMTriple reference_triple(const std::string& name, std::optional<double> p_override = {}) {
  using namespace detail;
  DMTriple t;
  t.name = name;

  if (name == "ex_first" || name == "ex_variant" || name == "ex_fixed_u") {
    t.a = 0.0; t.b = 2.0; t.p = 1.0; t.q = 1.0;
    t.sigma.density = {{0.0, 2.0, Poly{{1.0}}}};
    t.sigma.atoms = {{1.0, 3.0}};
    t.u_limit.segs = {{0.0, 1.0, 0.0, 0.0}, {1.0, 2.0, 0.0, -1.0}};
    TripleCell left{{false, 0.0, 1.0, 0.0}, make_probability(dirac(0.0)), mu_dirac_of_u(), {}};
    TripleCell right{{false, 1.0, 2.0, 0.0}, make_probability(dirac(0.0)), mu_dirac_of_u(), {}};
    TripleCell spike;
    spike.cell = {true, 0.0, 0.0, 1.0};
    spike.nu = two_point_boundary(1.0 / 3.0, 2.0 / 3.0);
    spike.mu_finite = mu_dirac_of_u();
    if (name == "ex_first") {
      spike.mu_boundary = {{+1.0, mu_measure(seg_measure(0.0, 1.0, 1.0))},
                           {-1.0, mu_measure(seg_measure(-1.0, 1.0, 1.0))}};
    } else if (name == "ex_variant") {
      spike.mu_boundary = {{+1.0, mu_measure(seg_measure(-1.0, 0.0, 1.0))},
                           {-1.0, mu_measure(seg_measure(-1.0, 0.0, 1.0))}};
    } else { // ex_fixed_u
      spike.mu_boundary = {{+1.0, mu_measure(dirac(0.0))}, {-1.0, mu_measure(dirac(-1.0))}};
    }
    t.cells = {left, spike, right};
    return t;
  }

  if (name == "ex_simple") {
    t.a = 0.0; t.b = 2.0; t.p = 1.0; t.q = 1.0;
    t.s_kind = CompKind::one_point;
    t.sigma.density = {{0.0, 2.0, Poly{{1.0}}}};
    t.sigma.atoms = {{1.0, 1.0}};
    t.u_limit.segs = {{0.0, 1.0, 0.0, 0.0}, {1.0, 2.0, 0.0, 1.0}};
    TripleCell left{{false, 0.0, 1.0, 0.0}, make_probability(dirac(0.0, CompKind::one_point)),
                    mu_dirac_of_u(), {}};
    TripleCell right{{false, 1.0, 2.0, 0.0}, make_probability(dirac(0.0, CompKind::one_point)),
                     mu_dirac_of_u(), {}};
    TripleCell spike;
    spike.cell = {true, 0.0, 0.0, 1.0};
    CompactifiedMeasure nu_inf;
    nu_inf.kind = CompKind::one_point;
    nu_inf.boundary = {{+1.0, 1.0}};
    spike.nu = make_probability(std::move(nu_inf));
    spike.mu_finite = mu_dirac_of_u();
    spike.mu_boundary = {{+1.0, mu_measure(seg_measure(0.0, 1.0, 1.0))}};
    t.cells = {left, spike, right};
    return t;
  }

  if (name == "ramp") {
    t.a = -1.0; t.b = 1.0; t.p = 1.0; t.q = 2.0;
    t.sigma.density = {{-1.0, 1.0, Poly{{1.0}}}};
    t.sigma.atoms = {{0.0, 1.0}};
    t.u_limit.segs = {{-1.0, 0.0, 0.0, 0.0}, {0.0, 1.0, 0.0, 1.0}};
    TripleCell left{{false, -1.0, 0.0, 0.0}, make_probability(dirac(0.0)), mu_dirac_of_u(), {}};
    TripleCell right{{false, 0.0, 1.0, 0.0}, make_probability(dirac(0.0)), mu_dirac_of_u(), {}};
    TripleCell spike;
    spike.cell = {true, 0.0, 0.0, 0.0};
    spike.nu = two_point_boundary(1.0, 0.0);
    spike.mu_finite = mu_dirac_of_u();
    spike.mu_boundary = {{+1.0, mu_measure(seg_measure(0.0, 1.0, 1.0))}};
    t.cells = {left, spike, right};
    return t;
  }

  if (name == "sawtooth") {
    t.a = 0.0; t.b = 2.0;
    t.p = p_override.value_or(2.0);
    t.q = 2.0;
    t.sigma.density = {{0.0, 2.0, Poly{{2.0}}}}; // 1 + |s|^p = 2 on slopes +-1
    t.u_limit.segs = {{0.0, 2.0, 0.0, 0.0}};
    CompactifiedMeasure nu;
    nu.atoms = {{-1.0, 0.5}, {1.0, 0.5}};
    TripleCell cell{{false, 0.0, 2.0, 0.0}, make_probability(std::move(nu)), mu_dirac_of_u(), {}};
    t.cells = {cell};
    return t;
  }

  double param = 0.0;
  if (detail::parse_named_param(name, "constant", param)) {
    const double c = param;
    t.a = 0.0; t.b = 1.0;
    t.p = p_override.value_or(1.0);
    t.q = 1.0;
    t.sigma.density = {{0.0, 1.0, Poly{{1.0}}}};
    t.u_limit.segs = {{0.0, 1.0, 0.0, c}};
    TripleCell cell{{false, 0.0, 1.0, 0.0}, make_probability(dirac(0.0)), mu_dirac_of_u(), {}};
    t.cells = {cell};
    return t;
  }
  param = 2.0;
  if (detail::parse_named_param(name, "scaling_hat", param)) {
    t.a = -1.0; t.b = 1.0;
    t.p = param;
    t.q = 1.0;
    t.sigma.density = {{-1.0, 1.0, Poly{{1.0}}}};
    t.sigma.atoms = {{0.0, 2.0}}; // int |hat'|^p = 2 for every p
    t.u_limit.segs = {{-1.0, 1.0, 0.0, 0.0}};
    TripleCell cell{{false, -1.0, 1.0, 0.0}, make_probability(dirac(0.0)), mu_dirac_of_u(), {}};
    TripleCell spike;
    spike.cell = {true, 0.0, 0.0, 0.0};
    spike.nu = two_point_boundary(0.5, 0.5);
    spike.mu_finite = mu_dirac_of_u();
    spike.mu_boundary = {{+1.0, mu_dirac_of_u()}, {-1.0, mu_dirac_of_u()}};
    t.cells = {cell, spike};
    return t;
  }
  fail(errc::catalog, "no reference triple for '" + name + "'");
}

// ---------------------------------------------------------------------------
// JSON serialization (the report format; doubles round-trip bit-exactly)
// ---------------------------------------------------------------------------

using json = nlohmann::json;

inline json to_json(const CompactifiedMeasure& m) {
  json j;
  j["kind"] = to_string(m.kind);
  j["atoms"] = json::array();
  for (const auto& a : m.atoms) j["atoms"].push_back({{"s", a.point}, {"w", a.weight}});
  j["segments"] = json::array();
  for (const auto& s : m.segments)
    j["segments"].push_back({{"lo", s.lo},
                             {"hi", s.hi},
                             {"amp", s.amp},
                             {"density", s.density == Segment::Density::uniform ? "uniform" : "young"},
                             {"p", s.p}});
  j["boundary"] = json::array();
  for (const auto& b : m.boundary) j["boundary"].push_back({{"direction", b.direction}, {"w", b.weight}});
  return j;
}

inline CompactifiedMeasure measure_from_json(const json& j) {
  CompactifiedMeasure m;
  m.kind = comp_kind_from_string(j.at("kind").get<std::string>());
  for (const auto& a : j.value("atoms", json::array()))
    m.atoms.push_back({a.at("s").get<double>(), a.at("w").get<double>()});
  for (const auto& s : j.value("segments", json::array())) {
    Segment seg;
    seg.lo = s.at("lo").get<double>();
    seg.hi = s.at("hi").get<double>();
    seg.amp = s.at("amp").get<double>();
    seg.density = s.value("density", "uniform") == std::string("uniform")
                      ? Segment::Density::uniform
                      : Segment::Density::young_weighted;
    seg.p = s.value("p", 1.0);
    m.segments.push_back(seg);
  }
  for (const auto& b : j.value("boundary", json::array()))
    m.boundary.push_back({b.at("direction").get<double>(), b.at("w").get<double>()});
  return m;
}

inline json to_json(const MuFiber& f) {
  if (f.dirac_of_u) return json("dirac_of_u");
  return to_json(f.measure);
}

inline MuFiber mu_from_json(const json& j) {
  if (j.is_string() && j.get<std::string>() == "dirac_of_u") return MuFiber{true, {}};
  return MuFiber{false, measure_from_json(j)};
}

inline json to_json(const PiecewiseFn& f) {
  json j = json::array();
  for (const auto& s : f.segs)
    j.push_back({{"lo", s.lo}, {"hi", s.hi}, {"slope", s.slope}, {"intercept", s.intercept}});
  return j;
}

inline PiecewiseFn piecewise_from_json(const json& j) {
  PiecewiseFn f;
  for (const auto& s : j)
    f.segs.push_back({s.at("lo").get<double>(), s.at("hi").get<double>(),
                      s.at("slope").get<double>(), s.at("intercept").get<double>()});
  return f;
}

inline json to_json(const DMTriple& t) {
  json j;
  j["name"] = t.name;
  j["domain"] = {t.a, t.b};
  j["p"] = t.p;
  j["q"] = t.q;
  j["s_kind"] = to_string(t.s_kind);
  j["r_kind"] = to_string(t.r_kind);
  j["sigma"]["density"] = json::array();
  for (const auto& d : t.sigma.density)
    j["sigma"]["density"].push_back({{"lo", d.lo}, {"hi", d.hi}, {"coeffs", d.density.coeffs}});
  j["sigma"]["atoms"] = json::array();
  for (const auto& a : t.sigma.atoms) j["sigma"]["atoms"].push_back({{"x", a.point}, {"w", a.weight}});
  j["u_limit"] = to_json(t.u_limit);
  j["cells"] = json::array();
  for (const auto& c : t.cells) {
    json jc;
    if (c.cell.is_point)
      jc["point"] = c.cell.point;
    else
      jc["interval"] = {c.cell.lo, c.cell.hi};
    jc["nu"] = to_json(c.nu);
    jc["mu_finite"] = to_json(c.mu_finite);
    jc["mu_boundary"] = json::array();
    for (const auto& [dir, fiber] : c.mu_boundary)
      jc["mu_boundary"].push_back({{"direction", dir}, {"fiber", to_json(fiber)}});
    j["cells"].push_back(jc);
  }
  return j;
}

inline DMTriple triple_from_json(const json& j) {
  DMTriple t;
  t.name = j.value("name", "custom");
  t.a = j.at("domain").at(0).get<double>();
  t.b = j.at("domain").at(1).get<double>();
  t.p = j.at("p").get<double>();
  t.q = j.value("q", 1.0);
  t.s_kind = comp_kind_from_string(j.value("s_kind", "two_point"));
  t.r_kind = comp_kind_from_string(j.value("r_kind", "two_point"));
  for (const auto& d : j.at("sigma").value("density", json::array())) {
    DensityPiece dp;
    dp.lo = d.at("lo").get<double>();
    dp.hi = d.at("hi").get<double>();
    dp.density.coeffs = d.at("coeffs").get<std::vector<double>>();
    t.sigma.density.push_back(dp);
  }
  for (const auto& a : j.at("sigma").value("atoms", json::array()))
    t.sigma.atoms.push_back({a.at("x").get<double>(), a.at("w").get<double>()});
  t.u_limit = piecewise_from_json(j.at("u_limit"));
  for (const auto& jc : j.at("cells")) {
    TripleCell c;
    if (jc.contains("point")) {
      c.cell.is_point = true;
      c.cell.point = jc.at("point").get<double>();
    } else {
      c.cell.lo = jc.at("interval").at(0).get<double>();
      c.cell.hi = jc.at("interval").at(1).get<double>();
    }
    c.nu = measure_from_json(jc.at("nu"));
    c.mu_finite = mu_from_json(jc.at("mu_finite"));
    for (const auto& mb : jc.value("mu_boundary", json::array()))
      c.mu_boundary.emplace_back(mb.at("direction").get<double>(), mu_from_json(mb.at("fiber")));
    t.cells.push_back(c);
  }
  return t;
}

} // namespace oclab
