#pragma once

#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "oclab/common.hpp"
#include "oclab/compactify.hpp"
#include "oclab/families.hpp"
#include "oclab/limits.hpp"
#include "oclab/lsc.hpp"
#include "oclab/parallel.hpp"
#include "oclab/quasiconvex.hpp"
#include "oclab/represent.hpp"
#include "oclab/triples.hpp"

namespace oclab {

// ---------------------------------------------------------------------------
// Report rows: one fixed, versioned CSV schema shared by all pipelines;
// fields that do not apply to a row stay empty.
// ---------------------------------------------------------------------------

inline constexpr const char* kCsvSchemaLine = "#schema=1";

struct CsvRow {
  std::string scenario, pipeline, family;
  std::string g, f0, psi0;
  std::optional<std::int64_t> k;
  std::optional<double> I_k, limit, error_bar, predicted;
  std::optional<double> s0;
  std::optional<int> N, M;
  std::optional<double> value;
  std::string integrand;
  std::optional<double> oscillation, concentration, total, empirical;
  std::optional<double> gap, condition_value;
  std::string verdict;
  bool pass = true;
};

inline std::string csv_header() {
  return "scenario,pipeline,family,g,f0,psi0,k,I_k,limit,error_bar,predicted,s0,N,M,value,"
         "integrand,oscillation,concentration,total,empirical,gap,condition_value,verdict,pass";
}

inline std::string csv_line(const CsvRow& r) {
  auto num = [](const auto& opt) -> std::string {
    if (!opt) return "";
    return format_double(double(*opt));
  };
  std::string out;
  auto put = [&out](const std::string& s) {
    out += s;
    out += ',';
  };
  put(r.scenario); put(r.pipeline); put(r.family);
  put(r.g); put(r.f0); put(r.psi0);
  put(r.k ? std::to_string(*r.k) : "");
  put(num(r.I_k)); put(num(r.limit)); put(num(r.error_bar)); put(num(r.predicted));
  put(num(r.s0));
  put(r.N ? std::to_string(*r.N) : "");
  put(r.M ? std::to_string(*r.M) : "");
  put(num(r.value));
  put(r.integrand);
  put(num(r.oscillation)); put(num(r.concentration)); put(num(r.total)); put(num(r.empirical));
  put(num(r.gap)); put(num(r.condition_value));
  put(r.verdict);
  out += r.pass ? "true" : "false";
  return out;
}

struct RunOptions {
  int k_max_exp = 14;
  int quad_order = 8;
  int jobs = 1;
  bool trace = false; // additionally emit one row per (battery member, k)
  std::uint64_t seed = kDefaultSeed;
};

struct RunReport {
  std::vector<CsvRow> rows;
  std::vector<CsvRow> trace_rows; // per-(battery, k) samples when requested
  int exit_code = 0;
  std::string summary;
};

// ---------------------------------------------------------------------------
// Scenario model
// ---------------------------------------------------------------------------

namespace scenario_detail {

using json = nlohmann::json;

struct Context {
  RunOptions options;
  double limit_tol = 1e-3;
  double mass_tol = 1e-10;
  std::map<std::string, PiecewiseFamily> families;
  std::map<std::string, DMTriple> triples;
  std::map<std::string, TestBattery> batteries;
};

[[noreturn]] inline void field_error(const std::string& field, const std::string& what) {
  fail(errc::config, field + ": " + what);
}

inline PiecewiseFamily resolve_family(const Context& ctx, const std::string& name,
                                      const std::string& field) {
  auto it = ctx.families.find(name);
  if (it != ctx.families.end()) return it->second;
  try {
    return builtin(name);
  } catch (const Error&) {
    field_error(field, "unknown family '" + name + "'");
  }
}

inline DMTriple resolve_triple(const Context& ctx, const std::string& name, const std::string& field) {
  auto it = ctx.triples.find(name);
  if (it != ctx.triples.end()) return it->second;
  try {
    return reference_triple(name);
  } catch (const Error&) {
    field_error(field, "unknown triple '" + name + "'");
  }
}

inline TestBattery resolve_battery(const Context& ctx, const std::string& name,
                                   const std::string& field) {
  if (name == "default") return default_battery();
  auto it = ctx.batteries.find(name);
  if (it != ctx.batteries.end()) return it->second;
  field_error(field, "unknown battery '" + name + "'");
}

inline Rational rational_from_json(const json& j, const std::string& field) {
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  if (j.is_array() && j.size() == 2)
    return Rational(j.at(0).get<std::int64_t>(), j.at(1).get<std::int64_t>());
  field_error(field, "expected an integer or a [num,den] pair");
}

inline CoefExpr coef_from_json(const json& j) {
  CoefExpr c;
  if (j.is_number()) {
    c.c0 = j.get<double>();
    return c;
  }
  c.c0 = j.value("c", 0.0);
  c.ck = j.value("k", 0.0);
  c.cinvk = j.value("inv_k", 0.0);
  return c;
}

/// Custom family: symbolic pieces with rational breakpoint offsets and
/// coefficients affine in k and 1/k.
inline PiecewiseFamily family_from_json(const json& j, const std::string& field) {
  PiecewiseFamily f;
  f.name = j.at("name").get<std::string>();
  f.a = j.at("domain").at(0).get<double>();
  f.b = j.at("domain").at(1).get<double>();
  f.p = j.value("p", 1.0);
  f.q = j.value("q", 1.0);
  f.p_sup = j.value("p_sup", f.p);
  f.gradient_consistent = j.value("gradient_consistent", true);
  f.continuous_u = j.value("continuous_u", true);
  f.uniform_convergence = j.value("uniform_convergence", false);
  f.u_bound = j.value("u_bound", 0.0);
  if (j.contains("u_limit")) f.u_limit = piecewise_from_json(j.at("u_limit"));
  std::vector<detail::SymbolicPiece> pieces;
  for (const auto& pj : j.at("pieces")) {
    detail::SymbolicPiece sp;
    sp.hi.c0 = rational_from_json(pj.at("hi").at("c0"), field + ".pieces.hi.c0");
    if (pj.at("hi").contains("c1"))
      sp.hi.c1 = rational_from_json(pj.at("hi").at("c1"), field + ".pieces.hi.c1");
    sp.slope = coef_from_json(pj.value("slope", json(0.0)));
    sp.intercept = coef_from_json(pj.value("intercept", json(0.0)));
    sp.w = coef_from_json(pj.value("w", json(0.0)));
    pieces.push_back(sp);
  }
  if (pieces.empty()) field_error(field, "custom family needs pieces");
  f.pieces_fn = detail::symbolic_pieces(f.a, std::move(pieces));
  for (auto& seg : f.u_limit.segs) f.oscillation.push_back(OscillationAtoms{{{seg.slope, 1.0}}});
  return f;
}

inline BatteryMember member_from_json(const json& j, const std::string& field) {
  try {
    return {scalar_field(j.value("g", "one")), ring_function(j.value("f0", "one")),
            ring_function(j.value("psi0", "one"))};
  } catch (const Error& e) {
    field_error(field, e.what());
  }
}

/// Kind compatibility of a battery against a triple: every member must have
/// boundary data for the triple's compactifications.
inline void check_battery_kinds(const TestBattery& battery, const DMTriple& t,
                                const std::string& field) {
  for (std::size_t i = 0; i < battery.members.size(); ++i) {
    const auto& m = battery.members[i];
    try {
      ring_boundary_value(m.psi0, t.s_kind, +1.0);
      ring_boundary_value(m.psi0, t.s_kind, -1.0);
      ring_boundary_value(m.f0, t.r_kind, +1.0);
      ring_boundary_value(m.f0, t.r_kind, -1.0);
    } catch (const Error& e) {
      field_error(field + ".battery[" + std::to_string(i) + "]", e.what());
    }
  }
}

// ---------------------------------------------------------------------------
// Pipelines
// ---------------------------------------------------------------------------

struct Block {
  std::vector<CsvRow> rows;
  std::vector<CsvRow> trace;
};

inline Block run_verify(const Context& ctx, const json& sj, const std::string& name,
                        const std::string& field, int jobs) {
  const auto fam = resolve_family(ctx, sj.value("family", ""), field + ".family");
  const auto triple = resolve_triple(ctx, sj.value("triple", fam.name), field + ".triple");
  const auto battery = resolve_battery(ctx, sj.value("battery", "default"), field + ".battery");
  check_battery_kinds(battery, triple, field);
  const double p = sj.value("p", triple.p);
  if (p > fam.p_sup + 1e-12)
    field_error(field + ".p", "family '" + fam.name + "' is not bounded in L^p for p = " +
                                  format_double(p));
  if (std::fabs(p - triple.p) > 1e-12)
    field_error(field + ".p", "exponent does not match the triple '" + triple.name + "'");
  const auto schedule = default_schedule(ctx.options.k_max_exp);
  const double tol = sj.value("limit_tol", ctx.limit_tol);
  const auto report =
      empirical_triple_check(fam, triple, battery, p, schedule, tol, ctx.options.quad_order, jobs);
  Block block;
  for (const auto& r : report.rows) {
    CsvRow row;
    row.scenario = name;
    row.pipeline = "verify";
    row.family = fam.name;
    row.g = r.g; row.f0 = r.f0; row.psi0 = r.psi0;
    row.k = r.empirical.ks.back();
    row.I_k = r.empirical.samples.back();
    row.limit = r.empirical.value;
    row.error_bar = r.empirical.error_bar;
    row.predicted = r.predicted;
    row.verdict = r.empirical.diverged ? "divergence_warning" : "";
    row.pass = r.pass;
    block.rows.push_back(row);
    if (ctx.options.trace)
      for (std::size_t i = 0; i < r.empirical.ks.size(); ++i) {
        CsvRow tr = row;
        tr.k = r.empirical.ks[i];
        tr.I_k = r.empirical.samples[i];
        block.trace.push_back(tr);
      }
  }
  return block;
}

inline Block run_dual(const Context& ctx, const json& sj, const std::string& name,
                      const std::string& field, int jobs) {
  const auto fam = resolve_family(ctx, sj.value("family", ""), field + ".family");
  const double q = sj.value("q", fam.q);
  const auto battery = resolve_battery(ctx, sj.value("battery", "default"), field + ".battery");
  const auto schedule = default_schedule(ctx.options.k_max_exp);
  const double tol = sj.value("limit_tol", ctx.limit_tol);
  DMTriple dual;
  try {
    dual = dual_triple(fam, q, schedule, ctx.options.quad_order);
  } catch (const Error& e) {
    field_error(field, e.what());
  }
  check_battery_kinds(battery, dual, field);
  auto rows = parallel_map(battery.members.size(), jobs, [&](std::size_t i) {
    const auto& m = battery.members[i];
    CsvRow row;
    row.scenario = name;
    row.pipeline = "dual";
    row.family = fam.name;
    row.g = m.g.name; row.f0 = m.f0.name(); row.psi0 = m.psi0.name();
    const auto est = limit_extrapolate_dual(fam, m.g, m.f0, m.psi0, q, schedule,
                                            ctx.options.quad_order, 1);
    row.k = est.ks.back();
    row.I_k = est.samples.back();
    row.limit = est.value;
    row.error_bar = est.error_bar;
    row.predicted = integrate_triple(dual, m.g, m.f0, m.psi0, dual.p, ctx.options.quad_order);
    row.pass = std::fabs(est.value - *row.predicted) <= std::max(tol, 3.0 * est.error_bar);
    row.verdict = est.diverged ? "divergence_warning" : "";
    return row;
  });
  return Block{std::move(rows), {}};
}

inline Block run_envelope(const Context& ctx, const json& sj, const std::string& name,
                          const std::string& field, int jobs) {
  ScalarPsi psi;
  const std::string psi_name = sj.value("psi", "double_well");
  try {
    psi = envelope_psi(psi_name);
  } catch (const Error& e) {
    field_error(field + ".psi", e.what());
  }
  const int N = sj.value("grid", 64);
  const int M = sj.value("starts", 16);
  std::vector<double> s0s;
  if (sj.contains("s0") && sj.at("s0").is_array())
    s0s = sj.at("s0").get<std::vector<double>>();
  else
    s0s.push_back(sj.value("s0", 0.0));
  std::optional<std::pair<double, double>> expect;
  if (sj.contains("expect_range"))
    expect = {sj.at("expect_range").at(0).get<double>(), sj.at("expect_range").at(1).get<double>()};
  const int start_jobs = s0s.size() == 1 ? jobs : 1;
  auto rows = parallel_map(s0s.size(), jobs, [&](std::size_t i) {
    CsvRow row;
    row.scenario = name;
    row.pipeline = "envelope";
    row.psi0 = psi_name;
    row.s0 = s0s[i];
    row.N = N;
    row.M = M;
    row.value = qc_envelope_upper(psi, s0s[i], N, M, ctx.options.seed, start_jobs);
    row.pass = !expect || (*row.value >= expect->first - 1e-12 && *row.value <= expect->second + 1e-12);
    return row;
  });
  return Block{std::move(rows), {}};
}

inline Block run_lsc(const Context& ctx, const json& sj, const std::string& name,
                     const std::string& field, int /*jobs*/) {
  const auto fam = resolve_family(ctx, sj.value("family", ""), field + ".family");
  Integrand h;
  try {
    h = integrand(sj.value("integrand", ""));
  } catch (const Error& e) {
    field_error(field + ".integrand", e.what());
  }
  if (h.p > fam.p_sup + 1e-12)
    field_error(field + ".integrand", "integrand growth p exceeds the family's L^p class");
  const auto schedule = default_schedule(ctx.options.k_max_exp);
  const double tol = sj.value("limit_tol", ctx.limit_tol);

  CsvRow row;
  row.scenario = name;
  row.pipeline = "lsc";
  row.family = fam.name;
  row.integrand = h.name;
  const auto res = lsc_gap(fam, h, schedule, ctx.options.quad_order, 1);
  row.gap = res.gap;
  row.empirical = res.liminf.value;
  row.error_bar = res.liminf.error_bar;
  // decomposition and boundary condition when a reference triple exists
  std::optional<DMTriple> triple;
  if (sj.contains("triple")) {
    triple = resolve_triple(ctx, sj.at("triple").get<std::string>(), field + ".triple");
  } else {
    try {
      triple = reference_triple(fam.name);
    } catch (const Error&) {
      // gap-only row
    }
  }
  if (triple) {
    const bool p_free = fam.p_sup == std::numeric_limits<double>::infinity();
    if (std::fabs(triple->p - h.p) < 1e-12 || p_free) {
      DMTriple t = *triple;
      t.p = h.p; // sawtooth/constant triples carry slopes in {-1,0,+1}
      const auto rep = represent_limit(fam, t, h, ctx.options.quad_order);
      row.oscillation = rep.oscillation;
      row.concentration = rep.concentration;
      row.total = rep.total;
    }
    if (h.h01.present)
      row.condition_value = plessn_condition(*triple, h.h01, h.r_kinks, ctx.options.quad_order);
  }
  row.verdict = lsc_verdict(res.gap, tol) +
                (row.condition_value ? ("/" + condition_verdict(row.condition_value)) : "");
  if (sj.contains("expect_gap"))
    row.pass = std::fabs(res.gap - sj.at("expect_gap").get<double>()) <= tol;
  else
    row.pass = res.gap >= -tol;
  return Block{{row}, {}};
}

inline Context build_context(const json& doc, const RunOptions& options) {
  Context ctx;
  ctx.options = options;
  if (doc.contains("defaults")) {
    const auto& d = doc.at("defaults");
    ctx.limit_tol = d.value("limit_tol", ctx.limit_tol);
    ctx.mass_tol = d.value("mass_tol", ctx.mass_tol);
  }
  for (const auto& fj : doc.value("families", json::array())) {
    auto fam = family_from_json(fj, "families");
    validate_family(fam, {16, 1024});
    ctx.families.emplace(fam.name, std::move(fam));
  }
  for (const auto& tj : doc.value("triples", json::array())) {
    auto t = triple_from_json(tj);
    ctx.triples.emplace(t.name, std::move(t));
  }
  for (const auto& bj : doc.value("batteries", json::array())) {
    TestBattery b;
    b.name = bj.at("name").get<std::string>();
    std::size_t i = 0;
    for (const auto& mj : bj.at("members"))
      b.members.push_back(member_from_json(mj, "batteries." + b.name + "[" + std::to_string(i++) + "]"));
    ctx.batteries.emplace(b.name, std::move(b));
  }
  return ctx;
}

} // namespace scenario_detail

/// Executes every scenario in the parsed file. Scenarios run in parallel;
/// rows are emitted in declaration order, so the report bytes do not depend
/// on the worker count.
inline RunReport run_scenarios(const nlohmann::json& doc, const RunOptions& options) {
  using scenario_detail::field_error;
  const auto ctx = scenario_detail::build_context(doc, options);
  if (!doc.contains("scenarios") || !doc.at("scenarios").is_array() || doc.at("scenarios").empty())
    fail(errc::config, "scenarios: the file declares no scenarios");
  const auto& list = doc.at("scenarios");

  const int outer_jobs = options.jobs;
  const int inner_jobs = list.size() == 1 ? options.jobs : 1;

  auto blocks = parallel_map(list.size(), outer_jobs, [&](std::size_t i) -> scenario_detail::Block {
    const auto& sj = list.at(i);
    const std::string field = "scenarios[" + std::to_string(i) + "]";
    if (!sj.contains("name")) field_error(field, "missing name");
    const std::string name = sj.at("name").get<std::string>();
    if (name.find_first_of(",\n\r") != std::string::npos)
      field_error(field + ".name", "names may not contain commas or line breaks");
    const std::string pipeline = sj.value("pipeline", "verify");
    if (pipeline == "verify") return scenario_detail::run_verify(ctx, sj, name, field, inner_jobs);
    if (pipeline == "dual") return scenario_detail::run_dual(ctx, sj, name, field, inner_jobs);
    if (pipeline == "envelope") return scenario_detail::run_envelope(ctx, sj, name, field, inner_jobs);
    if (pipeline == "lsc") return scenario_detail::run_lsc(ctx, sj, name, field, inner_jobs);
    field_error(field + ".pipeline", "unknown pipeline '" + pipeline + "'");
  });

  RunReport report;
  std::size_t passed = 0, total = 0;
  for (auto& block : blocks) {
    for (auto& row : block.rows) {
      total += 1;
      passed += row.pass ? 1 : 0;
      report.rows.push_back(std::move(row));
    }
    for (auto& row : block.trace) report.trace_rows.push_back(std::move(row));
  }
  report.exit_code = passed == total ? 0 : 1;
  std::ostringstream os;
  os << passed << "/" << total << " rows passed";
  report.summary = os.str();
  return report;
}

inline RunReport run_scenario_file(const std::string& path, const RunOptions& options) {
  std::ifstream in(path);
  if (!in) fail(errc::config, "cannot open scenario file '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const std::exception& e) {
    fail(errc::config, "scenario parse error in '" + path + "': " + e.what());
  }
  return run_scenarios(doc, options);
}

inline std::string rows_to_csv(const std::vector<CsvRow>& rows) {
  std::string out;
  out += kCsvSchemaLine;
  out += '\n';
  out += csv_header();
  out += '\n';
  for (const auto& r : rows) {
    out += csv_line(r);
    out += '\n';
  }
  return out;
}

inline std::string report_to_csv(const RunReport& report) { return rows_to_csv(report.rows); }

} // namespace oclab
