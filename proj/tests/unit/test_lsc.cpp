#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oclab/lsc.hpp"

using namespace oclab;
using Catch::Approx;

TEST_CASE("gap values on the classic oscillation example") {
  const auto schedule = default_schedule(14);
  const auto fam = builtin("sawtooth");

  SECTION("convex integrand: positive gap of size |Omega|") {
    const auto res = lsc_gap(fam, integrand("grad_sq"), schedule);
    CHECK(res.gap == Approx(fam.length()).margin(1e-3));
    CHECK(res.at_limit == Approx(0.0).margin(1e-15));
  }
  SECTION("double-well: the non-quasiconvex failure") {
    const auto res = lsc_gap(fam, integrand("grad_double_well"), schedule);
    CHECK(res.gap == Approx(-fam.length()).margin(1e-3));
    CHECK(res.liminf.value == Approx(0.0).margin(1e-9));
  }
  SECTION("constant family: zero gap") {
    const auto res = lsc_gap(builtin("constant(0.5)"), integrand("grad_sq"), schedule);
    CHECK(res.gap == Approx(0.0).margin(1e-12));
  }
}

TEST_CASE("boundary condition values on the spike family") {
  const auto t = reference_triple("ex_first");

  SECTION("no boundary mass means a trivially satisfied condition") {
    const auto ts = reference_triple("sawtooth");
    CHECK(plessn_condition(ts, integrand("conc_abs").h01) == Approx(0.0).margin(1e-15));
  }
  SECTION("even recession sums the fiber weights") {
    CHECK(plessn_condition(t, integrand("conc_abs").h01) == Approx(3.0));
  }
  SECTION("odd recession sees the direction split") {
    CHECK(plessn_condition(t, integrand("conc_signed").h01) == Approx(-1.0));
  }
  SECTION("verdict strings") {
    CHECK(condition_verdict(3.0) == "satisfied");
    CHECK(condition_verdict(-1.0) == "negative");
    CHECK(condition_verdict(std::nullopt) == "n/a");
    CHECK(lsc_verdict(0.5) == "lsc_along_sequence");
    CHECK(lsc_verdict(-0.5) == "lsc_fails");
  }
  SECTION("an h02-only integrand has no boundary restriction to test") {
    CHECK_THROWS_AS(plessn_condition(t, integrand("h02_one").h01), Error);
  }
}

TEST_CASE("gap agrees with the representation total") {
  const auto schedule = default_schedule(14);
  struct Pair { const char* family; const char* h; };
  const Pair pairs[] = {{"ex_first", "u_weight"}, {"ramp", "conc_abs"}, {"sawtooth", "grad_sq"},
                        {"constant(0.5)", "u_weight"}};
  for (const auto& pr : pairs) {
    CAPTURE(pr.family, pr.h);
    const auto fam = builtin(pr.family);
    const auto h = integrand(pr.h);
    auto triple = reference_triple(pr.family);
    if (std::fabs(triple.p - h.p) > 1e-12) triple.p = h.p;
    const auto res = lsc_gap(fam, h, schedule);
    const auto rep = represent_limit(fam, triple, h);
    const double gap_via_rep = rep.total - functional_at_limit(fam.u_limit, fam.a, fam.b, h);
    CHECK(res.gap == Approx(gap_via_rep).margin(1e-3));
  }
}

TEST_CASE("convex integrand with nonnegative boundary condition keeps the gap nonnegative") {
  // the quasiconvexity chain: h(x,u(x),.) convex in 1D plus a nonnegative
  // boundary term force lsc along the catalog sequences
  const auto schedule = default_schedule(14);
  struct Pair { const char* family; const char* h; };
  const Pair pairs[] = {{"ex_first", "conc_abs"}, {"ramp", "conc_abs"}, {"ex_simple", "conc_abs"},
                        {"sawtooth", "grad_sq"},  {"scaling_hat(2)", "grad_sq"}};
  for (const auto& pr : pairs) {
    CAPTURE(pr.family, pr.h);
    const auto fam = builtin(pr.family);
    const auto h = integrand(pr.h);
    auto triple = reference_triple(pr.family);
    if (std::fabs(triple.p - h.p) > 1e-12) triple.p = h.p;
    const double condition = plessn_condition(triple, h.h01, h.r_kinks);
    REQUIRE(condition >= -1e-12);
    const auto res = lsc_gap(fam, h, schedule);
    CHECK(res.gap >= -1e-3);
  }
}
