#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "oclab/families.hpp"
#include "oclab/limits.hpp"
#include "support/oracles.hpp"

using namespace oclab;
using Catch::Approx;

TEST_CASE("evaluate on the catalog spike family") {
  const auto fam = builtin("ex_first");

  SECTION("flat region") {
    const auto v = evaluate(fam, 4, 0.5);
    CHECK(v.u == 0.0);
    CHECK(v.w == 0.0);
  }
  SECTION("left-limit at the spike top") {
    const auto v = evaluate(fam, 4, 1.0);
    CHECK(v.u == Approx(1.0));
    CHECK(v.w == 4.0);
  }
  SECTION("left endpoint belongs to the first piece") {
    const auto v = evaluate(fam, 1, fam.a);
    CHECK(v.u == 0.0);
    CHECK(v.w == 0.0);
  }
  SECTION("outside the domain") {
    CHECK_THROWS_AS(evaluate(fam, 4, 2.5), Error);
  }
}

TEST_CASE("breakpoints are exact") {
  SECTION("ex_first at k=10") {
    const auto bs = breakpoints(builtin("ex_first"), 10);
    REQUIRE(bs.size() == 5);
    CHECK(bs[0] == 0.0);
    CHECK(bs[1] == 1.0 - 1.0 / 10.0);
    CHECK(bs[2] == 1.0);
    CHECK(bs[3] == 1.0 + 1.0 / 10.0);
    CHECK(bs[4] == 2.0);
  }
  SECTION("ramp at k=2") {
    const auto bs = breakpoints(builtin("ramp"), 2);
    REQUIRE(bs.size() == 4);
    CHECK(bs[0] == -1.0);
    CHECK(bs[1] == 0.0);
    CHECK(bs[2] == 0.5);
    CHECK(bs[3] == 1.0);
  }
  SECTION("sawtooth kinks at multiples of 1/k") {
    const auto bs = breakpoints(builtin("sawtooth"), 1);
    REQUIRE(bs.size() == 3);
    CHECK(bs[0] == 0.0);
    CHECK(bs[1] == 1.0);
    CHECK(bs[2] == 2.0);
  }
}

TEST_CASE("catalog errors") {
  CHECK_THROWS_AS(builtin("exfirst"), Error);
  CHECK_THROWS_AS(builtin("no_such_family"), Error);
}

TEST_CASE("family invariants hold along the schedule") {
  const auto schedule = default_schedule(14);
  for (const auto& name : {"ex_first", "ex_variant", "ex_fixed_u", "ex_simple", "ramp", "sawtooth",
                           "constant(0.5)", "scaling_hat(2)"})
    CHECK_NOTHROW(validate_family(builtin(name), schedule));
}

TEST_CASE("central differences reproduce w_k inside the pieces") {
  // every gradient-consistent catalog family, over the whole schedule
  const auto schedule = default_schedule(14);
  for (const auto& name : {"ex_first", "ex_variant", "ex_simple", "ramp", "sawtooth",
                           "constant(0.5)", "scaling_hat(2)"}) {
    const auto fam = builtin(name);
    for (std::int64_t k : schedule) {
      const FamilyEvaluator at_k(fam, k);
      const auto& ps = at_k.pieces();
      // probe a handful of pieces well away from the kinks
      const std::size_t stride = std::max<std::size_t>(1, ps.size() / 7);
      for (std::size_t i = 0; i < ps.size(); i += stride) {
        const auto& pc = ps[i];
        const double width = pc.hi - pc.lo;
        const double x = pc.lo + 0.5 * width;
        const double h = 0.125 * width;
        const double fd = (at_k(x + h).u - at_k(x - h).u) / (2.0 * h);
        CHECK(fd == Approx(pc.w).margin(1e-7 * std::max(1.0, std::fabs(pc.w))));
      }
    }
  }
}

TEST_CASE("spike masses are exact for every k") {
  const auto one = ring_function("one");
  const auto g = scalar_field("one");

  SECTION("ex_first carries total mass 5") {
    const auto fam = builtin("ex_first");
    for (std::int64_t k : {2, 3, 7, 64, 4096, 16384})
      CHECK(functional_value(fam, k, g, one, one, 1.0) == Approx(5.0).epsilon(1e-14));
  }
  SECTION("ramp gradient has unit L^1 norm") {
    const auto fam = builtin("ramp");
    XRSIntegrand F;
    F.f = [](double, double, double s) { return std::fabs(s); };
    for (std::int64_t k : {1, 2, 5, 100, 16384})
      CHECK(integrate_family(fam, k, F) == Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("scaling family keeps the gradient energy of the profile") {
  const auto fam = builtin("scaling_hat(2)");
  XRSIntegrand F;
  F.f = [](double, double, double s) { return s * s; };
  for (std::int64_t k : {4, 64, 1024}) CHECK(integrate_family(fam, k, F) == Approx(2.0));

  SECTION("u_k collapses in L^2 for p > 1") {
    XRSIntegrand U;
    U.f = [](double, double r, double) { return r * r; };
    CHECK(integrate_family(fam, 1024, U) < 1e-3);
  }
}

TEST_CASE("radial reference for p >= n") {
  ScalingFamily hat;
  hat.profile.segs = {{-1.0, 0.0, 1.0, 1.0}, {0.0, 1.0, -1.0, 1.0}};
  hat.p = 2.0;
  hat.n = 1;
  // p > n: only the gradient survives in the limit
  const double e1 = radial_reference(hat, [](double, double grad) { return grad * grad; });
  CHECK(e1 == Approx(2.0));

  ScalingFamily radial;
  radial.profile.segs = {{0.0, 1.0, -1.0, 1.0}}; // w(r) = 1 - r on the unit disc
  radial.p = 2.0;
  radial.n = 2;
  // p = n = 2: int_{B(0,1)} |grad w|^2 = pi for the cone profile
  const double e2 = radial_reference(radial, [](double, double grad) { return grad * grad; });
  CHECK(e2 == Approx(M_PI));
  // the u-value survives at p = n: int_B (1-r)^2 = 2 pi (1/2 - 2/3 + 1/4)
  const double e3 = radial_reference(radial, [](double u, double) { return u * u; });
  CHECK(e3 == Approx(2.0 * M_PI * (0.5 - 2.0 / 3.0 + 0.25)));
}

TEST_CASE("schedule guards") {
  const auto fam = builtin("ex_first");
  CHECK_THROWS_AS(fam.pieces(0), Error);
  CHECK_THROWS_AS(fam.pieces((std::int64_t(1) << 40) + 1), Error);
  CHECK_THROWS_AS(default_schedule(41), Error);
}

TEST_CASE("randomized continuity property for custom symbolic families") {
  // hand-rolled generator: random increasing rational breakpoints, random
  // slopes, intercepts chained for continuity
  std::mt19937_64 rng(20240817);
  std::uniform_int_distribution<int> nd(2, 6);
  std::uniform_real_distribution<double> sd(-3.0, 3.0);
  for (int trial = 0; trial < 25; ++trial) {
    const int npieces = nd(rng);
    std::vector<detail::SymbolicPiece> pieces;
    double prev_hi_c0 = 0.0;
    std::vector<double> slopes;
    for (int i = 0; i < npieces; ++i) {
      detail::SymbolicPiece sp;
      prev_hi_c0 += 1.0;
      sp.hi.c0 = Rational(std::int64_t(prev_hi_c0));
      if (i + 1 < npieces) sp.hi.c1 = Rational((i * 7 + 3) % 5); // harmless 1/k offsets
      sp.slope.c0 = sd(rng);
      slopes.push_back(sp.slope.c0);
      pieces.push_back(sp);
    }
    PiecewiseFamily fam;
    fam.name = "random";
    fam.a = 0.0;
    fam.b = double(npieces);
    // chain intercepts so u is continuous at the evaluated k
    fam.pieces_fn = [pieces, slopes](std::int64_t k) {
      auto base = detail::symbolic_pieces(0.0, pieces)(k);
      double level = 0.0;
      for (std::size_t i = 0; i < base.size(); ++i) {
        base[i].intercept = level - base[i].slope * base[i].lo;
        base[i].w = base[i].slope;
        level = base[i].slope * base[i].hi + base[i].intercept;
      }
      return base;
    };
    CHECK_NOTHROW(validate_family(fam, {16, 256}));

    // quadrature cross-check against the midpoint oracle
    const std::int64_t k = 37;
    XRSIntegrand F;
    F.r_kinks = {0.5};
    F.f = [](double x, double r, double s) {
      return x * std::fabs(r - 0.5) + s / (1.0 + std::fabs(s));
    };
    const double exact = integrate_family(fam, k, F);
    const FamilyEvaluator at_k(fam, k);
    const double oracle = oracles::riemann(
        [&](double x) {
          const auto v = at_k(x);
          return F.f(x, v.u, v.w);
        },
        fam.a, fam.b, 1 << 12, 1e-10, 4);
    CHECK(exact == Approx(oracle).margin(1e-6 * std::max(1.0, std::fabs(exact))));
  }
}
