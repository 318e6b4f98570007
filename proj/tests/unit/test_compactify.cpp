#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oclab/compactify.hpp"

using namespace oclab;
using Catch::Approx;

TEST_CASE("lift attaches the growth factor") {
  SECTION("constant ring function, p=1") {
    const auto psi = lift(ring_function("one"), 1.0);
    CHECK(psi(0.0) == 1.0);
    CHECK(psi(3.0) == 4.0);
    CHECK(psi(-3.0) == 4.0);
  }
  SECTION("abs_frac lifts to |s| exactly") {
    const auto psi = lift(ring_function("abs_frac"), 1.0);
    CHECK(psi(3.0) == 3.0);
    CHECK(psi(-0.5) == 0.5);
    CHECK(psi(0.0) == 0.0);
  }
  SECTION("signed_frac lifts to the identity") {
    const auto psi = lift(ring_function("signed_frac"), 1.0);
    CHECK(psi(3.0) == 3.0);
    CHECK(psi(-3.0) == -3.0);
  }
  SECTION("p below 1 is rejected") {
    CHECK_THROWS_AS(lift(ring_function("one"), 0.5), Error);
  }
}

TEST_CASE("lift then divide recovers the ring function") {
  for (const auto* name : {"one", "abs_frac", "signed_frac", "bump", "pythag_frac", "clamp_id(1)"}) {
    const auto psi0 = ring_function(name);
    for (double p : {1.0, 2.0, 4.0}) {
      const auto psi = lift(psi0, p);
      for (double s : {-7.5, -1.0, -0.25, 0.0, 0.5, 2.0, 19.0}) {
        const double back = psi(s) / (1.0 + std::pow(std::fabs(s), p));
        CHECK(back == Approx(psi0(s)).margin(1e-15));
      }
    }
  }
}

TEST_CASE("recession values") {
  SECTION("even function") {
    CHECK(recession(ring_function("abs_frac"), -1.0) == 1.0);
    CHECK(recession(ring_function("abs_frac"), +1.0) == 1.0);
  }
  SECTION("odd function") {
    CHECK(recession(ring_function("signed_frac"), -1.0) == -1.0);
    CHECK(recession(ring_function("signed_frac"), +1.0) == 1.0);
  }
  SECTION("C0 functions have zero boundary values") {
    CHECK(recession(ring_function("bump"), +1.0) == 0.0);
    CHECK(recession(ring_function("bump"), -1.0) == 0.0);
  }
  SECTION("one-point functions reject a direction") {
    CHECK_THROWS_AS(recession(ring_function("abs_frac_pt"), 1.0), Error);
    CHECK(recession(ring_function("abs_frac_pt")) == 1.0);
    CHECK_THROWS_AS(recession(ring_function("abs_frac")), Error);
  }
}

TEST_CASE("sphere decomposition") {
  SECTION("pure direction part evaluates to theta_1 at e1") {
    SphereDecomposition sd;
    sd.dimension = 2;
    sd.p = 1.0;
    sd.c = 0.0;
    sd.psi01 = [](const std::vector<double>& theta) { return theta.at(0); };
    CHECK(sd.recession({1.0, 0.0}) == 1.0);
    CHECK(sd.recession({0.0, 1.0}) == 0.0);
    // finite values approach the boundary value along the ray
    CHECK(sd({1e6, 0.0}) == Approx(1.0).margin(1e-4));
  }
  SECTION("ray convergence along 8 sampled directions at |s| = 1e6") {
    SphereDecomposition sd;
    sd.dimension = 2;
    sd.p = 2.0;
    sd.c = 0.5;
    sd.psi00 = [](const std::vector<double>& s) { return 1.0 / (1.0 + s.at(0) * s.at(0) + s.at(1) * s.at(1)); };
    sd.psi01 = [](const std::vector<double>& theta) { return theta.at(0) * theta.at(1); };
    for (int i = 0; i < 8; ++i) {
      const double angle = 2.0 * M_PI * i / 8.0;
      const std::vector<double> dir = {std::cos(angle), std::sin(angle)};
      const std::vector<double> far = {1e6 * dir[0], 1e6 * dir[1]};
      CAPTURE(i);
      CHECK(std::fabs(sd(far) - sd.recession(dir)) <= 1e-4);
    }
  }
  SECTION("value at zero is c + psi00(0)") {
    SphereDecomposition sd;
    sd.dimension = 1;
    sd.c = 0.25;
    sd.psi00 = [](const std::vector<double>& s) { return 1.0 / (1.0 + s.at(0) * s.at(0)); };
    CHECK(sd({0.0}) == Approx(1.25));
  }
}

TEST_CASE("ray convergence of the shipped ring functions") {
  // |psi0(t * dir) - recession(dir)| <= 1e-4 at t = 1e6 along both rays
  const double t = 1e6;
  for (const auto* name : {"one", "abs_frac", "signed_frac", "bump", "pythag_frac", "clamp_id(1)",
                           "clamp_sq(1)", "poly_clamped(2)"}) {
    const auto f = ring_function(name);
    for (double dir : {-1.0, 1.0}) {
      CAPTURE(name, dir);
      CHECK(std::fabs(f(dir * t) - f.boundary(dir)) <= 1e-4);
    }
  }
}

TEST_CASE("poly_clamped matches the monomial on [0,1]") {
  const auto f2 = ring_function("poly_clamped(2)");
  CHECK(f2(0.5) == Approx(0.25));
  CHECK(f2(-3.0) == 0.0);
  CHECK(f2(3.0) == 1.0);
  const auto f0 = ring_function("poly_clamped(0)");
  CHECK(f0(0.7) == 1.0);
}

TEST_CASE("remaining catalog entries") {
  const auto cube = ring_function("clamp_cube(2)");
  CHECK(cube(1.5) == Approx(3.375));
  CHECK(cube(5.0) == 8.0);
  CHECK(cube.boundary(-1.0) == -8.0);

  const auto pt = ring_function("one_pt_one");
  CHECK(pt(42.0) == 1.0);
  CHECK(recession(pt) == 1.0);

  const auto g = scalar_field("two_minus_x");
  CHECK(g(0.5) == Approx(1.5));
}

TEST_CASE("the default battery") {
  const auto b = default_battery();
  REQUIRE(b.members.size() == 12);
  CHECK(b.members[0].g.name == "one");
  CHECK(b.members[0].f0.name() == "one");
  CHECK(b.members[0].psi0.name() == "one");
}

TEST_CASE("unknown catalog names") {
  CHECK_THROWS_AS(ring_function("abs_frak"), Error);
  CHECK_THROWS_AS(scalar_field("y"), Error);
}
