#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "oclab/common.hpp"

namespace oclab {

/// Which metrizable compactification the boundary data refers to.
///   two_point : R u {+inf,-inf}, scalar targets only
///   one_point : R^d u {inf}
///   sphere    : boundary points are directions on S^{d-1}
enum class CompKind { two_point, one_point, sphere };

inline std::string to_string(CompKind k) {
  switch (k) {
    case CompKind::two_point: return "two_point";
    case CompKind::one_point: return "one_point";
    case CompKind::sphere: return "sphere";
  }
  return "?";
}

inline CompKind comp_kind_from_string(const std::string& s) {
  if (s == "two_point") return CompKind::two_point;
  if (s == "one_point") return CompKind::one_point;
  if (s == "sphere") return CompKind::sphere;
  fail(errc::config, "unknown compactification kind '" + s + "'");
}

struct Compactification {
  CompKind kind = CompKind::two_point;
  int dimension = 1;
};

/// Bounded continuous scalar-argument function with explicit boundary data:
/// an element of the ring R (or U). `kinks` lists the points where the finite
/// part is not smooth, so the quadrature engine can split there.
class RingFunction {
public:
  RingFunction() = default;

  static RingFunction two_point(std::string name, std::function<double(double)> f,
                                double at_plus, double at_minus, std::vector<double> kinks = {},
                                double bound = 1.0) {
    RingFunction r;
    r.name_ = std::move(name);
    r.finite_ = std::move(f);
    r.kind_ = CompKind::two_point;
    r.plus_ = at_plus;
    r.minus_ = at_minus;
    r.kinks_ = std::move(kinks);
    r.bound_ = bound;
    return r;
  }

  static RingFunction one_point(std::string name, std::function<double(double)> f, double at_inf,
                                std::vector<double> kinks = {}, double bound = 1.0) {
    RingFunction r;
    r.name_ = std::move(name);
    r.finite_ = std::move(f);
    r.kind_ = CompKind::one_point;
    r.plus_ = at_inf;
    r.minus_ = at_inf;
    r.kinks_ = std::move(kinks);
    r.bound_ = bound;
    return r;
  }

  double operator()(double s) const { return finite_(s); }

  /// Boundary value at direction +1/-1 (two_point, sphere) or at the single
  /// point at infinity (one_point, direction ignored).
  double boundary(double direction) const {
    if (kind_ == CompKind::one_point) return plus_;
    return direction > 0 ? plus_ : minus_;
  }

  const std::string& name() const { return name_; }
  CompKind kind() const { return kind_; }
  const std::vector<double>& kinks() const { return kinks_; }
  double bound() const { return bound_; }

private:
  std::string name_ = "one";
  std::function<double(double)> finite_ = [](double) { return 1.0; };
  CompKind kind_ = CompKind::two_point;
  double plus_ = 1.0, minus_ = 1.0;
  std::vector<double> kinks_;
  double bound_ = 1.0;
};

/// Full-growth function psi(s) = psi0(s) (1 + |s|^p); the boundary data of
/// psi0 is retained.
struct LiftedFunction {
  RingFunction ring;
  double p = 1.0;
  double operator()(double s) const { return ring(s) * (1.0 + std::pow(std::fabs(s), p)); }
};

inline LiftedFunction lift(RingFunction psi0, double p) {
  if (p < 1.0) fail(errc::config, "lift requires p >= 1");
  return LiftedFunction{std::move(psi0), p};
}

/// Boundary value of a ring function. `direction` must be +-1 for two_point
/// and sphere kinds; one_point functions reject a direction argument through
/// the dedicated overload below.
inline double recession(const RingFunction& psi0, double direction) {
  if (psi0.kind() == CompKind::one_point)
    fail(errc::kind_mismatch, "one-point ring function '" + psi0.name() + "' takes no direction");
  return psi0.boundary(direction);
}

inline double recession(const RingFunction& psi0) {
  if (psi0.kind() != CompKind::one_point)
    fail(errc::kind_mismatch, "ring function '" + psi0.name() + "' needs a direction");
  return psi0.boundary(+1.0);
}

// ---------------------------------------------------------------------------
// Sphere-compactification ring elements on R^d:
//   psi0(s) = c + psi00(s) + psi01(s/|s|) |s|^p / (1+|s|^p),  psi0(0) = c + psi00(0)
// with psi00 in C0(R^d) and psi01 continuous on S^{d-1}.
// ---------------------------------------------------------------------------

struct SphereDecomposition {
  int dimension = 1;
  double p = 1.0;
  double c = 0.0;
  std::function<double(const std::vector<double>&)> psi00 = [](const std::vector<double>&) { return 0.0; };
  std::function<double(const std::vector<double>&)> psi01 = [](const std::vector<double>&) { return 0.0; };

  double operator()(const std::vector<double>& s) const {
    double norm2 = 0.0;
    for (double v : s) norm2 += v * v;
    const double norm = std::sqrt(norm2);
    if (norm == 0.0) return c + psi00(s);
    std::vector<double> dir(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) dir[i] = s[i] / norm;
    const double np = std::pow(norm, p);
    return c + psi00(s) + psi01(dir) * np / (1.0 + np);
  }

  double recession(const std::vector<double>& direction) const { return c + psi01(direction); }
};

// ---------------------------------------------------------------------------
// Catalogs. Names are the stable identifiers used by scenario files.
// ---------------------------------------------------------------------------

namespace detail {
inline bool parse_param(const std::string& name, const std::string& prefix, double& value) {
  if (name.size() <= prefix.size() + 2) return false;
  if (name.compare(0, prefix.size(), prefix) != 0 || name[prefix.size()] != '(' || name.back() != ')')
    return false;
  try {
    value = std::stod(name.substr(prefix.size() + 1, name.size() - prefix.size() - 2));
  } catch (...) {
    return false;
  }
  return true;
}
} // namespace detail

/// Ring-function catalog over the gradient variable s (and for f0 over r).
///   one                 constant 1
///   abs_frac            |s|/(1+|s|)            -> 1 at both ends
///   signed_frac         s/(1+|s|)              -> +-1
///   bump                1/(1+s^2), C0
///   pythag_frac         sqrt(1+s^2)/(1+|s|)    -> 1; lift with p=1 gives sqrt(1+s^2)
///   clamp_id(R)         s clamped to [-R,R]    -> +-R
///   clamp_sq(R)         clamp(s)^2             -> R^2
///   poly_clamped(a)     r^a on [0,1], 0 below, 1 above; one-point boundary 1
inline RingFunction ring_function(const std::string& name) {
  double a = 0.0;
  if (name == "one")
    return RingFunction::two_point("one", [](double) { return 1.0; }, 1.0, 1.0, {}, 1.0);
  if (name == "one_pt_one")
    return RingFunction::one_point("one_pt_one", [](double) { return 1.0; }, 1.0, {}, 1.0);
  if (name == "abs_frac")
    return RingFunction::two_point(
        "abs_frac", [](double s) { return std::fabs(s) / (1.0 + std::fabs(s)); }, 1.0, 1.0, {0.0}, 1.0);
  if (name == "abs_frac_pt")
    return RingFunction::one_point(
        "abs_frac_pt", [](double s) { return std::fabs(s) / (1.0 + std::fabs(s)); }, 1.0, {0.0}, 1.0);
  if (name == "signed_frac")
    return RingFunction::two_point(
        "signed_frac", [](double s) { return s / (1.0 + std::fabs(s)); }, 1.0, -1.0, {0.0}, 1.0);
  if (name == "bump")
    return RingFunction::two_point("bump", [](double s) { return 1.0 / (1.0 + s * s); }, 0.0, 0.0, {}, 1.0);
  if (name == "pythag_frac")
    return RingFunction::two_point(
        "pythag_frac", [](double s) { return std::sqrt(1.0 + s * s) / (1.0 + std::fabs(s)); }, 1.0, 1.0,
        {0.0}, 1.0);
  if (detail::parse_param(name, "clamp_id", a)) {
    const double r = a;
    return RingFunction::two_point(
        name, [r](double s) { return std::clamp(s, -r, r); }, r, -r, {-r, r}, r);
  }
  if (detail::parse_param(name, "clamp_sq", a)) {
    const double r = a;
    return RingFunction::two_point(
        name, [r](double s) { const double c = std::clamp(s, -r, r); return c * c; }, r * r, r * r,
        {-r, r}, r * r);
  }
  if (detail::parse_param(name, "clamp_cube", a)) {
    const double r = a;
    return RingFunction::two_point(
        name, [r](double s) { const double c = std::clamp(s, -r, r); return c * c * c; }, r * r * r,
        -r * r * r, {-r, r}, r * r * r);
  }
  if (detail::parse_param(name, "poly_clamped", a)) {
    const double alpha = a;
    auto f = [alpha](double r) {
      if (alpha == 0.0) return 1.0;
      if (r <= 0.0) return 0.0;
      if (r >= 1.0) return 1.0;
      return std::pow(r, alpha);
    };
    // one-point limit exists only in |r|; shipped as two-sided data 1/0.
    return RingFunction::two_point(name, f, 1.0, 0.0, {0.0, 1.0}, 1.0);
  }
  fail(errc::catalog, "unknown ring function '" + name + "'");
}

/// Spatial weights g in C(closure of Omega): low-degree polynomials.
struct ScalarField {
  std::string name = "one";
  std::vector<double> coeffs = {1.0}; // c0 + c1 x + c2 x^2 + ...
  double operator()(double x) const {
    double acc = 0.0;
    for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * x + coeffs[i];
    return acc;
  }
};

inline ScalarField scalar_field(const std::string& name) {
  if (name == "one") return {"one", {1.0}};
  if (name == "x") return {"x", {0.0, 1.0}};
  if (name == "x_sq") return {"x_sq", {0.0, 0.0, 1.0}};
  if (name == "two_minus_x") return {"two_minus_x", {2.0, -1.0}};
  fail(errc::catalog, "unknown scalar field '" + name + "'");
}

/// One battery member: the test triple (g, f0, psi0) of the representation
/// formula. f0 acts on the u-values, psi0 on the w-values.
struct BatteryMember {
  ScalarField g;
  RingFunction f0;
  RingFunction psi0;
};

struct TestBattery {
  std::string name = "default";
  std::vector<BatteryMember> members;
};

/// The shipped 12-member battery (two-point boundary data). Documented
/// property: it separates the catalog reference triples that share a domain.
inline TestBattery default_battery() {
  TestBattery b;
  b.name = "default";
  auto add = [&b](const std::string& g, const std::string& f0, const std::string& psi0) {
    b.members.push_back({scalar_field(g), ring_function(f0), ring_function(psi0)});
  };
  add("one", "one", "one");
  add("x", "one", "one");
  add("one", "one", "abs_frac");
  add("one", "one", "signed_frac");
  add("one", "one", "bump");
  add("one", "clamp_id(1)", "one");
  add("one", "clamp_id(1)", "abs_frac");
  add("one", "clamp_id(1)", "signed_frac");
  add("one", "clamp_sq(1)", "one");
  add("one", "clamp_sq(1)", "signed_frac");
  add("x", "clamp_id(1)", "abs_frac");
  add("x_sq", "clamp_sq(1)", "bump");
  return b;
}

} // namespace oclab
