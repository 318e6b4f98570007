#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "oclab/common.hpp"
#include "oclab/quadrature.hpp"

namespace oclab {

/// Exact rational, used for the symbolic breakpoint offsets b = c0 + c1/k.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;
  constexpr Rational() = default;
  constexpr Rational(std::int64_t n, std::int64_t d = 1) : num(n), den(d) {
    if (den < 0) { num = -num; den = -den; }
    const auto g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) { num /= g; den /= g; }
  }
  double value() const { return double(num) / double(den); }
};

/// Breakpoint b(k) = c0 + c1/k, evaluated as the correctly-rounded double.
struct BreakpointExpr {
  Rational c0, c1;
  double at(double k) const { return c0.value() + c1.value() / k; }
};

/// Piece coefficient as a function of k: c0 + ck*k + cinvk/k + cpow*k^e.
/// JSON-loadable custom families use only the first three terms; the power
/// term carries the k^{n/p-1} scaling of the concentration families.
struct CoefExpr {
  double c0 = 0.0, ck = 0.0, cinvk = 0.0, cpow = 0.0, e = 0.0;
  double at(double k) const {
    double v = c0 + ck * k + cinvk / k;
    if (cpow != 0.0) v += cpow * std::pow(k, e);
    return v;
  }
};

/// One concrete affine piece of (u_k, w_k): u(x) = slope*x + intercept on
/// [lo,hi], w constant there.
struct Piece {
  double lo = 0.0, hi = 0.0;
  double slope = 0.0, intercept = 0.0;
  double w = 0.0;
  double u(double x) const { return slope * x + intercept; }
};

/// Piecewise-affine function of x alone (no k): the weak limit u and similar
/// closed forms. Left-limit convention at the interior breakpoints.
struct PiecewiseFn {
  struct Seg {
    double lo = 0.0, hi = 0.0, slope = 0.0, intercept = 0.0;
    double operator()(double x) const { return slope * x + intercept; }
  };
  std::vector<Seg> segs;

  double operator()(double x) const {
    for (std::size_t i = 0; i < segs.size(); ++i)
      if (x <= segs[i].hi || i + 1 == segs.size()) return segs[i](x);
    return 0.0;
  }
  double derivative(double x) const {
    for (std::size_t i = 0; i < segs.size(); ++i)
      if (x <= segs[i].hi || i + 1 == segs.size()) return segs[i].slope;
    return 0.0;
  }
  std::vector<double> interior_kinks() const {
    std::vector<double> ks;
    for (std::size_t i = 0; i + 1 < segs.size(); ++i) ks.push_back(segs[i].hi);
    return ks;
  }
};

/// Pointwise Young measure of {w_k}: finitely many (value, probability) atoms
/// per limit segment. Defaults to the Dirac at the limit slope.
struct OscillationAtoms {
  std::vector<std::pair<double, double>> atoms; // (s, prob)
};

/// A k-indexed sequence of piecewise-affine pairs (u_k, w_k) on a closed
/// interval, with exact breakpoint metadata. Immutable after construction;
/// evaluation is pure.
class PiecewiseFamily {
public:
  std::string name;
  double a = 0.0, b = 1.0; // closed domain [a,b]
  int n = 1;               // spatial dimension (1 for all closed-form families)
  double p = 1.0;          // default growth exponent of {w_k}
  double q = 1.0;          // default growth class of {u_k}
  double p_sup = 1.0;      // sup of p with {w_k} bounded in L^p
  bool gradient_consistent = true;
  bool continuous_u = true;       // u_k continuous (Sobolev) for every k
  bool uniform_convergence = false; // u_k -> u uniformly on the closure
  bool equi_integrable_q = true;  // {|u_k|^q} equi-integrable
  double u_bound = 0.0;           // sup_k ||u_k||_inf
  PiecewiseFn u_limit;
  std::vector<OscillationAtoms> oscillation; // per u_limit segment

  std::function<std::vector<Piece>(std::int64_t)> pieces_fn;

  std::vector<Piece> pieces(std::int64_t k) const {
    if (k < 1) fail(errc::schedule, "k must be >= 1");
    if (k > kMaxScheduleK) fail(errc::schedule, "k exceeds the 2^40 overflow guard");
    return pieces_fn(k);
  }

  double length() const { return b - a; }
};

struct EvalResult {
  double u = 0.0;
  double w = 0.0;
};

/// Materialized (u_k, w_k) for one k: pieces built once, point evaluation by
/// binary search with the left-limit convention (an interior breakpoint
/// belongs to the piece on its left; the left endpoint of the domain belongs
/// to the first piece).
class FamilyEvaluator {
public:
  FamilyEvaluator(const PiecewiseFamily& fam, std::int64_t k)
      : name_(fam.name), a_(fam.a), b_(fam.b), pieces_(fam.pieces(k)) {}

  EvalResult operator()(double x) const {
    if (x < a_ || x > b_) fail(errc::domain, name_ + ": x outside [a,b]");
    std::size_t lo = 0, hi = pieces_.size() - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (pieces_[mid].hi >= x) hi = mid; else lo = mid + 1;
    }
    return {pieces_[lo].u(x), pieces_[lo].w};
  }

  const std::vector<Piece>& pieces() const { return pieces_; }

private:
  std::string name_;
  double a_, b_;
  std::vector<Piece> pieces_;
};

/// Closed-form values of (u_k, w_k) at x; one-shot convenience wrapper.
inline EvalResult evaluate(const PiecewiseFamily& fam, std::int64_t k, double x) {
  return FamilyEvaluator(fam, k)(x);
}

/// Exact discontinuity/kink set of (u_k, w_k), including both endpoints.
inline std::vector<double> breakpoints(const PiecewiseFamily& fam, std::int64_t k) {
  const auto ps = fam.pieces(k);
  std::vector<double> bs;
  bs.reserve(ps.size() + 1);
  bs.push_back(ps.front().lo);
  for (const auto& p : ps) bs.push_back(p.hi);
  return bs;
}

namespace detail {

struct SymbolicPiece {
  BreakpointExpr hi;
  CoefExpr slope, intercept, w;
};

inline std::function<std::vector<Piece>(std::int64_t)> symbolic_pieces(double a,
                                                                       std::vector<SymbolicPiece> sp) {
  return [a, sp = std::move(sp)](std::int64_t k) {
    std::vector<Piece> out;
    out.reserve(sp.size());
    const double kd = double(k);
    double lo = a;
    for (const auto& s : sp) {
      Piece p;
      p.lo = lo;
      p.hi = s.hi.at(kd);
      p.slope = s.slope.at(kd);
      p.intercept = s.intercept.at(kd);
      p.w = s.w.at(kd);
      lo = p.hi;
      out.push_back(p);
    }
    return out;
  };
}

inline bool parse_named_param(const std::string& name, const std::string& prefix, double& value) {
  if (name == prefix) return true; // default parameter
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

/// Scaling/concentration family u_k(x) = k^{n/p-1} w(kx) on the unit ball,
/// with a piecewise-affine profile w vanishing at the boundary. For n = 1 it
/// materializes to a PiecewiseFamily; for n > 1 only the radial reference
/// integral is available (see radial_reference below).
struct ScalingFamily {
  PiecewiseFn profile; // on [-1,1] (n=1) or [0,1] radial (n>1), zero at the outer boundary
  double p = 2.0;
  int n = 1;
};

inline PiecewiseFamily materialize(const ScalingFamily& sf, std::string name) {
  if (sf.n != 1) fail(errc::config, "only n=1 scaling families materialize to 1D");
  if (sf.p <= 1.0) fail(errc::config, "scaling family requires p > 1");
  PiecewiseFamily f;
  f.name = std::move(name);
  f.a = -1.0;
  f.b = 1.0;
  f.p = sf.p;
  f.q = 1.0;
  f.p_sup = sf.p;
  f.gradient_consistent = true;
  f.uniform_convergence = true; // k^{1/p-1} -> 0 for p > 1
  double ub = 0.0;
  for (const auto& s : sf.profile.segs) ub = std::max({ub, std::fabs(s(s.lo)), std::fabs(s(s.hi))});
  f.u_bound = ub;
  f.u_limit.segs = {{-1.0, 1.0, 0.0, 0.0}};
  f.oscillation = {OscillationAtoms{{{0.0, 1.0}}}};
  const double p = sf.p;
  const auto profile = sf.profile;
  f.pieces_fn = [profile, p](std::int64_t k) {
    const double kd = double(k);
    const double amp = std::pow(kd, 1.0 / p - 1.0); // k^{n/p-1}, n=1
    const double grad = std::pow(kd, 1.0 / p);
    std::vector<Piece> out;
    out.push_back({-1.0, -1.0 / kd, 0.0, 0.0, 0.0});
    for (const auto& s : profile.segs) {
      Piece pc;
      pc.lo = s.lo / kd;
      pc.hi = s.hi / kd;
      pc.slope = s.slope * grad;
      pc.intercept = s.intercept * amp;
      pc.w = s.slope * grad;
      out.push_back(pc);
    }
    out.push_back({1.0 / kd, 1.0, 0.0, 0.0, 0.0});
    return out;
  };
  return f;
}

/// Radial reference value of the p >= n limits of Example-type scaling
/// families: integral over the unit ball of h(0, u_inf(y), grad w(y)) with
/// u_inf = w for p = n and 0 for p > n, reduced to the radial integral with
/// Jacobian r^{n-1}. The surface measure of S^{n-1} multiplies the result.
template <class H>
double radial_reference(const ScalingFamily& sf, H&& h, int quad_order = 8) {
  if (sf.p < sf.n) fail(errc::config, "closed-form reference requires p >= n");
  const bool keep_u = (sf.p == double(sf.n));
  double total = 0.0;
  const double sphere = sf.n == 1 ? 2.0
                        : sf.n == 2 ? 2.0 * M_PI
                        : sf.n == 3 ? 4.0 * M_PI
                                    : 2.0 * std::pow(M_PI, sf.n / 2.0) / std::tgamma(sf.n / 2.0);
  // n=1: profile lives on [-1,1], integrate directly; n>1: radial on [0,1].
  if (sf.n == 1) {
    for (const auto& s : sf.profile.segs) {
      const auto& rule = GaussLegendre::cached(quad_order);
      total += rule.integrate(s.lo, s.hi,
                              [&](double y) { return h(keep_u ? s(y) : 0.0, s.slope); });
    }
    return total;
  }
  for (const auto& s : sf.profile.segs) {
    const auto& rule = GaussLegendre::cached(quad_order);
    total += rule.integrate(s.lo, s.hi, [&](double r) {
      return std::pow(r, sf.n - 1) * h(keep_u ? s(r) : 0.0, s.slope);
    });
  }
  return sphere * total;
}

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------

/// Builtin family catalog. Stable names:
///   ex_first       the 0 / kx-k+1 / -2kx+2k+1 / -1 spike pair on [0,2]
///   ex_variant     the down-up-down variant (same (sigma,nu), different mu)
///   ex_fixed_u     frozen u, the ex_first gradients (not gradient-consistent)
///   ex_simple      nondecreasing ramp concentrating at x=1 on [0,2]
///   ramp           the 0 / kx / 1 jump family on [-1,1]
///   sawtooth       triangle wave, amplitude 1/(2k), period 2/k, w in {-1,+1}
///   constant(c)    u_k = c, w_k = 0 on [0,1]
///   scaling_hat(p) u_k = k^{1/p-1} hat(kx) on [-1,1], p > 1
inline PiecewiseFamily builtin(const std::string& name) {
  using detail::SymbolicPiece;
  const Rational r0{0}, r1{1};

  if (name == "ex_first") {
    PiecewiseFamily f;
    f.name = name;
    f.a = 0.0; f.b = 2.0;
    f.p = 1.0; f.q = 1.0; f.p_sup = 1.0;
    f.u_bound = 1.0;
    f.u_limit.segs = {{0.0, 1.0, 0.0, 0.0}, {1.0, 2.0, 0.0, -1.0}};
    f.oscillation = {OscillationAtoms{{{0.0, 1.0}}}, OscillationAtoms{{{0.0, 1.0}}}};
    f.pieces_fn = detail::symbolic_pieces(
        0.0, {SymbolicPiece{{r1, Rational{-1}}, {}, {}, {}},
              SymbolicPiece{{r1, r0}, {0, 1}, {1, -1}, {0, 1}},
              SymbolicPiece{{r1, r1}, {0, -2}, {1, 2}, {0, -2}},
              SymbolicPiece{{Rational{2}, r0}, {}, {-1}, {}}});
    return f;
  }
  if (name == "ex_variant") {
    PiecewiseFamily f;
    f.name = name;
    f.a = 0.0; f.b = 2.0;
    f.p = 1.0; f.q = 1.0; f.p_sup = 1.0;
    f.u_bound = 1.0;
    f.u_limit.segs = {{0.0, 1.0, 0.0, 0.0}, {1.0, 2.0, 0.0, -1.0}};
    f.oscillation = {OscillationAtoms{{{0.0, 1.0}}}, OscillationAtoms{{{0.0, 1.0}}}};
    f.pieces_fn = detail::symbolic_pieces(
        0.0, {SymbolicPiece{{r1, Rational{-2}}, {}, {}, {}},
              SymbolicPiece{{r1, Rational{-1}}, {0, -1}, {-2, 1}, {0, -1}},
              SymbolicPiece{{r1, r0}, {0, 1}, {0, -1}, {0, 1}},
              SymbolicPiece{{r1, r1}, {0, -1}, {0, 1}, {0, -1}},
              SymbolicPiece{{Rational{2}, r0}, {}, {-1}, {}}});
    return f;
  }
  if (name == "ex_fixed_u") {
    PiecewiseFamily f;
    f.name = name;
    f.a = 0.0; f.b = 2.0;
    f.p = 1.0; f.q = 1.0; f.p_sup = 1.0;
    f.gradient_consistent = false;
    f.continuous_u = false; // u jumps at x=1; the pair is L^q x L^p only
    f.u_bound = 1.0;
    f.u_limit.segs = {{0.0, 1.0, 0.0, 0.0}, {1.0, 2.0, 0.0, -1.0}};
    f.oscillation = {OscillationAtoms{{{0.0, 1.0}}}, OscillationAtoms{{{0.0, 1.0}}}};
    f.pieces_fn = detail::symbolic_pieces(
        0.0, {SymbolicPiece{{r1, Rational{-1}}, {}, {}, {}},
              SymbolicPiece{{r1, r0}, {}, {}, {0, 1}},
              SymbolicPiece{{r1, r1}, {}, {-1}, {0, -2}},
              SymbolicPiece{{Rational{2}, r0}, {}, {-1}, {}}});
    return f;
  }
  if (name == "ex_simple") {
    PiecewiseFamily f;
    f.name = name;
    f.a = 0.0; f.b = 2.0;
    f.p = 1.0; f.q = 1.0; f.p_sup = 1.0;
    f.u_bound = 1.0;
    f.u_limit.segs = {{0.0, 1.0, 0.0, 0.0}, {1.0, 2.0, 0.0, 1.0}};
    f.oscillation = {OscillationAtoms{{{0.0, 1.0}}}, OscillationAtoms{{{0.0, 1.0}}}};
    f.pieces_fn = detail::symbolic_pieces(
        0.0, {SymbolicPiece{{r1, Rational{-1, 2}}, {}, {}, {}},
              SymbolicPiece{{r1, Rational{1, 2}}, {0, 1}, {0.5, -1}, {0, 1}},
              SymbolicPiece{{Rational{2}, r0}, {}, {1}, {}}});
    return f;
  }
  if (name == "ramp") {
    PiecewiseFamily f;
    f.name = name;
    f.a = -1.0; f.b = 1.0;
    f.p = 1.0; f.q = 2.0; f.p_sup = 1.0;
    f.u_bound = 1.0;
    f.u_limit.segs = {{-1.0, 0.0, 0.0, 0.0}, {0.0, 1.0, 0.0, 1.0}};
    f.oscillation = {OscillationAtoms{{{0.0, 1.0}}}, OscillationAtoms{{{0.0, 1.0}}}};
    f.pieces_fn = detail::symbolic_pieces(
        -1.0, {SymbolicPiece{{r0, r0}, {}, {}, {}},
               SymbolicPiece{{r0, r1}, {0, 1}, {}, {0, 1}},
               SymbolicPiece{{r1, r0}, {}, {1}, {}}});
    return f;
  }
  if (name == "sawtooth") {
    PiecewiseFamily f;
    f.name = name;
    f.a = 0.0; f.b = 2.0;
    f.p = 2.0; f.q = 2.0;
    f.p_sup = std::numeric_limits<double>::infinity();
    f.uniform_convergence = true;
    f.u_bound = 0.5; // sup_k ||u_k|| = 1/(2k) <= 1/2
    f.u_limit.segs = {{0.0, 2.0, 0.0, 0.0}};
    f.oscillation = {OscillationAtoms{{{-1.0, 0.5}, {1.0, 0.5}}}};
    f.pieces_fn = [](std::int64_t k) {
      // kinks at j/k, slopes alternate +1 (even j cells) / -1 (odd);
      // the piece list is materialized, so k is budgeted well below the
      // generic 2^40 guard
      if (k > (std::int64_t(1) << 22))
        fail(errc::schedule, "sawtooth: k beyond the piecewise materialization budget (2^22)");
      std::vector<Piece> out;
      out.reserve(std::size_t(2 * k));
      const double kd = double(k);
      const double half = 1.0 / (2.0 * kd);
      for (std::int64_t j = 0; j < 2 * k; ++j) {
        Piece p;
        p.lo = double(j) / kd;
        p.hi = double(j + 1) / kd;
        const bool up = (j % 2 == 0);
        p.slope = up ? 1.0 : -1.0;
        const double u_lo = up ? -half : half;
        p.intercept = u_lo - p.slope * p.lo;
        p.w = p.slope;
        out.push_back(p);
      }
      return out;
    };
    return f;
  }

  double param = 0.0;
  if (detail::parse_named_param(name, "constant", param)) {
    const double c = param;
    PiecewiseFamily f;
    f.name = name;
    f.a = 0.0; f.b = 1.0;
    f.p = 1.0; f.q = 1.0;
    f.p_sup = std::numeric_limits<double>::infinity();
    f.uniform_convergence = true;
    f.u_bound = std::fabs(c);
    f.u_limit.segs = {{0.0, 1.0, 0.0, c}};
    f.oscillation = {OscillationAtoms{{{0.0, 1.0}}}};
    f.pieces_fn = [c](std::int64_t) {
      return std::vector<Piece>{{0.0, 1.0, 0.0, c, 0.0}};
    };
    return f;
  }
  param = 2.0;
  if (detail::parse_named_param(name, "scaling_hat", param)) {
    ScalingFamily sf;
    sf.p = param;
    sf.n = 1;
    sf.profile.segs = {{-1.0, 0.0, 1.0, 1.0}, {0.0, 1.0, -1.0, 1.0}}; // hat 1-|y|
    return materialize(sf, name);
  }
  fail(errc::catalog, "unknown family '" + name + "'");
}

inline std::vector<std::string> catalog_family_names() {
  return {"ex_first", "ex_variant", "ex_fixed_u", "ex_simple",
          "ramp",     "sawtooth",   "constant",   "scaling_hat"};
}

/// Structural validation over a k-schedule: ordered breakpoints, continuity
/// of u_k (when declared), and w_k = u_k' on gradient-consistent families.
inline void validate_family(const PiecewiseFamily& fam, const std::vector<std::int64_t>& schedule) {
  for (std::int64_t k : schedule) {
    const auto ps = fam.pieces(k);
    if (ps.empty()) fail(errc::config, fam.name + ": no pieces");
    if (std::fabs(ps.front().lo - fam.a) > 1e-12 || std::fabs(ps.back().hi - fam.b) > 1e-12)
      fail(errc::config, fam.name + ": pieces do not cover the domain");
    for (std::size_t i = 0; i < ps.size(); ++i) {
      if (!(ps[i].lo < ps[i].hi))
        fail(errc::config, fam.name + ": breakpoints not strictly increasing at k=" + std::to_string(k));
      if (i > 0) {
        if (ps[i].lo != ps[i - 1].hi)
          fail(errc::config, fam.name + ": pieces not contiguous");
        if (fam.continuous_u) {
          const double jump = std::fabs(ps[i].u(ps[i].lo) - ps[i - 1].u(ps[i - 1].hi));
          if (jump > 1e-9 * std::max(1.0, std::fabs(ps[i].slope)))
            fail(errc::config, fam.name + ": u_k discontinuous at a breakpoint");
        }
      }
      if (fam.gradient_consistent &&
          std::fabs(ps[i].w - ps[i].slope) > 1e-12 * std::max(1.0, std::fabs(ps[i].slope)))
        fail(errc::config, fam.name + ": w_k is not the derivative of u_k");
    }
  }
}

/// Default k-schedule: 2^4, ..., 2^max_exp.
inline std::vector<std::int64_t> default_schedule(int max_exp = 14) {
  if (max_exp < 4 || max_exp > 40) fail(errc::schedule, "schedule exponent out of range [4,40]");
  std::vector<std::int64_t> ks;
  for (int j = 4; j <= max_exp; ++j) ks.push_back(std::int64_t(1) << j);
  return ks;
}

} // namespace oclab
