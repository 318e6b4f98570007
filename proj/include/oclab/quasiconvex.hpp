#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "oclab/common.hpp"
#include "oclab/parallel.hpp"

namespace oclab {

// ---------------------------------------------------------------------------
// Quasiconvex envelope upper bound by relaxation over zero-boundary
// piecewise-affine perturbations on the unit cell. Scalar targets; n = 1
// (intervals) or n = 2 (uniform triangulation, P1). Gradients are piecewise
// constant, so psi-integrals are exact sums.
// ---------------------------------------------------------------------------

using ScalarPsi = std::function<double(double)>;          // n = 1
using PlanePsi = std::function<double(double, double)>;   // n = 2, gradient (gx, gy)

namespace qcdetail {

struct Solve1D {
  double value = 0.0;
  std::vector<double> phi; // N+1 node values, phi[0] = phi[N] = 0
};

/// Objective (1/N) sum psi(s0 + N (phi_{i+1}-phi_i)); coordinate pattern
/// search with shrinking steps. Derivative-free: psi may be non-smooth.
inline double objective_1d(const ScalarPsi& psi, double s0, const std::vector<double>& phi) {
  const int N = int(phi.size()) - 1;
  double acc = 0.0;
  for (int i = 0; i < N; ++i) acc += psi(s0 + N * (phi[i + 1] - phi[i]));
  return acc / N;
}

inline void pattern_search_1d(const ScalarPsi& psi, double s0, std::vector<double>& phi,
                              double h0, double h_min) {
  const int N = int(phi.size()) - 1;
  std::vector<double> cell(N); // psi per cell
  for (int i = 0; i < N; ++i) cell[i] = psi(s0 + N * (phi[i + 1] - phi[i]));
  double h = h0;
  int sweeps = 0;
  const int max_sweeps = 400 * int(std::bit_width(std::uint64_t(N) + 1));
  while (h > h_min && sweeps++ < max_sweeps) {
    bool improved = false;
    for (int i = 1; i < N; ++i) {
      const double base = cell[i - 1] + cell[i];
      // the floor keeps roundoff rattle from stalling the shrink schedule
      const double floor = 1e-13 * (1.0 + std::fabs(base));
      double best_delta = -floor, best_step = 0.0, cl = 0.0, cr = 0.0;
      for (double step : {h, -h}) {
        const double nl = psi(s0 + N * (phi[i] + step - phi[i - 1]));
        const double nr = psi(s0 + N * (phi[i + 1] - phi[i] - step));
        const double delta = nl + nr - base;
        if (delta < best_delta) {
          best_delta = delta;
          best_step = step;
          cl = nl;
          cr = nr;
        }
      }
      if (best_step != 0.0) {
        phi[i] += best_step;
        cell[i - 1] = cl;
        cell[i] = cr;
        improved = true;
      }
    }
    if (!improved) h *= 0.5;
  }
}

inline Solve1D solve_1d(const ScalarPsi& psi, double s0, int N, int starts, std::uint64_t seed,
                        int jobs = 1) {
  Solve1D best;
  best.phi.assign(N + 1, 0.0);
  best.value = objective_1d(psi, s0, best.phi);
  if (!std::isfinite(best.value)) fail(errc::config, "psi evaluated to a non-finite value");

  std::vector<std::vector<double>> inits;
  inits.push_back(best.phi); // zero start
  if (N >= 16 && N % 2 == 0) {
    // warm start from the coarser grid: linear prolongation keeps the
    // objective value, so the result is monotone in N
    Solve1D coarse = solve_1d(psi, s0, N / 2, starts, seed, jobs);
    std::vector<double> fine(N + 1, 0.0);
    for (int i = 0; i <= N / 2; ++i) fine[2 * i] = coarse.phi[i];
    for (int i = 0; i + 2 <= N; i += 2) fine[i + 1] = 0.5 * (fine[i] + fine[i + 2]);
    inits.push_back(std::move(fine));
  }
  const int randoms = std::max(0, starts - int(inits.size()));
  for (int r = 0; r < randoms; ++r) {
    std::mt19937_64 rng(seed + 0x9E3779B97F4A7C15ull * std::uint64_t(r + 1));
    std::uniform_real_distribution<double> slope(-1.0 - std::fabs(s0), 1.0 + std::fabs(s0));
    std::vector<double> phi(N + 1, 0.0);
    for (int i = 1; i < N; ++i) phi[i] = phi[i - 1] + slope(rng) / N;
    const double drift = phi[N - 1];
    for (int i = 1; i < N; ++i) phi[i] -= drift * double(i) / double(N - 1); // zero boundary
    phi[N] = 0.0;
    inits.push_back(std::move(phi));
  }

  const double h0 = std::max(1.0, std::fabs(s0)) * 2.0 / N;
  const double h_min = 1e-9 / N;
  // starts run in parallel, each owning its state; the reduction is a
  // deterministic min over the start index
  auto solved = parallel_map(inits.size(), jobs, [&](std::size_t i) {
    std::vector<double> phi = inits[i];
    pattern_search_1d(psi, s0, phi, h0, h_min);
    const double v = objective_1d(psi, s0, phi);
    return std::make_pair(v, std::move(phi));
  });
  for (auto& [v, phi] : solved) {
    if (!std::isfinite(v)) fail(errc::config, "psi evaluated to a non-finite value");
    if (v < best.value) {
      best.value = v;
      best.phi = std::move(phi);
    }
  }
  return best;
}

} // namespace qcdetail

/// Upper bound for the quasiconvex envelope at s0: the discrete relaxation
/// infimum over N-cell zero-boundary perturbations, minimized over `starts`
/// deterministic multistarts (zero, coarse-grid warm start, seeded randoms).
/// Always >= Q psi(s0). Monotone nonincreasing in N along doublings.
inline double qc_envelope_upper(const ScalarPsi& psi, double s0, int N, int starts,
                                std::uint64_t seed = kDefaultSeed, int jobs = 1) {
  if (N < 4) fail(errc::config, "envelope grid must have N >= 4");
  if (starts < 1) fail(errc::config, "envelope needs at least one start");
  return qcdetail::solve_1d(psi, s0, N, starts, seed, jobs).value;
}

/// Two-dimensional scalar variant on the unit square: P1 elements on the
/// uniform crossed triangulation, gradient constant per triangle. Upper
/// bound only; the discrete gap is not quantified.
inline double qc_envelope_upper_2d(const PlanePsi& psi, double s0x, double s0y, int N, int starts,
                                   std::uint64_t seed = kDefaultSeed) {
  if (N < 4) fail(errc::config, "envelope grid must have N >= 4");
  auto idx = [N](int i, int j) { return i * (N + 1) + j; };
  auto objective = [&](const std::vector<double>& phi) {
    // per square cell: lower-left and upper-right triangles
    double acc = 0.0;
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        const double p00 = phi[idx(i, j)], p10 = phi[idx(i + 1, j)];
        const double p01 = phi[idx(i, j + 1)], p11 = phi[idx(i + 1, j + 1)];
        acc += 0.5 * psi(s0x + N * (p10 - p00), s0y + N * (p01 - p00));
        acc += 0.5 * psi(s0x + N * (p11 - p01), s0y + N * (p11 - p10));
      }
    return acc / double(N * N);
  };
  std::vector<double> best((N + 1) * (N + 1), 0.0);
  double best_v = objective(best);
  for (int r = 0; r < starts; ++r) {
    std::mt19937_64 rng(seed + 0xD1B54A32D192ED03ull * std::uint64_t(r + 1));
    std::uniform_real_distribution<double> jitter(-1.0 / N, 1.0 / N);
    std::vector<double> phi((N + 1) * (N + 1), 0.0);
    if (r > 0)
      for (int i = 1; i < N; ++i)
        for (int j = 1; j < N; ++j) phi[idx(i, j)] = jitter(rng);
    double h = std::max(1.0, std::fabs(s0x) + std::fabs(s0y)) * 2.0 / N;
    double value = objective(phi);
    int sweeps = 0;
    const int max_sweeps = 200 * int(std::bit_width(std::uint64_t(N) + 1));
    while (h > 1e-7 / N && sweeps++ < max_sweeps) {
      bool improved = false;
      for (int i = 1; i < N; ++i)
        for (int j = 1; j < N; ++j)
          for (double step : {h, -h}) {
            phi[idx(i, j)] += step;
            const double v = objective(phi);
            if (v < value - 1e-13 * (1.0 + std::fabs(value))) {
              value = v;
              improved = true;
            } else {
              phi[idx(i, j)] -= step;
            }
          }
      if (!improved) h *= 0.5;
    }
    if (value < best_v) {
      best_v = value;
      best = phi;
    }
  }
  return best_v;
}

/// Searches for a discrete zero-boundary phi violating the quasiconvexity
/// inequality at s0 by more than 1e-6. Returns the witness node values.
inline std::optional<std::vector<double>> qc_witness_search(const ScalarPsi& psi, double s0,
                                                            int trials, int N = 32,
                                                            std::uint64_t seed = kDefaultSeed) {
  if (trials < 1) fail(errc::config, "witness search needs trials >= 1");
  const double target = psi(s0) - 1e-6;
  int tried = 0;
  // deterministic sawtooth candidates first: slopes +-a around s0
  for (double a : {1.0, 0.5, 2.0, 1.5, 3.0}) {
    if (tried >= trials) return std::nullopt;
    ++tried;
    std::vector<double> phi(N + 1, 0.0);
    for (int i = 1; i < N; ++i) phi[i] = phi[i - 1] + ((i % 2) ? a : -a) / N;
    phi[N] = 0.0;
    qcdetail::pattern_search_1d(psi, s0, phi, a / N, 1e-9 / N);
    if (qcdetail::objective_1d(psi, s0, phi) < target) return phi;
  }
  while (tried < trials) {
    ++tried;
    std::mt19937_64 rng(seed + 0xA24BAED4963EE407ull * std::uint64_t(tried));
    std::uniform_real_distribution<double> slope(-3.0 - std::fabs(s0), 3.0 + std::fabs(s0));
    std::vector<double> phi(N + 1, 0.0);
    for (int i = 1; i < N; ++i) phi[i] = phi[i - 1] + slope(rng) / N;
    const double drift = phi[N - 1];
    for (int i = 1; i < N; ++i) phi[i] -= drift * double(i) / double(N - 1);
    phi[N] = 0.0;
    qcdetail::pattern_search_1d(psi, s0, phi, 2.0 / N, 1e-9 / N);
    if (qcdetail::objective_1d(psi, s0, phi) < target) return phi;
  }
  return std::nullopt;
}

/// Full-growth psi catalog for the envelope subcommand.
inline ScalarPsi envelope_psi(const std::string& name) {
  if (name == "double_well") return [](double s) { const double w = s * s - 1.0; return w * w; };
  if (name == "square") return [](double s) { return s * s; };
  if (name == "abs") return [](double s) { return std::fabs(s); };
  if (name == "abs_plus_lin") return [](double s) { return std::fabs(s) + 0.25 * s; };
  fail(errc::catalog, "unknown envelope psi '" + name + "'");
}

// ---------------------------------------------------------------------------
// p-quasisubcritical growth from below at a boundary point (1D reduction:
// the half ball D_rho = (-1,0)). For each epsilon the smallest admissible C
// is estimated over scaled test profiles; C growing superlinearly in the
// amplitude (fitted exponent >= 1.2) is reported as a violation.
// ---------------------------------------------------------------------------

struct PqscbRow {
  double eps = 0.0;
  double C = 0.0;              // largest deficit found, 0 when none
  double fitted_exponent = 0.0;
  bool violated = false;
};

struct PqscbOptions {
  std::vector<double> eps_grid = {0.01, 0.1, 0.25, 0.5};
  std::vector<double> amplitudes; // defaults to 2^-2 .. 2^8
  int random_patterns = 8;
  std::uint64_t seed = kDefaultSeed;
  double blowup_exponent = 1.2;
};

inline std::vector<PqscbRow> pqscb_test(const std::function<double(double)>& h_tilde, double p,
                                        PqscbOptions opt = {}) {
  if (opt.amplitudes.empty())
    for (int e = -2; e <= 8; ++e) opt.amplitudes.push_back(std::pow(2.0, e));

  // slope patterns on (-1,0), unit amplitude; equal-width segments
  std::vector<std::vector<double>> patterns = {{-1.0}, {1.0}};
  for (int segs : {2, 4, 8, 16}) {
    std::vector<double> alt(segs);
    for (int i = 0; i < segs; ++i) alt[i] = (i % 2) ? -1.0 : 1.0;
    patterns.push_back(std::move(alt));
  }
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int r = 0; r < opt.random_patterns; ++r) {
    std::vector<double> pat(8);
    for (auto& v : pat) v = uni(rng);
    patterns.push_back(std::move(pat));
  }

  std::vector<PqscbRow> rows;
  for (double eps : opt.eps_grid) {
    PqscbRow row;
    row.eps = eps;
    std::vector<double> cs;
    for (double A : opt.amplitudes) {
      double worst = 0.0;
      for (const auto& pat : patterns) {
        const double w = 1.0 / double(pat.size());
        double ih = 0.0, ig = 0.0;
        for (double v : pat) {
          ih += w * h_tilde(A * v);
          ig += w * std::pow(std::fabs(A * v), p);
        }
        worst = std::max(worst, -(ih + eps * ig));
      }
      cs.push_back(worst);
      row.C = std::max(row.C, worst);
    }
    // superlinear growth fit over the positive deficits
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < cs.size(); ++i)
      if (cs[i] > 1e-12) pts.emplace_back(std::log(opt.amplitudes[i]), std::log(cs[i]));
    if (pts.size() >= 3) {
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (auto [x, y] : pts) { sx += x; sy += y; sxx += x * x; sxy += x * y; }
      const double n = double(pts.size());
      const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
      row.fitted_exponent = slope;
      // blow-up also requires the deficit to keep growing at the tail
      row.violated = slope >= opt.blowup_exponent && cs.back() >= 0.5 * row.C && cs.back() > 1e-9;
    }
    rows.push_back(row);
  }
  return rows;
}

} // namespace oclab
