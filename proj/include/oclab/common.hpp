#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace oclab {

/// Error categories surfaced by the library. Validation *reports* are values,
/// not exceptions; exceptions are reserved for contract violations.
enum class errc {
  domain,            // point outside the family domain
  catalog,           // unknown catalog name
  schedule,          // k outside the admissible schedule
  degenerate_fiber,  // boundary-only fiber where a finite part is required
  incomplete_triple, // missing mu-hat entry on a charged (x,s) pair
  kind_mismatch,     // compactification kind does not match the request
  subcritical,       // q >= p* rejected
  boundedness,       // L^q norms grow along the schedule
  recession,         // missing boundary data
  config,            // scenario / CLI configuration problem
};

class Error : public std::runtime_error {
public:
  Error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  errc code() const noexcept { return code_; }

private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw Error(code, what); }

/// Numeric tolerances used throughout; scenario files may override the first two.
struct Tolerances {
  double limit_match = 1e-3;   // empirical limit vs. representation formula
  double mass = 1e-10;         // probability normalization defect
  double moment = 1e-8;        // measure equality by battery moment matching
  double atom_location = 1e-9; // atom position comparisons
  double ray = 1e-4;           // ring-function ray convergence at |s| = 1e6
  double young_defect = 1e-10; // Young-measure moment identity defect
};

inline constexpr std::uint64_t kDefaultSeed = 0x5EED;
inline constexpr std::int64_t kMaxScheduleK = std::int64_t(1) << 40;

/// Pairwise summation over an ordered range; the order of the inputs is part
/// of the contract (bit-identical results independent of worker count).
inline double pairwise_sum(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n == 0) return 0.0;
  if (n <= 4) {
    double s = xs[0];
    for (std::size_t i = 1; i < n; ++i) s += xs[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

inline double pairwise_sum(const std::vector<double>& xs) {
  return pairwise_sum(std::span<const double>(xs.data(), xs.size()));
}

/// Shortest round-trip decimal for a double. Used for all report output so
/// that serialization is bit-exact and byte-deterministic.
inline std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  (void)ec;
  return std::string(buf, ptr);
}

inline bool nearly_equal(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

} // namespace oclab
