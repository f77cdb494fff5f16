#pragma once
// Shared basics: complex alias, error types, the +inf sentinel used by size
// functionals, and a small deterministic RNG wrapper.

#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace tfa {

using cx = std::complex<double>;
inline constexpr double pi = 3.141592653589793238462643383279502884;
inline const cx iu{0.0, 1.0};

// +inf is a first-class result of size evaluations (Haar-measure divergence);
// it propagates through sums and maxima via ordinary IEEE arithmetic.
inline constexpr double inf = std::numeric_limits<double>::infinity();

// Thrown when a caller-supplied parameter is outside its admissible range.
struct parameter_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a mathematical precondition fails (grid too coarse, support
// separation violated, certificate broken, ...).
struct precondition_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Deterministic stream of doubles/ints; identical across platforms for a
// given seed (mt19937_64 is specified bit-exactly).
class rng {
 public:
  explicit rng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double a, double b) {
    return a + (b - a) * std::uniform_real_distribution<double>(0.0, 1.0)(gen_);
  }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(gen_); }
  std::int64_t integer(std::int64_t lo, std::int64_t hi) {  // inclusive
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(gen_);
  }
  cx complex_normal() { return cx{normal(), normal()}; }

 private:
  std::mt19937_64 gen_;
};

inline bool is_pow2(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace tfa
