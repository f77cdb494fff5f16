#pragma once
// Complex-valued functions sampled on a uniform spatial grid, with
// FFT-compatible metadata; stand-in for Schwartz-class inputs.

#include <cstdint>
#include <string>
#include <vector>

#include "tfa/common.hpp"

namespace tfa {

struct SampledSignal {
  std::vector<cx> v;    // samples at x0 + i*dx
  double dx = 1.0;      // grid spacing
  double x0 = 0.0;      // first sample position

  std::size_t n() const { return v.size(); }
  double x(std::size_t i) const { return x0 + static_cast<double>(i) * dx; }
  double length() const { return static_cast<double>(n()) * dx; }
  // DFT bin j -> signed mode index and physical frequency.
  std::int64_t mode(std::size_t j) const {
    auto half = static_cast<std::int64_t>(n() / 2);
    auto k = static_cast<std::int64_t>(j);
    return k < half ? k : k - static_cast<std::int64_t>(n());
  }
  double dxi() const { return 1.0 / length(); }
  double xi(std::size_t j) const { return static_cast<double>(mode(j)) * dxi(); }

  void check_valid() const;  // throws parameter_error if n is not a power of two
};

// Samples of the continuous Fourier transform f^(xi_j) = \int f e^{-2 pi i xi_j x} dx
// on the DFT frequency grid (bin order matches SampledSignal::xi).
std::vector<cx> spectrum(const SampledSignal& f);
// Inverse of `spectrum`, reconstructing samples on the same grid.
SampledSignal from_spectrum(const std::vector<cx>& fhat, double dx, double x0);

// Largest |xi| over bins carrying more than `rel_tol` of the peak spectral
// magnitude; used for aliasing/band checks.
double band_radius(const SampledSignal& f, double rel_tol = 1e-12);

double norm_lp(const SampledSignal& f, double p);  // p in (0, inf]
double max_abs(const SampledSignal& f);
double rel_l2_dist(const SampledSignal& a, const SampledSignal& b);

// Finite Fourier series with seeded coefficients on grid frequencies inside
// [band_lo, band_hi]; exact band limits make support predicates checkable.
// Draws `modes` distinct frequencies. DC (mode 0) is never used, so the
// result has exact zero mean.
SampledSignal random_band_limited(std::size_t n, double dx, double x0,
                                  double band_lo, double band_hi,
                                  std::size_t modes, std::uint64_t seed);

// CSV (x, re, im) round-trip.
void write_signal_csv(const std::string& path, const SampledSignal& f);
SampledSignal read_signal_csv(const std::string& path);

}  // namespace tfa
