#pragma once
// The bilinear transform evaluated through its frequency multiplier, the
// halfplane multiplier m and its scale-integral constant, and the
// wave-packet representation with truncation-error reporting.

#include <functional>
#include <vector>

#include "tfa/signal.hpp"
#include "tfa/wavepacket.hpp"

namespace tfa {

// Generic bilinear multiplier quadrature:
//   out(x) = prefactor * sum_{xi1, xi2} f1^(xi1) f2^(xi2) mult(xi1, xi2)
//            e^{2 pi i (xi1 + xi2) x} dxi^2
// evaluated exactly at the grid points (output frequencies folded modulo the
// grid's frequency period, which is lossless for point evaluation).
SampledSignal bilinear_multiplier(const SampledSignal& f1, const SampledSignal& f2,
                                  const std::function<double(double, double)>& mult,
                                  cx prefactor);

// The transform itself: multiplier -pi i sgn(xi1 - beta xi2), sgn(0) = 0.
// beta in (0, 1]; throws parameter_error otherwise, and precondition_error if
// the combined band exceeds Nyquist (aliased output frequencies would collide
// with genuine ones).
SampledSignal direct_bht(const SampledSignal& f1, const SampledSignal& f2, double beta);

// Hilbert transform via the -i sgn(xi) multiplier (single FFT pair).
SampledSignal hilbert(const SampledSignal& f);

struct ZeroLimitReport {
  std::vector<double> betas;       // decreasing sweep
  std::vector<double> deviations;  // max |direct_bht(beta) - pi H f1 f2|
  double deviation_at_min = 0.0;   // deviation at the smallest beta
  double baseline_error = 0.0;     // quadrature error of the beta = 0 multiplier itself
  bool trend_decreasing = false;   // last deviation <= first deviation
};

// Compares direct_bht against the degenerate limit pi (H f1) f2 over a
// decreasing beta sweep ending at beta_min.
ZeroLimitReport bht_zero_limit_check(const SampledSignal& f1, const SampledSignal& f2,
                                     double beta_min = 0x1p-10, int sweep_len = 5);

// m(xi~) = int profile(-theta) profile(-xi~ - theta + 1)
//              profile(-xi~ - (1+beta) theta + 1) dtheta,
// quadrature over the first factor's support.
double halfplane_multiplier(const WavePacket& phi0, double beta, double xi_tilde,
                            std::size_t theta_nodes = 2048);

// C = int m(t) dt/t over the support window (geometric grid); verifies the
// scale-invariance C = int m(t xi~) dt/t at xi~ in {1, 2, 1/2} and throws
// precondition_error if the spread exceeds rel_tol.
double c_beta(const WavePacket& phi0, double beta, std::size_t t_nodes = 2048,
              double rel_tol = 1e-6);

struct TruncationRegion {
  double eta_lo = 0.0, eta_hi = 0.0;  // uniform eta window
  double y_lo = 0.0, y_hi = 0.0;      // spatial window applied to the inner product
  double t_lo = 0.0, t_hi = 0.0;      // geometric scale window, 0 < t_lo < t_hi
};

struct Representation {
  SampledSignal value;        // f1 f2 - (2/C) * truncated triple integral
  double tail_estimate = 0.0; // bound on the |integrand| mass outside the region
  double c_constant = 0.0;    // the C used
};

// Wave-packet representation of (1/2) f1 f2 - (1/(2 pi i)) BHT evaluated by
// slice-wise FFT quadrature over the truncation region; `value` approximates
// direct_bht / (pi i). Throws precondition_error when the support-separation
// predicate fails for the packet radius (message suggests a smaller r).
Representation wp_representation(const SampledSignal& f1, const SampledSignal& f2,
                                 double beta, const WavePacket& phi0,
                                 const TruncationRegion& region,
                                 std::size_t eta_nodes = 192,
                                 std::size_t t_nodes_per_octave = 16);

}  // namespace tfa
