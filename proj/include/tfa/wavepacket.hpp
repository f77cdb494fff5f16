#pragma once
// Band-limited wave packets represented by their Fourier profile, plus the
// symmetry operators (translate / modulate / dilate), profile norms, boosts,
// and the shifted-packet decomposition.

#include <functional>
#include <string>
#include <vector>

#include "tfa/common.hpp"
#include "tfa/signal.hpp"

namespace tfa {

struct WavePacket {
  // Fourier profile; must vanish outside [-r, r]. Stored as a callable so
  // analytic constructions stay exact (plateau == 1, support edge == 0).
  std::function<cx(double)> profile;
  double r = 0.0;       // frequency half-width
  int order = 0;        // advertised regularity N
  double plateau = 0.0; // half-width of the profile == 1 plateau (0 if none)

  cx at(double xi) const { return xi < -r || xi > r ? cx{} : profile(xi); }
};

struct SymmetryParams {
  double y = 0.0;    // translation
  double eta = 0.0;  // modulation
  double t = 1.0;    // dilation, > 0
};

// Mother packet: real, even, 0 <= profile <= 1, == 1 on [-pf*r, pf*r],
// C^inf smoothstep transition built from exp(-1/x) partitions.
WavePacket make_mother_packet(double r, double plateau_fraction = 0.5);

// A packet whose profile is 1 on B_{7/8 * r} and supported in B_r; used as
// the overlap reference in the integral sizes.
WavePacket make_reference_bump(double r);

// C^N norm of the profile: max over derivative orders 0..N of the sup norm.
// Derivatives via spectral differentiation on a dense sample of [-2r, 2r];
// throws precondition_error if N exceeds the resolution-supported order.
double packet_norm(const WavePacket& phi, int N, std::size_t samples = 4096);

// max |profile| on a dense grid (the C^0 part of packet_norm).
double packet_sup(const WavePacket& phi, std::size_t samples = 4096);

// Tr_y Mod_eta Dil_t phi evaluated on the given signal grid (spectral path:
// the result's spectrum is e^{-2 pi i xi y} profile(t(xi - eta))). Throws
// precondition_error if the shifted band does not fit below Nyquist.
SampledSignal apply_symmetry(const WavePacket& phi, const SymmetryParams& s,
                             std::size_t n, double dx, double x0);

// Spatial samples of the packet itself on a grid (identity symmetry).
SampledSignal packet_signal(const WavePacket& phi, std::size_t n, double dx, double x0);

// Frequency-side boost operators:
//   zeta:  profile(xi) -> 2 pi i (theta - xi) profile(xi)      [(-d_z + 2 pi i theta) phi]
//   sigma: profile(xi) -> (xi - theta) profile'(xi)            [(-d_z + 2 pi i theta)(z phi)]
// Support is unchanged; profile' via central differences on the callable.
enum class BoostKind { zeta, sigma };
WavePacket boost_packet(const WavePacket& phi, double theta, BoostKind kind);

struct Decomposition {
  std::vector<cx> a;              // coefficients, index k = -K..K -> a[k+K]
  std::vector<WavePacket> atoms;  // matching shifted atoms, profiles in [-2r, 2r]
  int K = 0;
  double tail_bound = 0.0;        // estimated sup-norm of the dropped tail
};

// phi = sum_k a_k atom_k with |a_k| <~ <k>^-(N - N') and atom norms O(1) in
// Phi^{N'}_{2r}. Requires N > N' + 1; K chosen so the estimated tail is
// below `tol` (capped at k_max).
Decomposition wp_decompose(const WavePacket& phi, int N, int N_prime,
                           double tol = 1e-9, int k_max = 256);

// Evaluate the truncated decomposition's profile at xi (for round-trip checks).
cx decomposition_profile(const Decomposition& d, double xi, int K_use);

// CSV (xi, re, im) round-trip; import validates the support invariant and
// wraps the samples in a linear interpolator.
void write_packet_csv(const std::string& path, const WavePacket& phi,
                      std::size_t samples = 2048);
WavePacket read_packet_csv(const std::string& path, double r, int order);

}  // namespace tfa
