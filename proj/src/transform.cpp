#include "tfa/transform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tfa/fft.hpp"

namespace tfa {
namespace {

int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

void require_same_grid(const SampledSignal& a, const SampledSignal& b) {
  if (a.n() != b.n() || a.dx != b.dx || a.x0 != b.x0)
    throw parameter_error("signals live on different grids");
}

// Occupied signed-mode range [lo, hi] of a spectrum (relative threshold);
// returns false if the spectrum is identically 0.
bool mode_range(const SampledSignal& f, const std::vector<cx>& fhat,
                std::int64_t& lo, std::int64_t& hi) {
  double peak = 0.0;
  for (const auto& z : fhat) peak = std::max(peak, std::abs(z));
  if (peak == 0.0) return false;
  lo = std::numeric_limits<std::int64_t>::max();
  hi = std::numeric_limits<std::int64_t>::min();
  for (std::size_t j = 0; j < fhat.size(); ++j) {
    if (std::abs(fhat[j]) > 1e-13 * peak) {
      lo = std::min(lo, f.mode(j));
      hi = std::max(hi, f.mode(j));
    }
  }
  return true;
}

}  // namespace

SampledSignal bilinear_multiplier(const SampledSignal& f1, const SampledSignal& f2,
                                  const std::function<double(double, double)>& mult,
                                  cx prefactor) {
  require_same_grid(f1, f2);
  const std::size_t n = f1.n();
  const double dxi = f1.dxi();
  auto F1 = spectrum(f1);
  auto F2 = spectrum(f2);
  // Output frequencies are xi1 + xi2 = m * dxi with m in [-n, n-2]; fold m
  // modulo n for point evaluation on the original grid (exact: e^{2 pi i m
  // dxi x_i} depends on the folded index once the x0 phase is kept with the
  // true m).
  std::vector<cx> phase(2 * n);
  for (std::size_t u = 0; u < 2 * n; ++u) {
    const auto m = static_cast<std::int64_t>(u) - static_cast<std::int64_t>(n);
    phase[u] = std::exp(2.0 * pi * iu * (static_cast<double>(m) * dxi) * f1.x0);
  }
  std::vector<std::int64_t> modes(n);
  std::vector<double> xis(n);
  for (std::size_t j = 0; j < n; ++j) {
    modes[j] = f1.mode(j);
    xis[j] = f1.xi(j);
  }
  std::vector<cx> acc(n, cx{});
  for (std::size_t j1 = 0; j1 < n; ++j1) {
    if (F1[j1] == cx{}) continue;
    for (std::size_t j2 = 0; j2 < n; ++j2) {
      if (F2[j2] == cx{}) continue;
      const double w = mult(xis[j1], xis[j2]);
      if (w == 0.0) continue;
      const std::int64_t m = modes[j1] + modes[j2];
      const auto folded = static_cast<std::size_t>(
          (m % static_cast<std::int64_t>(n) + static_cast<std::int64_t>(n)) %
          static_cast<std::int64_t>(n));
      acc[folded] += F1[j1] * F2[j2] * w * phase[static_cast<std::size_t>(m + static_cast<std::int64_t>(n))];
    }
  }
  fft(acc, +1);  // sum_m acc[m] e^{+2 pi i m i / n}
  SampledSignal out;
  out.dx = f1.dx;
  out.x0 = f1.x0;
  out.v = std::move(acc);
  const cx scale = prefactor * dxi * dxi;
  for (auto& z : out.v) z *= scale;
  return out;
}

SampledSignal direct_bht(const SampledSignal& f1, const SampledSignal& f2, double beta) {
  if (beta <= 0.0 || beta > 1.0)
    throw parameter_error("beta must lie in (0, 1]");
  require_same_grid(f1, f2);
  const double nyquist = 1.0 / (2.0 * f1.dx);
  if (band_radius(f1) + band_radius(f2) > nyquist)
    throw precondition_error("combined frequency support exceeds Nyquist; refine the grid");
  return bilinear_multiplier(
      f1, f2,
      [beta](double xi1, double xi2) {
        return static_cast<double>(sign_of(xi1 - beta * xi2));
      },
      -pi * iu);
}

SampledSignal hilbert(const SampledSignal& f) {
  auto fhat = spectrum(f);
  SampledSignal probe = f;  // for mode lookup only
  for (std::size_t j = 0; j < fhat.size(); ++j) {
    fhat[j] *= -iu * static_cast<double>(sign_of(probe.xi(j)));
  }
  return from_spectrum(fhat, f.dx, f.x0);
}

ZeroLimitReport bht_zero_limit_check(const SampledSignal& f1, const SampledSignal& f2,
                                     double beta_min, int sweep_len) {
  if (sweep_len < 2) throw parameter_error("sweep needs at least two beta values");
  ZeroLimitReport rep;
  // Limit reference: BHT_0 = pi (H f1) f2.
  SampledSignal ref = hilbert(f1);
  for (std::size_t i = 0; i < ref.n(); ++i) ref.v[i] *= pi * f2.v[i];
  // The beta = 0 multiplier evaluated through the same double-sum path; its
  // distance to `ref` is the quadrature noise floor of the method.
  SampledSignal zero_mult = bilinear_multiplier(
      f1, f2, [](double xi1, double) { return static_cast<double>(sign_of(xi1)); },
      -pi * iu);
  double base = 0.0;
  for (std::size_t i = 0; i < ref.n(); ++i)
    base = std::max(base, std::abs(zero_mult.v[i] - ref.v[i]));
  rep.baseline_error = base;
  const double b_hi = 0x1p-2;
  for (int s = 0; s < sweep_len; ++s) {
    const double frac = static_cast<double>(s) / static_cast<double>(sweep_len - 1);
    const double beta = b_hi * std::pow(beta_min / b_hi, frac);
    SampledSignal out = direct_bht(f1, f2, beta);
    double dev = 0.0;
    for (std::size_t i = 0; i < out.n(); ++i)
      dev = std::max(dev, std::abs(out.v[i] - ref.v[i]));
    rep.betas.push_back(beta);
    rep.deviations.push_back(dev);
  }
  rep.deviation_at_min = rep.deviations.back();
  rep.trend_decreasing = rep.deviations.back() <= rep.deviations.front();
  return rep;
}

double halfplane_multiplier(const WavePacket& phi0, double beta, double xi_tilde,
                            std::size_t theta_nodes) {
  if (theta_nodes < 8) throw parameter_error("theta quadrature needs >= 8 nodes");
  const double r = phi0.r;
  // first factor restricts theta to [-r, r]; trapezoid there
  const double h = 2.0 * r / static_cast<double>(theta_nodes);
  double acc = 0.0;
  for (std::size_t i = 0; i <= theta_nodes; ++i) {
    const double theta = -r + static_cast<double>(i) * h;
    const double w = (i == 0 || i == theta_nodes) ? 0.5 : 1.0;
    const double a = std::real(phi0.at(-theta));
    if (a == 0.0) continue;
    const double b = std::real(phi0.at(-xi_tilde - theta + 1.0));
    if (b == 0.0) continue;
    const double c = std::real(phi0.at(-xi_tilde - (1.0 + beta) * theta + 1.0));
    acc += w * a * b * c;
  }
  return acc * h;
}

namespace {

double c_beta_once(const WavePacket& phi0, double beta, double xi_tilde,
                   std::size_t t_nodes) {
  // m(t xi~) is supported where t xi~ is within 2r of 1
  const double r = phi0.r;
  const double t_lo = (1.0 - 2.0 * r) / xi_tilde;
  const double t_hi = (1.0 + 2.0 * r) / xi_tilde;
  const double dl = std::log(t_hi / t_lo) / static_cast<double>(t_nodes);
  double acc = 0.0;
  for (std::size_t i = 0; i <= t_nodes; ++i) {
    const double t = t_lo * std::exp(static_cast<double>(i) * dl);
    const double w = (i == 0 || i == t_nodes) ? 0.5 : 1.0;
    acc += w * halfplane_multiplier(phi0, beta, t * xi_tilde, 1024);
  }
  return acc * dl;
}

}  // namespace

double c_beta(const WavePacket& phi0, double beta, std::size_t t_nodes, double rel_tol) {
  const double c1 = c_beta_once(phi0, beta, 1.0, t_nodes);
  // scale invariance probed with different node counts so the change of
  // variables t' = t xi~ does not make the comparison a tautology
  const double c2 = c_beta_once(phi0, beta, 2.0, t_nodes + 37);
  const double c3 = c_beta_once(phi0, beta, 0.5, t_nodes + 101);
  const double lo = std::min({c1, c2, c3});
  const double hi = std::max({c1, c2, c3});
  if (lo <= 0.0 || (hi - lo) / hi > rel_tol)
    throw precondition_error("scale-integral quadrature under-resolved; increase t_nodes");
  return c1;
}

Representation wp_representation(const SampledSignal& f1, const SampledSignal& f2,
                                 double beta, const WavePacket& phi0,
                                 const TruncationRegion& region,
                                 std::size_t eta_nodes,
                                 std::size_t t_nodes_per_octave) {
  if (beta <= 0.0 || beta > 1.0) throw parameter_error("beta must lie in (0, 1]");
  require_same_grid(f1, f2);
  if (!(region.t_lo > 0.0) || !(region.t_hi > region.t_lo))
    throw parameter_error("scale window must satisfy 0 < t_lo < t_hi");
  if (!(region.eta_hi > region.eta_lo) || !(region.y_hi > region.y_lo))
    throw parameter_error("eta and y windows must be nondegenerate");
  const double r = phi0.r;
  // Support separation: for theta in B_r the bands shifted by -1 and by
  // (1+beta) theta - 1 must stay clear of B_r, otherwise the three-profile
  // identity breaks down.
  if (1.0 - r <= 2.0 * r || 1.0 - (1.0 + beta) * r <= r)
    throw precondition_error(
        "support-separation predicate fails; choose a smaller packet radius r");

  Representation rep;
  rep.c_constant = c_beta(phi0, beta);
  const std::size_t n = f1.n();
  auto F1 = spectrum(f1);
  auto F2 = spectrum(f2);
  std::int64_t m1lo = 0, m1hi = 0, m2lo = 0, m2hi = 0;
  const bool occ1 = mode_range(f1, F1, m1lo, m1hi);
  const bool occ2 = mode_range(f2, F2, m2lo, m2hi);

  std::vector<cx> out_hat(n, cx{});
  double tail = 0.0;
  // L1 norm of the spatial packet, used in the truncation bounds
  const double phi_l1 = [&] {
    SampledSignal ps = packet_signal(phi0, 4096, 1.0 / (64.0 * r), -32.0 / r);
    return norm_lp(ps, 1.0);
  }();

  if (occ1 && occ2) {
    const double dxi = f1.dxi();
    const double b1lo = static_cast<double>(m1lo) * dxi, b1hi = static_cast<double>(m1hi) * dxi;
    const double b2lo = static_cast<double>(m2lo) * dxi, b2hi = static_cast<double>(m2hi) * dxi;
    double a1max = 0.0, a2max = 0.0;  // sum |f^| dxi bounds sup of the slices
    for (const auto& z : F1) a1max += std::abs(z) * dxi;
    for (const auto& z : F2) a2max += std::abs(z) * dxi;

    const std::size_t nt = std::max<std::size_t>(
        2, static_cast<std::size_t>(std::ceil(
               std::log2(region.t_hi / region.t_lo) *
               static_cast<double>(t_nodes_per_octave))));
    const double dl = std::log(region.t_hi / region.t_lo) / static_cast<double>(nt);
    const double de = (region.eta_hi - region.eta_lo) / static_cast<double>(eta_nodes);

    std::vector<cx> A(n), B(n), S(n);
    for (std::size_t it = 0; it <= nt; ++it) {
      const double t = region.t_lo * std::exp(static_cast<double>(it) * dl);
      const double wt = (it == 0 || it == nt) ? 0.5 : 1.0;
      // theta window where both convolution factors can be nonzero
      const double th_lo = std::max(t * b1lo - r, beta * t * b2lo + 1.0 - r);
      const double th_hi = std::min(t * b1hi + r, beta * t * b2hi + 1.0 + r);
      if (th_lo >= th_hi) continue;
      // part of the theta window the eta grid misses at this scale
      const double g_lo = region.eta_lo * t, g_hi = region.eta_hi * t;
      const double miss = std::max(0.0, th_hi - th_lo -
                                            std::max(0.0, std::min(th_hi, g_hi) -
                                                              std::max(th_lo, g_lo)));
      tail += (2.0 / rep.c_constant) * wt * dl * t * miss * a1max * a2max * phi_l1;
      for (std::size_t ie = 0; ie <= eta_nodes; ++ie) {
        const double eta = region.eta_lo + static_cast<double>(ie) * de;
        const double theta = eta * t;
        if (theta < th_lo || theta > th_hi) continue;
        const double we = (ie == 0 || ie == eta_nodes) ? 0.5 : 1.0;
        for (std::size_t j = 0; j < n; ++j) {
          const double xi = f1.xi(j);
          A[j] = F1[j] * phi0.at(t * xi - theta);
          B[j] = F2[j] * phi0.at(beta * t * xi - theta + 1.0);
        }
        // to spatial samples of the two convolution factors
        for (std::size_t j = 0; j < n; ++j) {
          A[j] *= std::exp(2.0 * pi * iu * f1.xi(j) * f1.x0) / f1.dx;
          B[j] *= std::exp(2.0 * pi * iu * f1.xi(j) * f1.x0) / f1.dx;
        }
        fft_backward(A);
        fft_backward(B);
        const double w3 = wt * we * dl * t * de;  // dtheta dt/t = t deta dlog t
        double outside = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double y = f1.x(i);
          const cx prod = A[i] * B[i];
          if (y < region.y_lo || y > region.y_hi) {
            outside += std::abs(prod);
            S[i] = cx{};
          } else {
            S[i] = prod;
          }
        }
        tail += (2.0 / rep.c_constant) * w3 * outside * f1.dx * phi_l1;
        // spectrum of the windowed product, then multiply by the third
        // packet's profile and accumulate
        fft_forward(S);
        for (std::size_t j = 0; j < n; ++j) {
          const double xi = f1.xi(j);
          const cx sh = S[j] * f1.dx * std::exp(-2.0 * pi * iu * xi * f1.x0);
          out_hat[j] += w3 * sh * phi0.at(beta * t * xi - (1.0 + beta) * theta + 1.0);
        }
      }
    }
    // multiplier deficit of the t-truncation (full theta, y): exact on the
    // occupied frequency pairs
    double worst = 0.0;
    for (std::int64_t k1 = m1lo; k1 <= m1hi; ++k1) {
      for (std::int64_t k2 = m2lo; k2 <= m2hi; ++k2) {
        const double xt = (static_cast<double>(k1) - beta * static_cast<double>(k2)) * dxi;
        if (xt == 0.0) continue;
        // m(t xt) lives on t in [(1-2r)/xt, (1+2r)/xt] for xt > 0
        double deficit;
        if (xt > 0.0) {
          const double lo = (1.0 - 2.0 * r) / xt, hi = (1.0 + 2.0 * r) / xt;
          if (region.t_lo <= lo && region.t_hi >= hi) {
            deficit = 0.0;
          } else {
            deficit = 1.0;  // crude: up to the whole constant can be missing
          }
        } else {
          deficit = 0.0;  // negative xt never contributes
        }
        worst = std::max(worst, deficit);
      }
    }
    tail += 2.0 * worst * a1max * a2max;
  }

  SampledSignal integral = from_spectrum(out_hat, f1.dx, f1.x0);
  rep.value = f1;
  for (std::size_t i = 0; i < n; ++i) {
    rep.value.v[i] = f1.v[i] * f2.v[i] - (2.0 / rep.c_constant) * integral.v[i];
  }
  rep.tail_estimate = tail;
  return rep;
}

}  // namespace tfa
