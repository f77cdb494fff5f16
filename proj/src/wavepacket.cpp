#include "tfa/wavepacket.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

#include "tfa/fft.hpp"

namespace tfa {
namespace {

// exp(-1/u) for u > 0, else 0; the standard smooth cutoff ingredient.
double bump_half(double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; }

// Smoothstep: 0 for u <= 0, 1 for u >= 1, C^inf monotone in between.
double smoothstep(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  const double a = bump_half(u);
  return a / (a + bump_half(1.0 - u));
}

// Plateau profile: exactly 1 on [-a, a], exactly 0 outside [-b, b].
double plateau_profile(double xi, double a, double b) {
  const double u = std::abs(xi);
  if (u <= a) return 1.0;
  if (u >= b) return 0.0;
  return smoothstep((b - u) / (b - a));
}

}  // namespace

WavePacket make_mother_packet(double r, double plateau_fraction) {
  if (r <= 0.0) throw parameter_error("packet radius must be positive");
  if (plateau_fraction <= 0.0 || plateau_fraction >= 1.0)
    throw parameter_error("plateau fraction must lie in (0, 1)");
  WavePacket p;
  p.r = r;
  p.order = 1 << 30;  // smooth; any finite regularity order is available
  p.plateau = plateau_fraction * r;
  const double a = p.plateau;
  p.profile = [a, r](double xi) -> cx { return plateau_profile(xi, a, r); };
  return p;
}

WavePacket make_reference_bump(double r) {
  WavePacket p = make_mother_packet(r, 7.0 / 8.0);
  return p;
}

double packet_sup(const WavePacket& phi, std::size_t samples) {
  double m = 0.0;
  for (std::size_t i = 0; i <= samples; ++i) {
    const double xi = -phi.r + 2.0 * phi.r * static_cast<double>(i) / static_cast<double>(samples);
    m = std::max(m, std::abs(phi.at(xi)));
  }
  return m;
}

double packet_norm(const WavePacket& phi, int N, std::size_t samples) {
  if (N < 0) throw parameter_error("derivative order must be nonnegative");
  if (!is_pow2(samples)) throw parameter_error("sample count must be a power of two");
  // Spectral differentiation needs the top retained mode to still be
  // meaningful after N multiplications by 2 pi k / L.
  const int supported = static_cast<int>(std::log2(static_cast<double>(samples))) + 4;
  if (N > supported)
    throw precondition_error("derivative order exceeds the resolution-supported order");
  // Period 2L with L = 2r: the profile vanishes identically on r <= |xi| <= 2r,
  // so the periodic extension is as smooth as the profile itself.
  const double L = 4.0 * phi.r;
  std::vector<cx> buf(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    const double xi = -2.0 * phi.r + L * static_cast<double>(i) / static_cast<double>(samples);
    buf[i] = phi.at(xi);
  }
  fft_forward(buf);
  double best = 0.0;
  std::vector<cx> work(samples);
  for (int d = 0; d <= N; ++d) {
    work = buf;
    for (std::size_t j = 0; j < samples; ++j) {
      auto half = static_cast<std::int64_t>(samples / 2);
      auto k = static_cast<std::int64_t>(j);
      if (k >= half) k -= static_cast<std::int64_t>(samples);
      work[j] *= std::pow(2.0 * pi * iu * static_cast<double>(k) / L, d);
    }
    fft_backward(work);
    double sup = 0.0;
    for (const auto& z : work) sup = std::max(sup, std::abs(z));
    best = std::max(best, sup);
  }
  return best;
}

SampledSignal apply_symmetry(const WavePacket& phi, const SymmetryParams& s,
                             std::size_t n, double dx, double x0) {
  if (s.t <= 0.0) throw parameter_error("dilation parameter must be positive");
  const double nyquist = 1.0 / (2.0 * dx);
  if (std::abs(s.eta) + phi.r / s.t >= nyquist)
    throw precondition_error("modulated band does not fit below the grid Nyquist frequency");
  // (Tr_y Mod_eta Dil_t phi)^(xi) = e^{-2 pi i xi y} profile(t (xi - eta))
  SampledSignal g;
  g.v.assign(n, cx{});
  g.dx = dx;
  g.x0 = x0;
  g.check_valid();
  std::vector<cx> fhat(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double xi = g.xi(j);
    fhat[j] = std::exp(-2.0 * pi * iu * xi * s.y) * phi.at(s.t * (xi - s.eta));
  }
  return from_spectrum(fhat, dx, x0);
}

SampledSignal packet_signal(const WavePacket& phi, std::size_t n, double dx, double x0) {
  return apply_symmetry(phi, SymmetryParams{}, n, dx, x0);
}

WavePacket boost_packet(const WavePacket& phi, double theta, BoostKind kind) {
  WavePacket out = phi;
  auto base = phi.profile;
  const double r = phi.r;
  if (kind == BoostKind::zeta) {
    out.profile = [base, theta, r](double xi) -> cx {
      if (xi < -r || xi > r) return cx{};
      return 2.0 * pi * iu * (theta - xi) * base(xi);
    };
  } else {
    // profile' by central differences; the callable is smooth so a small
    // relative step is accurate to ~h^2.
    const double h = std::max(r * 1e-6, 1e-12);
    out.profile = [base, theta, r, h](double xi) -> cx {
      if (xi < -r || xi > r) return cx{};
      const cx hi = (xi + h <= r) ? base(xi + h) : cx{};
      const cx lo = (xi - h >= -r) ? base(xi - h) : cx{};
      return (xi - theta) * (hi - lo) / (2.0 * h);
    };
  }
  if (out.order != (1 << 30)) out.order = std::max(0, out.order - 1);
  out.plateau = 0.0;  // the boost destroys the flat region in general
  return out;
}

Decomposition wp_decompose(const WavePacket& phi, int N, int N_prime,
                           double tol, int k_max) {
  if (N_prime < 1 || N <= N_prime + 1)
    throw parameter_error("decomposition needs N > N' + 1 >= 2");
  const double r = phi.r;
  // Envelope atom: height 1, supported on [-2r, 2r], vanishing like
  // (2r - |z|)^{N' + 1/2} at the edges but smooth in the interior (a |z|-type
  // factor would cap the coefficient decay at k^-2 whenever the profile does
  // not vanish at 0).
  const double expo = static_cast<double>(N_prime) + 0.5;
  auto tilde = [r, expo](double z) -> double {
    const double s = z / (2.0 * r);
    const double u = 1.0 - s * s;
    return u > 0.0 ? std::pow(u, expo) : 0.0;
  };
  // g = profile / envelope is smooth and compactly supported inside [-r, r]
  // (the profile vanishes to all orders at +-r), so its Fourier coefficients
  // on the period-4r torus decay faster than any polynomial.
  const std::size_t m = 8192;
  const double L = 4.0 * r;
  std::vector<cx> g(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double z = -2.0 * r + L * static_cast<double>(i) / static_cast<double>(m);
    const double env = tilde(z);
    g[i] = env > 0.0 ? phi.at(z) / env : cx{};
  }
  fft_forward(g);  // g_hat[j] = sum_i g_i e^{-2 pi i ij/m}; c_k = g_hat[k]/m * phase
  auto coeff = [&](int k) -> cx {
    std::size_t j = static_cast<std::size_t>((k % static_cast<int>(m) + static_cast<int>(m)) %
                                             static_cast<int>(m));
    // account for the grid starting at -2r rather than 0
    return g[j] / static_cast<double>(m) *
           std::exp(2.0 * pi * iu * static_cast<double>(k) / L * (2.0 * r));
  };
  // pick K: beyond it the coefficient tail (summed with the <k>^{-N'} atom
  // heights ~ 1) stays under tol
  int K = 8;
  for (; K < k_max; ++K) {
    double tail = 0.0;
    for (int k = K + 1; k <= std::min(k_max, K + 64); ++k)
      tail += std::abs(coeff(k)) + std::abs(coeff(-k));
    if (tail < tol) break;
  }
  Decomposition d;
  d.K = K;
  double tail = 0.0;
  for (int k = K + 1; k <= k_max; ++k) tail += std::abs(coeff(k)) + std::abs(coeff(-k));
  d.tail_bound = tail;
  for (int k = -K; k <= K; ++k) {
    const double bracket_k = std::sqrt(1.0 + static_cast<double>(k) * static_cast<double>(k));
    d.a.push_back(coeff(k) * std::pow(bracket_k, N_prime));
    WavePacket atom;
    atom.r = 2.0 * r;
    atom.order = N_prime;
    atom.plateau = 0.0;
    const double wt = std::pow(bracket_k, -N_prime);
    const double freq = static_cast<double>(k) / L;
    atom.profile = [tilde, wt, freq](double z) -> cx {
      return wt * std::exp(2.0 * pi * iu * freq * z) * tilde(z);
    };
    d.atoms.push_back(std::move(atom));
  }
  return d;
}

cx decomposition_profile(const Decomposition& d, double xi, int K_use) {
  if (K_use < 0 || K_use > d.K) K_use = d.K;
  cx acc{};
  for (int k = -K_use; k <= K_use; ++k) {
    const auto idx = static_cast<std::size_t>(k + d.K);
    acc += d.a[idx] * d.atoms[idx].at(xi);
  }
  return acc;
}

void write_packet_csv(const std::string& path, const WavePacket& phi, std::size_t samples) {
  std::ofstream out(path);
  if (!out) throw parameter_error("cannot open for writing: " + path);
  out << "xi,re,im\n";
  out.precision(17);
  for (std::size_t i = 0; i <= samples; ++i) {
    const double xi = -phi.r + 2.0 * phi.r * static_cast<double>(i) / static_cast<double>(samples);
    const cx v = phi.at(xi);
    out << xi << ',' << v.real() << ',' << v.imag() << '\n';
  }
}

WavePacket read_packet_csv(const std::string& path, double r, int order) {
  std::ifstream in(path);
  if (!in) throw parameter_error("cannot open for reading: " + path);
  std::string line;
  std::getline(in, line);
  auto xs = std::make_shared<std::vector<double>>();
  auto vs = std::make_shared<std::vector<cx>>();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tok;
    double c[3] = {0, 0, 0};
    for (int i = 0; i < 3 && std::getline(ss, tok, ','); ++i) c[i] = std::stod(tok);
    xs->push_back(c[0]);
    vs->emplace_back(c[1], c[2]);
  }
  if (xs->size() < 2) throw parameter_error("packet CSV needs at least two rows");
  if (xs->front() < -r - 1e-12 || xs->back() > r + 1e-12)
    throw precondition_error("packet samples extend beyond the declared support");
  WavePacket p;
  p.r = r;
  p.order = order;
  p.plateau = 0.0;
  p.profile = [xs, vs](double xi) -> cx {
    if (xi <= xs->front() || xi >= xs->back()) {
      // clamp to endpoint values (they should be ~0 at a true support edge)
      return xi < xs->front() ? vs->front() : vs->back();
    }
    auto it = std::upper_bound(xs->begin(), xs->end(), xi);
    const auto j = static_cast<std::size_t>(it - xs->begin());
    const double u = (xi - (*xs)[j - 1]) / ((*xs)[j] - (*xs)[j - 1]);
    return (1.0 - u) * (*vs)[j - 1] + u * (*vs)[j];
  };
  return p;
}

}  // namespace tfa
