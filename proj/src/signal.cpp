#include "tfa/signal.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "tfa/fft.hpp"

namespace tfa {

void SampledSignal::check_valid() const {
  if (!is_pow2(n())) throw parameter_error("signal length must be a power of two");
  if (dx <= 0.0) throw parameter_error("signal spacing must be positive");
}

std::vector<cx> spectrum(const SampledSignal& f) {
  f.check_valid();
  std::vector<cx> out = f.v;
  fft_forward(out);
  for (std::size_t j = 0; j < out.size(); ++j) {
    // continuous-FT normalization and phase for the grid origin
    out[j] *= f.dx * std::exp(-2.0 * pi * iu * f.xi(j) * f.x0);
  }
  return out;
}

SampledSignal from_spectrum(const std::vector<cx>& fhat, double dx, double x0) {
  SampledSignal f;
  f.v = fhat;
  f.dx = dx;
  f.x0 = x0;
  f.check_valid();
  for (std::size_t j = 0; j < f.n(); ++j) {
    f.v[j] *= std::exp(2.0 * pi * iu * f.xi(j) * x0) / dx;
  }
  fft_backward(f.v);
  return f;
}

double band_radius(const SampledSignal& f, double rel_tol) {
  auto fhat = spectrum(f);
  double peak = 0.0;
  for (const auto& z : fhat) peak = std::max(peak, std::abs(z));
  if (peak == 0.0) return 0.0;
  double r = 0.0;
  for (std::size_t j = 0; j < fhat.size(); ++j) {
    if (std::abs(fhat[j]) > rel_tol * peak) r = std::max(r, std::abs(f.xi(j)));
  }
  return r;
}

double norm_lp(const SampledSignal& f, double p) {
  if (p == inf) return max_abs(f);
  if (p <= 0.0) throw parameter_error("Lp exponent must be positive");
  double acc = 0.0;
  for (const auto& z : f.v) acc += std::pow(std::abs(z), p);
  return std::pow(acc * f.dx, 1.0 / p);
}

double max_abs(const SampledSignal& f) {
  double m = 0.0;
  for (const auto& z : f.v) m = std::max(m, std::abs(z));
  return m;
}

double rel_l2_dist(const SampledSignal& a, const SampledSignal& b) {
  if (a.n() != b.n()) throw parameter_error("signals live on different grids");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.n(); ++i) {
    num += std::norm(a.v[i] - b.v[i]);
    den += std::norm(b.v[i]);
  }
  return den == 0.0 ? std::sqrt(num) : std::sqrt(num / den);
}

SampledSignal random_band_limited(std::size_t n, double dx, double x0,
                                  double band_lo, double band_hi,
                                  std::size_t modes, std::uint64_t seed) {
  SampledSignal f;
  f.v.assign(n, cx{});
  f.dx = dx;
  f.x0 = x0;
  f.check_valid();
  const double dxi = f.dxi();
  auto lo = static_cast<std::int64_t>(std::ceil(band_lo / dxi));
  auto hi = static_cast<std::int64_t>(std::floor(band_hi / dxi));
  lo = std::max(lo, -static_cast<std::int64_t>(n / 2));
  hi = std::min(hi, static_cast<std::int64_t>(n / 2) - 1);
  if (lo > hi) throw parameter_error("frequency band contains no grid modes");
  rng r(seed);
  std::set<std::int64_t> used;
  for (std::size_t m = 0; m < modes; ++m) {
    std::int64_t k = 0;
    for (int attempt = 0; attempt < 64; ++attempt) {
      k = r.integer(lo, hi);
      if (k != 0 && !used.count(k)) break;
    }
    if (k == 0 || used.count(k)) continue;
    used.insert(k);
    const cx c = r.complex_normal();
    const double xi = static_cast<double>(k) * dxi;
    for (std::size_t i = 0; i < n; ++i) {
      f.v[i] += c * std::exp(2.0 * pi * iu * xi * f.x(i));
    }
  }
  return f;
}

void write_signal_csv(const std::string& path, const SampledSignal& f) {
  std::ofstream out(path);
  if (!out) throw parameter_error("cannot open for writing: " + path);
  out << "x,re,im\n";
  out.precision(17);
  for (std::size_t i = 0; i < f.n(); ++i) {
    out << f.x(i) << ',' << f.v[i].real() << ',' << f.v[i].imag() << '\n';
  }
}

SampledSignal read_signal_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw parameter_error("cannot open for reading: " + path);
  std::string line;
  std::getline(in, line);  // header
  std::vector<double> xs;
  SampledSignal f;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tok;
    double c[3] = {0, 0, 0};
    for (int i = 0; i < 3 && std::getline(ss, tok, ','); ++i) c[i] = std::stod(tok);
    xs.push_back(c[0]);
    f.v.emplace_back(c[1], c[2]);
  }
  if (xs.size() < 2) throw parameter_error("signal CSV needs at least two rows");
  f.x0 = xs.front();
  f.dx = xs[1] - xs[0];
  f.check_valid();
  return f;
}

}  // namespace tfa
