#include "tfa/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace tfa {
namespace {

std::mutex plan_mutex;
std::map<std::pair<std::size_t, int>, fftw_plan> plan_cache;

fftw_plan plan_for(std::size_t n, int sign) {
  std::lock_guard lock(plan_mutex);
  auto key = std::make_pair(n, sign);
  auto it = plan_cache.find(key);
  if (it != plan_cache.end()) return it->second;
  // Planned once per size with a scratch buffer; executed later on user
  // arrays via the new-array interface (alignment-safe with FFTW_UNALIGNED).
  std::vector<cx> scratch(n);
  auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
  fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), p, p, sign,
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
  plan_cache.emplace(key, plan);
  return plan;
}

}  // namespace

void fft(std::vector<cx>& data, int sign) {
  if (data.empty()) return;
  fftw_plan plan = plan_for(data.size(), sign);
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, p, p);
}

void fft_backward(std::vector<cx>& data) {
  fft(data, +1);
  const double inv = 1.0 / static_cast<double>(data.size());
  for (auto& z : data) z *= inv;
}

}  // namespace tfa
