#pragma once
// Thin FFTW wrapper. Plans are created under a mutex (FFTW planning is not
// thread-safe) and cached per size/direction.

#include <vector>

#include "tfa/common.hpp"

namespace tfa {

// In-place complex DFT, unnormalized: X[k] = sum_j x[j] e^{-2 pi i jk/n}
// (sign = -1, "forward") or e^{+2 pi i jk/n} (sign = +1).
void fft(std::vector<cx>& data, int sign);

// Forward/backward with the 1/n normalization on the backward transform, so
// ifft(fft(x)) == x.
inline void fft_forward(std::vector<cx>& data) { fft(data, -1); }
void fft_backward(std::vector<cx>& data);

}  // namespace tfa
