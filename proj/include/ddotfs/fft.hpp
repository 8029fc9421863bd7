#pragma once

#include <span>

#include "ddotfs/types.hpp"

namespace ddotfs {

// Unnormalized in-place DFT backed by FFTW. Plans are cached per
// (length, direction) and shared across threads.
//   forward: X[k] = sum_n x[n] e^{-j2pi kn/n_len}
//   inverse: x[n] = sum_k X[k] e^{+j2pi kn/n_len}
void fft_inplace(std::span<cd> data, bool inverse);

}  // namespace ddotfs
