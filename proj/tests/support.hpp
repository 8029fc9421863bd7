#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>

#include "ddotfs/channel.hpp"
#include "ddotfs/ddcore.hpp"
#include "ddotfs/types.hpp"

namespace testing {

using ddotfs::cd;

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed * 0x9e3779b97f4a7c15ULL + 17); }

inline cd gauss(std::mt19937_64& g) {
  std::normal_distribution<double> n(0.0, std::sqrt(0.5));
  const double re = n(g);
  return {re, n(g)};
}

inline ddotfs::core::DDFrame random_frame(int n, int m, std::mt19937_64& g) {
  ddotfs::core::DDFrame f(n, m);
  for (auto& v : f.data()) v = gauss(g);
  return f;
}

inline ddotfs::CVec random_signal(std::size_t len, std::mt19937_64& g) {
  ddotfs::CVec v(len);
  for (auto& x : v) x = gauss(g);
  return v;
}

inline Eigen::VectorXcd random_vector(int len, std::mt19937_64& g) {
  Eigen::VectorXcd v(len);
  for (int i = 0; i < len; ++i) v[i] = gauss(g);
  return v;
}

inline Eigen::MatrixXcd random_matrix(int rows, int cols, std::mt19937_64& g) {
  Eigen::MatrixXcd a(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) a(i, j) = gauss(g);
  return a;
}

// Paths given directly in grid units: delay l (samples) and Doppler k (bins of 1/(MNT)).
inline ddotfs::channel::PathComponent grid_path(double l, double k, Eigen::VectorXcd h,
                                                const ddotfs::core::FrameParams& p) {
  return {l * p.sample_interval_s(), k / (p.frame_samples() * p.sample_interval_s()), std::move(h)};
}

// L paths with uniform fractional delays in [0, max_delay) and Dopplers in [-max_doppler, max_doppler).
inline ddotfs::channel::MultipathChannel random_grid_channel(int paths, int antennas, double max_delay,
                                                             double max_doppler, const ddotfs::core::FrameParams& p,
                                                             std::mt19937_64& g) {
  std::uniform_real_distribution<double> ud(0.0, max_delay);
  std::uniform_real_distribution<double> uk(-max_doppler, max_doppler);
  ddotfs::channel::MultipathChannel ch;
  for (int i = 0; i < paths; ++i) {
    const double l = ud(g);
    const double k = uk(g);
    ch.paths.push_back(grid_path(l, k, random_vector(antennas, g), p));
  }
  return ch;
}

}  // namespace testing
