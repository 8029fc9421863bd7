#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

#include "ddotfs/ddcore.hpp"
#include "ddotfs/types.hpp"

namespace ddotfs::channel {

struct PathComponent {
  double delay_s = 0.0;
  double doppler_hz = 0.0;
  Eigen::VectorXcd gain;  // h_p, length M_t
};

struct MultipathChannel {
  std::vector<PathComponent> paths;

  int antennas() const { return paths.empty() ? 0 : static_cast<int>(paths.front().gain.size()); }
  // Checks non-zero gains, common antenna count, 0 <= tau_p < T_s.
  void validate(const core::FrameParams& params) const;
};

// Delay and Doppler on the sampling grid, split into nearest integer plus a
// fractional part in [-0.5, 0.5).
struct SampledPath {
  double delay = 0.0;     // l_p = tau_p / T
  long delay_int = 0;     // l_pi
  double delay_frac = 0;  // l_pf
  double doppler = 0.0;   // k_p = nu_p * N * M * T
  long doppler_int = 0;   // k_pi
  double doppler_frac = 0;  // k_pf
};

SampledPath decompose(double delay_s, double doppler_hz, const core::FrameParams& params);
std::vector<SampledPath> decompose(const MultipathChannel& channel, const core::FrameParams& params);

enum class PulseKind { ideal_sinc, root_raised_cosine };

// Real, even pulse normalized to p(0) = 1. Sums over the pulse run over the
// 2W+1 integer offsets z in [-W, W].
class PulseShape {
 public:
  static PulseShape ideal_sinc(double sample_interval_s, int half_width = 16);
  static PulseShape root_raised_cosine(double sample_interval_s, double rolloff, int half_width = 16);

  double evaluate(double t_seconds) const { return at_samples(t_seconds / sample_interval_s_); }
  // Pulse evaluated at t = u * T.
  double at_samples(double u) const;

  PulseKind kind() const { return kind_; }
  double rolloff() const { return rolloff_; }
  int half_width() const { return half_width_; }
  double sample_interval_s() const { return sample_interval_s_; }

 private:
  PulseShape(PulseKind kind, double sample_interval_s, double rolloff, int half_width);

  PulseKind kind_;
  double sample_interval_s_;
  double rolloff_;
  int half_width_;
};

// ULA with half-wavelength spacing: a_m = e^{j pi m sin(theta)}.
Eigen::VectorXcd steering_vector(double theta, int antennas);

struct ChannelGenConfig {
  int num_paths = 5;
  double max_delay_s = 500e-9;
  double max_speed_mps = 300.0 / 3.6;
  double carrier_hz = 28e9;
  int antennas = 16;
  std::uint64_t rng_seed = 1;
  double path_loss_db = 0.0;  // common large-scale attenuation applied to every alpha_p

  void validate() const;
};

// L paths with iid U[0, tau_max] delays, iid U[-nu_max, nu_max] Dopplers and
// h_p = alpha_p a(theta_p), theta_p ~ U[-pi/2, pi/2], alpha_p ~ CN(0, 1/L).
MultipathChannel random_channel(const ChannelGenConfig& cfg);

struct ApplyOptions {
  // Number of leading columns of s that precede time index 0 (a frame-level
  // prefix produced by the precoder). Indices older than the prefix wrap
  // cyclically modulo M*N.
  int prefix_len = 0;
  // Zero-pad instead of wrapping.
  bool linear_edges = false;
};

/**
 * Sampled LTV channel:
 *   y[n] = sum_p h_p^H sum_{|z|<=W} s[n - z - l_pi] p(zT - l_pf T) e^{j2pi k_p n/(NM)} + w[n]
 * for n = 0..MN-1, with s indexed cyclically (see ApplyOptions) and w iid
 * CN(0, N0*B). s has M_t rows and prefix_len + M*N columns.
 */
CVec apply_channel(const Eigen::MatrixXcd& s, const MultipathChannel& channel, const PulseShape& pulse,
                   double noise_psd_w_hz, const core::FrameParams& params, std::uint64_t noise_seed,
                   const ApplyOptions& options = {});

// Periodic Doppler leakage kernel (e^{-j2pi d} - 1)/(e^{-j2pi d/N} - 1),
// equal to N when d is a multiple of N.
cd doppler_kernel(double d, int time_slots);

// Wraps a real Doppler offset into (-N/2, N/2].
double wrap_doppler(double d, int time_slots);

// Signed representative in (-N/2, N/2] of a Doppler bin index.
int signed_doppler_bin(int k, int time_slots);

/**
 * Delay-Doppler bin response
 *   h_bin[k, m] = sum_p h_p p((m - l_p)T) conj(G(k - k_p))
 * so that y[n] = sum_{k,m} h_bin[k,m]^H s[n - m] e^{j2pi k n/(MN)} / N with
 * the kernel unconjugated, over Doppler bins k = 0..N-1 (k - k_p wrapped into (-N/2, N/2]) and delay
 * bins m in [delay_min, delay_min + delay_bins). A path contributes to the
 * delay bins with |m - l_pi| <= W, matching apply_channel.
 */
class BinResponse {
 public:
  BinResponse(int doppler_bins, int delay_min, int delay_bins, int antennas);

  int doppler_bins() const { return n_; }
  int delay_min() const { return delay_min_; }
  int delay_max() const { return delay_min_ + delay_bins_ - 1; }
  int delay_bins() const { return delay_bins_; }
  int antennas() const { return antennas_; }

  // k wraps modulo N; delays outside the stored range read as zero.
  Eigen::VectorXcd at(int k, int m) const;
  Eigen::Ref<Eigen::VectorXcd> mutable_at(int k, int m);
  double power(int k, int m) const;

 private:
  std::size_t column(int k, int m) const;

  int n_;
  int delay_min_;
  int delay_bins_;
  int antennas_;
  Eigen::MatrixXcd data_;  // antennas x (N * delay_bins)
};

BinResponse bin_channel_response(const MultipathChannel& channel, const PulseShape& pulse,
                                 const core::FrameParams& params);

}  // namespace ddotfs::channel
