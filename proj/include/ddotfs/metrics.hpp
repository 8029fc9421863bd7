#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "ddotfs/alignment.hpp"
#include "ddotfs/channel.hpp"
#include "ddotfs/ddcore.hpp"

namespace ddotfs::metrics {

struct SinrReport {
  double signal_power = 0.0;
  double interference_power = 0.0;  // every residual term within the pulse support
  double noise_power = 0.0;
  double sinr = 0.0;
  double sinr_db = 0.0;
  // Share of interference_power inside the reporting window (|z| <= N_i,
  // and |i| <= K_i in bin mode) and the SINR that counts only that share.
  double window_interference_power = 0.0;
  double window_sinr = 0.0;
};

SinrReport make_report(double signal, double interference, double window_interference, double noise);

/**
 * Analytic SINR of path-based alignment. With beta_p = hbar_p^H f_p,
 *   signal       = |sum_p beta_p p(-l_pf T)|^2
 *   interference = sum_{0<|z|<=W} |sum_p beta_p p(zT - l_pf T) e^{j2pi k_p z/(NM)}|^2
 * plus, when the nulling condition does not hold (isi_mrt), the leakage
 * sum_{p != p'} sum_z |h_p^H f_p' p(zT - l_pf T)|^2 of mismatched
 * path/beam pairs. noise = N0 * B.
 */
SinrReport sinr_path(const channel::MultipathChannel& channel, std::span<const channel::SampledPath> paths,
                     const ddam::AlignmentPlan& plan, const channel::PulseShape& pulse,
                     int interference_delay_taps, double noise_psd_w_hz, const core::FrameParams& params);

/**
 * Analytic SINR of bin-based alignment over the bin response (scaled by
 * 1/N, the normalization of the Doppler kernel):
 *   signal       = |sum_g hbar_bin[k_g,l_g]^H f_g|^2
 *   interference = sum_{(i,z) != (0,0)} |sum_g' h_bin[k_g'+i, l_g'+z]^H f_g' theta'|^2
 *   theta'       = e^{j2pi [i (n_max + z) + k_g' (z + l_g')]/(MN)}
 * with i over the whole cyclic Doppler axis and z over the stored delay range.
 */
SinrReport sinr_bin(const channel::BinResponse& h_bin, const ddam::AlignmentPlan& plan,
                    int interference_delay_taps, int interference_doppler_taps, double noise_psd_w_hz,
                    const core::FrameParams& params);

// (1 - rho) log2(1 + sinr)
double spectral_efficiency(double sinr_linear, double cp_overhead);

// Q-times oversampling by zero padding the DFT of a periodic sequence.
CVec oversample(std::span<const cd> x, int factor);

// max |s_Q|^2 / mean |s_Q|^2 of a scalar signal.
double papr(std::span<const cd> x, int oversample_factor = 4);
// Same for the sum-power envelope ||s[:, n]||^2 of a multi-antenna signal.
double papr_envelope(const Eigen::MatrixXcd& s, int oversample_factor = 4);

inline double to_db(double linear) { return 10.0 * std::log10(linear); }

struct CcdfCurve {
  std::vector<double> thresholds_db;
  std::vector<double> ccdf;
};

// Counts of samples strictly above each threshold; mergeable across workers.
class CcdfAccumulator {
 public:
  explicit CcdfAccumulator(std::vector<double> thresholds_db);

  void add(double sample_db);
  void merge(const CcdfAccumulator& other);
  std::size_t total() const { return total_; }
  CcdfCurve curve() const;

 private:
  std::vector<double> thresholds_;
  std::vector<std::size_t> above_;
  std::size_t total_ = 0;
};

CcdfCurve ccdf(std::span<const double> samples_db, std::span<const double> thresholds_db);

// Smallest sample value v with P(sample > v) <= probability.
double ccdf_level(std::span<const double> samples_db, double probability);

}  // namespace ddotfs::metrics
