#pragma once

#include <Eigen/Dense>

#include <span>
#include <utility>
#include <vector>

#include "ddotfs/channel.hpp"
#include "ddotfs/ddcore.hpp"

namespace ddotfs::ddam {

enum class AlignMode { path, bin };

struct AlignmentEntry {
  long kappa = 0;          // integer delay compensation, samples
  double b = 0.0;          // Doppler compensation, cycles per M*N samples
  Eigen::VectorXcd f;      // beamformer; empty until designed
};

struct DopplerDelayBin {
  int doppler;  // signed Doppler bin in (-N/2, N/2]
  int delay;
  bool operator==(const DopplerDelayBin&) const = default;
};

struct AlignmentPlan {
  AlignMode mode = AlignMode::path;
  std::vector<AlignmentEntry> entries;
  long n_max = 0;
  std::vector<DopplerDelayBin> selected_bins;  // bin mode only, one per entry

  bool beamformers_set() const;
  void set_beamformers(std::vector<Eigen::VectorXcd> f);
};

enum class BeamformerStrategy { isi_zf, isi_mrt };

struct BeamformerDesign {
  BeamformerStrategy strategy = BeamformerStrategy::isi_zf;
  double total_power_w = 1.0;
};

struct BinSelectParams {
  double threshold_ratio = 0.1;  // C in (0, 1)
};

// n_max = max l_pi, kappa_p = n_max - l_pi, b_p = -k_p (fractional part kept).
AlignmentPlan plan_path_alignment(std::span<const channel::SampledPath> paths);

/**
 * Per-entry beamformers with equal power P/D.
 *   isi_mrt: f_d = sqrt(P/D) g_d / |g_d|
 *   isi_zf:  f_d = sqrt(P/D) Pi_d g_d / |Pi_d g_d|, Pi_d projecting onto the
 *            orthogonal complement of span{g_d' : d' != d}, so g_d'^H f_d = 0.
 * Throws NumericalError when M_t < D (zf) or when g_d lies in the span of
 * the others.
 */
std::vector<Eigen::VectorXcd> design_beamformers(std::span<const Eigen::VectorXcd> vectors,
                                                 const BeamformerDesign& design);

// s[:, n] = sum_d f_d x[(n - kappa_d) mod MN] e^{j2pi b_d n/MN} for
// n = -prefix_len .. MN-1. Column j holds time n = j - prefix_len, so the
// Doppler compensation phase stays continuous through the prefix.
Eigen::MatrixXcd precode(std::span<const cd> x, const AlignmentPlan& plan, int prefix_len = 0);

/**
 * Picks bins whose power is at least C times the strongest bin and no
 * smaller than any of its four delay/Doppler neighbours (Doppler axis
 * cyclic, missing delay neighbours treated as zero). Bins are returned in
 * order of decreasing power; kappa_g = n_max - l_g, b_g = -k_g.
 */
AlignmentPlan plan_bin_alignment(const channel::BinResponse& h_bin, const BinSelectParams& params);

// Phase-referenced alignment vectors whose inner product with f_d gives the
// aligned tap coefficient.
//   path: h_p e^{-j2pi k_p l_pi/(NM)}
//   bin:  h_bin[k_g, l_g] e^{-j2pi k_g l_g/(NM)} / N
std::vector<Eigen::VectorXcd> path_alignment_vectors(const channel::MultipathChannel& channel,
                                                     std::span<const channel::SampledPath> paths,
                                                     const core::FrameParams& params);
std::vector<Eigen::VectorXcd> bin_alignment_vectors(const channel::BinResponse& h_bin,
                                                    const AlignmentPlan& plan,
                                                    const core::FrameParams& params);

struct EffectiveSpreads {
  double delay_spread_s;
  double doppler_spread_hz;
};

// tau' = 2 N_i T; nu' = 2 K_i / (MNT) for bin mode and 0 for path mode.
EffectiveSpreads effective_spreads(int interference_delay_taps, int interference_doppler_taps,
                                   const core::FrameParams& params, AlignMode mode = AlignMode::bin);

}  // namespace ddotfs::ddam
