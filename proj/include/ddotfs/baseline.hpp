#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <span>

#include "ddotfs/alignment.hpp"
#include "ddotfs/channel.hpp"
#include "ddotfs/ddcore.hpp"
#include "ddotfs/metrics.hpp"

namespace ddotfs::baseline {

// Unit-norm principal eigenvector of sum_p h_p h_p^H.
Eigen::VectorXcd dominant_direction(const channel::MultipathChannel& channel);

// Square QAM symbols with unit average energy, drawn independently per bin.
core::DDFrame random_qam_frame(int time_slots, int subcarriers, int order, std::mt19937_64& rng);

// Adjoint of the cyclic SISO channel y = sum_p a_p e^{j2pi k_p n/(MN)} (g_p * x)[n - l_pi],
// a_p = h_p^H f. Used as the baseline receiver's matched filter.
CVec matched_filter(std::span<const cd> y, const channel::MultipathChannel& channel, const Eigen::VectorXcd& f,
                    const channel::PulseShape& pulse, const core::FrameParams& params);

/**
 * Demodulated SINR of a DDAM frame. The precoded frame (with a prefix long
 * enough to cover n_max + W) passes the noise-free channel; Y = dzt(y) is
 * fitted against the reference R = X delayed by n_max,
 *   c = <R, Y>/|R|^2,   residual = |Y - cR|^2/(MN),
 * and SINR = |c|^2 Es / (residual + N0 B), Es the mean symbol energy of X.
 */
metrics::SinrReport empirical_sinr_ddam(const channel::MultipathChannel& channel, const channel::PulseShape& pulse,
                                        const ddam::AlignmentPlan& plan, const core::DDFrame& symbols,
                                        double noise_psd_w_hz, const core::FrameParams& params);

enum class Receiver {
  single_tap,      // best single delay-Doppler tap, no equalization
  matched_filter,  // adjoint of the full effective channel, then fit against X
};

/**
 * Demodulated SINR of plain OTFS with one frequency-flat MRT beam
 * f = sqrt(P) u along dominant_direction, with injected noise.
 * single_tap fits Y against dzt(x[n - l] e^{j2pi k n/(MN)}) for the integer
 * tap (l, k) of every path and keeps the strongest fit; matched_filter fits
 * dzt(H^H y) against X. SINR = |c|^2 Es / residual in both cases.
 */
metrics::SinrReport empirical_sinr_baseline(const channel::MultipathChannel& channel,
                                            const channel::PulseShape& pulse, double total_power_w,
                                            const core::DDFrame& symbols, double noise_psd_w_hz,
                                            const core::FrameParams& params, std::uint64_t noise_seed,
                                            Receiver receiver = Receiver::single_tap);

}  // namespace ddotfs::baseline
