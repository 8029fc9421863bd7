#pragma once

#include <limits>
#include <span>
#include <string_view>

#include "ddotfs/types.hpp"

namespace ddotfs::core {

/**
 * OTFS numerology: bandwidth B, frame duration T_OTFS, M subcarriers,
 * N time slots and a per-slot cyclic prefix length.
 *
 * The discrete model places exactly M*N samples in one frame, so the
 * constructor requires M*N == round(B*T_OTFS) and snaps the stored frame
 * duration to M*N/B. With that, the period pair (tau_r, nu_r) = (T_s, df)
 * satisfies tau_r * nu_r == 1 up to rounding.
 */
class FrameParams {
 public:
  FrameParams(double bandwidth_hz, double frame_duration_s, int subcarriers, int time_slots,
              int cp_len = 0);

  // Frame duration derived as M*N/B.
  static FrameParams from_grid(double bandwidth_hz, int subcarriers, int time_slots, int cp_len = 0);

  double bandwidth_hz() const { return bandwidth_hz_; }
  double frame_duration_s() const { return frame_duration_s_; }
  int subcarriers() const { return subcarriers_; }
  int time_slots() const { return time_slots_; }
  int cp_len() const { return cp_len_; }
  int frame_samples() const { return subcarriers_ * time_slots_; }

  double subcarrier_spacing_hz() const { return bandwidth_hz_ / subcarriers_; }
  double slot_duration_s() const { return frame_duration_s_ / time_slots_; }
  double sample_interval_s() const { return 1.0 / bandwidth_hz_; }
  double delay_period_s() const { return slot_duration_s(); }
  double doppler_period_hz() const { return subcarrier_spacing_hz(); }
  double delay_step_s() const { return 1.0 / (subcarriers_ * subcarrier_spacing_hz()); }
  double doppler_step_hz() const { return 1.0 / (time_slots_ * slot_duration_s()); }

 private:
  double bandwidth_hz_;
  double frame_duration_s_;
  int subcarriers_;
  int time_slots_;
  int cp_len_;
};

/// N x M delay-Doppler grid, indexed (k, l): k Doppler 0..N-1, l delay 0..M-1.
class DDFrame {
 public:
  DDFrame(int time_slots, int subcarriers);
  explicit DDFrame(const FrameParams& params) : DDFrame(params.time_slots(), params.subcarriers()) {}

  int doppler_bins() const { return n_; }
  int delay_bins() const { return m_; }
  std::size_t size() const { return data_.size(); }

  cd& operator()(int k, int l) { return data_[static_cast<std::size_t>(k) * m_ + l]; }
  const cd& operator()(int k, int l) const { return data_[static_cast<std::size_t>(k) * m_ + l]; }

  std::span<cd> data() { return data_; }
  std::span<const cd> data() const { return data_; }

  double energy() const;
  bool matches(const FrameParams& params) const {
    return n_ == params.time_slots() && m_ == params.subcarriers();
  }

 private:
  int n_;
  int m_;
  CVec data_;
};

// x[l + cM] = 1/sqrt(N) sum_k X[k,l] e^{j2pi ck/N}
CVec idzt(const DDFrame& frame);

// Y[k,l] = 1/sqrt(N) sum_c y[l + cM] e^{-j2pi ck/N}
DDFrame dzt(std::span<const cd> y, int time_slots, int subcarriers);
inline DDFrame dzt(std::span<const cd> y, const FrameParams& params) {
  return dzt(y, params.time_slots(), params.subcarriers());
}

// Delay-axis shift of a Zak-domain frame, i.e. dzt of the cyclic time shift
// x[n - shift]. Wrapping across a slot boundary picks up the quasi-periodic
// phase e^{j2pi c' k/N}.
DDFrame shift_delay(const DDFrame& frame, long shift);

// Each length-M slot is prefixed by its last cp_len samples.
CVec add_cp_per_slot(std::span<const cd> x, int subcarriers, int cp_len);
CVec remove_cp_per_slot(std::span<const cd> x, int subcarriers, int cp_len);

// Number of CP samples that covers a delay spread: ceil(B * tau).
int cp_samples(double bandwidth_hz, double delay_spread_s);

// Per-slot CP overhead B*tau / (M + B*tau), with B*tau kept real-valued.
double cp_overhead(double bandwidth_hz, double delay_spread_s, int subcarriers);

// Overhead of a reduced delay spread. With original_slot the reduced CP
// is divided by the slot length of the *original* numerology, M + B*tau_orig.
double cp_overhead_reduced(double bandwidth_hz, double reduced_spread_s, double original_spread_s,
                           int subcarriers, bool original_slot);

double max_doppler_shift(double carrier_hz, double speed_mps);
inline double doppler_spread(double carrier_hz, double speed_mps) {
  return 2.0 * max_doppler_shift(carrier_hz, speed_mps);
}

struct FeasibilityInputs {
  double delay_spread_s;
  double doppler_spread_hz;
  double max_cp_overhead;
  int max_slots;
  double frame_duration_s;

  void validate() const;
};

enum class BindingConstraint { delay_spread, cp_overhead, papr_slots };
std::string_view to_string(BindingConstraint c);

struct FeasibilityResult {
  double delay_bound_s;      // tau_spread
  double cp_bound_s;         // (1 - rho_max)/rho_max * tau_spread
  double slots_bound_s;      // T_OTFS / N_max
  double lower_bound_s;      // max of the three above
  double upper_bound_s;      // 1 / nu_spread (infinity for zero spread)
  bool feasible;             // lower < upper
  BindingConstraint binding_constraint;
};

// Interval of admissible delay periods tau_r: lower <= tau_r < upper.
FeasibilityResult feasible_interval(const FeasibilityInputs& inputs);

}  // namespace ddotfs::core
