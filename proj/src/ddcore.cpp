#include "ddotfs/ddcore.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ddotfs/fft.hpp"

namespace ddotfs::core {

FrameParams::FrameParams(double bandwidth_hz, double frame_duration_s, int subcarriers,
                         int time_slots, int cp_len)
    : bandwidth_hz_(bandwidth_hz),
      frame_duration_s_(frame_duration_s),
      subcarriers_(subcarriers),
      time_slots_(time_slots),
      cp_len_(cp_len) {
  if (!(bandwidth_hz > 0.0) || !(frame_duration_s > 0.0)) {
    throw ConfigError("FrameParams: bandwidth and frame duration must be positive");
  }
  if (subcarriers < 1 || time_slots < 1) {
    throw ConfigError("FrameParams: M and N must be >= 1");
  }
  if (cp_len < 0) throw ConfigError("FrameParams: cp_len must be >= 0");
  const double samples = bandwidth_hz * frame_duration_s;
  const double grid = static_cast<double>(subcarriers) * time_slots;
  if (std::abs(samples - grid) > 0.5) {
    throw ConfigError("FrameParams: M*N = " + std::to_string(static_cast<long long>(grid)) +
                      " does not match B*T_OTFS = " + std::to_string(samples));
  }
  frame_duration_s_ = grid / bandwidth_hz;
}

FrameParams FrameParams::from_grid(double bandwidth_hz, int subcarriers, int time_slots,
                                   int cp_len) {
  if (!(bandwidth_hz > 0.0)) throw ConfigError("FrameParams: bandwidth must be positive");
  return FrameParams(bandwidth_hz, static_cast<double>(subcarriers) * time_slots / bandwidth_hz,
                     subcarriers, time_slots, cp_len);
}

DDFrame::DDFrame(int time_slots, int subcarriers) : n_(time_slots), m_(subcarriers) {
  if (time_slots < 1 || subcarriers < 1) throw std::invalid_argument("DDFrame: empty grid");
  data_.assign(static_cast<std::size_t>(time_slots) * subcarriers, cd{});
}

double DDFrame::energy() const {
  double e = 0.0;
  for (const auto& v : data_) e += std::norm(v);
  return e;
}

CVec idzt(const DDFrame& frame) {
  const int n = frame.doppler_bins();
  const int m = frame.delay_bins();
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  CVec x(frame.size());
  CVec column(static_cast<std::size_t>(n));
  for (int l = 0; l < m; ++l) {
    for (int k = 0; k < n; ++k) column[k] = frame(k, l);
    fft_inplace(column, /*inverse=*/true);
    for (int c = 0; c < n; ++c) x[static_cast<std::size_t>(l) + static_cast<std::size_t>(c) * m] = column[c] * scale;
  }
  return x;
}

DDFrame dzt(std::span<const cd> y, int time_slots, int subcarriers) {
  if (y.size() != static_cast<std::size_t>(time_slots) * subcarriers) {
    throw std::invalid_argument("dzt: sequence length " + std::to_string(y.size()) +
                                " != M*N");
  }
  DDFrame out(time_slots, subcarriers);
  const double scale = 1.0 / std::sqrt(static_cast<double>(time_slots));
  CVec column(static_cast<std::size_t>(time_slots));
  for (int l = 0; l < subcarriers; ++l) {
    for (int c = 0; c < time_slots; ++c) column[c] = y[static_cast<std::size_t>(l) + static_cast<std::size_t>(c) * subcarriers];
    fft_inplace(column, /*inverse=*/false);
    for (int k = 0; k < time_slots; ++k) out(k, l) = column[k] * scale;
  }
  return out;
}

DDFrame shift_delay(const DDFrame& frame, long shift) {
  const int n = frame.doppler_bins();
  const long m = frame.delay_bins();
  DDFrame out(n, static_cast<int>(m));
  for (long l = 0; l < m; ++l) {
    const long src = l - shift;
    // floor division so that src = l_src + wraps * M with 0 <= l_src < M
    const long wraps = (src >= 0) ? src / m : -((-src + m - 1) / m);
    const long l_src = src - wraps * m;
    for (int k = 0; k < n; ++k) {
      const long phase_num = ((wraps % n) * k) % n;
      const double phase = 2.0 * kPi * static_cast<double>(phase_num) / n;
      out(k, static_cast<int>(l)) = frame(k, static_cast<int>(l_src)) * std::polar(1.0, phase);
    }
  }
  return out;
}

CVec add_cp_per_slot(std::span<const cd> x, int subcarriers, int cp_len) {
  if (cp_len < 0 || cp_len > subcarriers) throw std::invalid_argument("add_cp_per_slot: need 0 <= n_CP <= M");
  if (x.size() % static_cast<std::size_t>(subcarriers) != 0) {
    throw std::invalid_argument("add_cp_per_slot: length is not a multiple of M");
  }
  const std::size_t slots = x.size() / subcarriers;
  CVec out;
  out.reserve(slots * (subcarriers + cp_len));
  for (std::size_t c = 0; c < slots; ++c) {
    auto slot = x.subspan(c * subcarriers, subcarriers);
    out.insert(out.end(), slot.end() - cp_len, slot.end());
    out.insert(out.end(), slot.begin(), slot.end());
  }
  return out;
}

CVec remove_cp_per_slot(std::span<const cd> x, int subcarriers, int cp_len) {
  if (cp_len < 0 || cp_len > subcarriers) throw std::invalid_argument("remove_cp_per_slot: need 0 <= n_CP <= M");
  const std::size_t block = static_cast<std::size_t>(subcarriers + cp_len);
  if (x.size() % block != 0) throw std::invalid_argument("remove_cp_per_slot: length is not a multiple of M + n_CP");
  CVec out;
  out.reserve(x.size() / block * subcarriers);
  for (std::size_t start = 0; start < x.size(); start += block) {
    out.insert(out.end(), x.begin() + start + cp_len, x.begin() + start + block);
  }
  return out;
}

int cp_samples(double bandwidth_hz, double delay_spread_s) {
  // B*tau is frequently an integer up to rounding (64 MHz * 500 ns)
  return static_cast<int>(std::ceil(bandwidth_hz * delay_spread_s - 1e-9));
}

double cp_overhead(double bandwidth_hz, double delay_spread_s, int subcarriers) {
  const double cp = bandwidth_hz * delay_spread_s;
  return cp / (subcarriers + cp);
}

double cp_overhead_reduced(double bandwidth_hz, double reduced_spread_s, double original_spread_s,
                           int subcarriers, bool original_slot) {
  const double cp = bandwidth_hz * reduced_spread_s;
  const double denom_cp = original_slot ? bandwidth_hz * original_spread_s : cp;
  return cp / (subcarriers + denom_cp);
}

double max_doppler_shift(double carrier_hz, double speed_mps) {
  return carrier_hz * speed_mps / kSpeedOfLight;
}

void FeasibilityInputs::validate() const {
  if (!(delay_spread_s >= 0.0) || !(doppler_spread_hz >= 0.0)) {
    throw ConfigError("feasibility: spreads must be non-negative");
  }
  if (!(max_cp_overhead > 0.0 && max_cp_overhead < 1.0)) {
    throw ConfigError("feasibility: max_cp_overhead must lie in (0, 1)");
  }
  if (max_slots < 1) throw ConfigError("feasibility: max_slots must be >= 1");
  if (!(frame_duration_s > 0.0)) throw ConfigError("feasibility: frame_duration_s must be positive");
}

std::string_view to_string(BindingConstraint c) {
  switch (c) {
    case BindingConstraint::delay_spread: return "delay_spread";
    case BindingConstraint::cp_overhead: return "cp_overhead";
    case BindingConstraint::papr_slots: return "papr_slots";
  }
  return "unknown";
}

FeasibilityResult feasible_interval(const FeasibilityInputs& in) {
  in.validate();
  FeasibilityResult r{};
  r.delay_bound_s = in.delay_spread_s;
  r.cp_bound_s = (1.0 - in.max_cp_overhead) / in.max_cp_overhead * in.delay_spread_s;
  r.slots_bound_s = in.frame_duration_s / in.max_slots;

  r.lower_bound_s = r.delay_bound_s;
  r.binding_constraint = BindingConstraint::delay_spread;
  if (r.cp_bound_s > r.lower_bound_s) {
    r.lower_bound_s = r.cp_bound_s;
    r.binding_constraint = BindingConstraint::cp_overhead;
  }
  if (r.slots_bound_s > r.lower_bound_s) {
    r.lower_bound_s = r.slots_bound_s;
    r.binding_constraint = BindingConstraint::papr_slots;
  }
  r.upper_bound_s = in.doppler_spread_hz > 0.0 ? 1.0 / in.doppler_spread_hz
                                               : std::numeric_limits<double>::infinity();
  r.feasible = r.lower_bound_s < r.upper_bound_s;
  return r;
}

}  // namespace ddotfs::core
