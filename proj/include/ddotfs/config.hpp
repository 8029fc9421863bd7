#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "ddotfs/alignment.hpp"
#include "ddotfs/baseline.hpp"
#include "ddotfs/channel.hpp"
#include "ddotfs/ddcore.hpp"

namespace ddotfs::harness {

struct FrameConfig {
  double bandwidth_hz = 64e6;
  std::optional<double> frame_duration_s;  // derived as M*N/B when absent
  int subcarriers = 128;
  int time_slots = 16;
  int cp_len = 0;

  core::FrameParams build() const;
};

struct DdamConfig {
  ddam::AlignMode mode = ddam::AlignMode::path;
  ddam::BeamformerStrategy strategy = ddam::BeamformerStrategy::isi_zf;
  double threshold_ratio = 0.1;
  int n_i = 2;
  int k_i = 1;
};

struct PulseConfig {
  channel::PulseKind kind = channel::PulseKind::ideal_sinc;
  int half_width = 16;
  double rolloff = 0.25;

  channel::PulseShape build(double sample_interval_s) const;
};

struct ScenarioConfig {
  FrameConfig frame;
  channel::ChannelGenConfig channel_gen;
  DdamConfig ddam;
  PulseConfig pulse;
  double tx_power_dbm = 30.0;
  double noise_psd_dbm_hz = -174.0;
  int trials = 200;
  std::uint64_t base_seed = 1;
  std::vector<int> antenna_sweep{16, 32, 64};
  std::vector<int> slot_sweep{2, 4, 8};
  int papr_oversample = 4;
  int qam_order = 16;
  bool cp_original_slot = true;
  baseline::Receiver baseline_receiver = baseline::Receiver::single_tap;

  void validate() const;
  double tx_power_w() const { return dbm_to_watt(tx_power_dbm); }
  double noise_psd_w_hz() const { return dbm_to_watt(noise_psd_dbm_hz); }
};

// Desk-scale profiles, both at 64 MHz with M=128, N=16. The PAPR profile
// shortens the frame to 32 us (M*N = 2048) so that path delays keep their
// sample spread.
ScenarioConfig default_se_config();
ScenarioConfig default_papr_config();
// Full-size numerology: M=512, N=128 at 64 MHz for SE; M*N = 64000 at
// 64 MHz and 1 ms for PAPR.
void apply_full_scale_se(ScenarioConfig& cfg);
void apply_full_scale_papr(ScenarioConfig& cfg);

nlohmann::json to_json(const ScenarioConfig& cfg);
// Strict: unknown keys and wrongly typed values raise ConfigError. Missing
// keys keep the defaults of `base`.
ScenarioConfig scenario_from_json(const nlohmann::json& doc, const ScenarioConfig& base);

// Sets a dotted path (e.g. "channel_gen.num_paths=3") in a JSON document.
// The value is parsed as JSON when possible and kept as a string otherwise.
void apply_override(nlohmann::json& doc, std::string_view assignment);

std::string_view to_string(ddam::AlignMode m);
std::string_view to_string(ddam::BeamformerStrategy s);
std::string_view to_string(channel::PulseKind k);
std::string_view to_string(baseline::Receiver r);

}  // namespace ddotfs::harness
