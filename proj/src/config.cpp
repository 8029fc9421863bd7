#include "ddotfs/config.hpp"

#include <functional>
#include <map>
#include <string>

namespace ddotfs::harness {

using nlohmann::json;

core::FrameParams FrameConfig::build() const {
  if (frame_duration_s) return core::FrameParams(bandwidth_hz, *frame_duration_s, subcarriers, time_slots, cp_len);
  return core::FrameParams::from_grid(bandwidth_hz, subcarriers, time_slots, cp_len);
}

channel::PulseShape PulseConfig::build(double sample_interval_s) const {
  if (kind == channel::PulseKind::ideal_sinc) return channel::PulseShape::ideal_sinc(sample_interval_s, half_width);
  return channel::PulseShape::root_raised_cosine(sample_interval_s, rolloff, half_width);
}

void ScenarioConfig::validate() const {
  (void)frame.build();
  channel_gen.validate();
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (antenna_sweep.empty()) throw ConfigError("antenna_sweep must not be empty");
  if (slot_sweep.empty()) throw ConfigError("slot_sweep must not be empty");
  for (int mt : antenna_sweep) {
    if (mt < 1) throw ConfigError("antenna_sweep entries must be >= 1");
  }
  for (int n : slot_sweep) {
    if (n < 1) throw ConfigError("slot_sweep entries must be >= 1");
  }
  if (!(ddam.threshold_ratio > 0.0 && ddam.threshold_ratio < 1.0)) throw ConfigError("ddam.threshold_ratio must lie in (0, 1)");
  if (ddam.n_i < 0 || ddam.k_i < 0) throw ConfigError("ddam.n_i and ddam.k_i must be >= 0");
  if (pulse.half_width < 0) throw ConfigError("pulse.half_width must be >= 0");
  if (pulse.kind == channel::PulseKind::root_raised_cosine && !(pulse.rolloff > 0.0 && pulse.rolloff <= 1.0)) {
    throw ConfigError("pulse.rolloff must lie in (0, 1]");
  }
  if (papr_oversample < 1) throw ConfigError("papr_oversample must be >= 1");
  if (qam_order != 4 && qam_order != 16 && qam_order != 64 && qam_order != 256) {
    throw ConfigError("qam_order must be one of 4, 16, 64, 256");
  }
}

ScenarioConfig default_se_config() {
  ScenarioConfig cfg;
  cfg.frame = FrameConfig{64e6, std::nullopt, 128, 16, 0};
  cfg.trials = 200;
  cfg.antenna_sweep = {16, 32, 64};
  cfg.slot_sweep = {16};
  return cfg;
}

ScenarioConfig default_papr_config() {
  ScenarioConfig cfg;
  cfg.frame = FrameConfig{64e6, 32e-6, 128, 16, 0};
  cfg.trials = 10000;
  cfg.antenna_sweep = {16};
  cfg.slot_sweep = {2, 4, 8};
  return cfg;
}

void apply_full_scale_se(ScenarioConfig& cfg) { cfg.frame = FrameConfig{64e6, std::nullopt, 512, 128, 0}; }

void apply_full_scale_papr(ScenarioConfig& cfg) { cfg.frame = FrameConfig{64e6, 1e-3, 4000, 16, 0}; }

std::string_view to_string(ddam::AlignMode m) { return m == ddam::AlignMode::path ? "path" : "bin"; }

std::string_view to_string(ddam::BeamformerStrategy s) {
  return s == ddam::BeamformerStrategy::isi_zf ? "isi_zf" : "isi_mrt";
}

std::string_view to_string(channel::PulseKind k) {
  return k == channel::PulseKind::ideal_sinc ? "ideal_sinc" : "root_raised_cosine";
}

std::string_view to_string(baseline::Receiver r) {
  return r == baseline::Receiver::single_tap ? "single_tap" : "matched_filter";
}

json to_json(const ScenarioConfig& c) {
  json frame = {{"bandwidth_hz", c.frame.bandwidth_hz},
                {"subcarriers", c.frame.subcarriers},
                {"time_slots", c.frame.time_slots},
                {"cp_len", c.frame.cp_len}};
  frame["frame_duration_s"] = c.frame.frame_duration_s ? json(*c.frame.frame_duration_s) : json(nullptr);
  return json{
      {"frame", frame},
      {"channel_gen",
       {{"num_paths", c.channel_gen.num_paths},
        {"max_delay_s", c.channel_gen.max_delay_s},
        {"max_speed_mps", c.channel_gen.max_speed_mps},
        {"carrier_hz", c.channel_gen.carrier_hz},
        {"antennas", c.channel_gen.antennas},
        {"rng_seed", c.channel_gen.rng_seed},
        {"path_loss_db", c.channel_gen.path_loss_db}}},
      {"ddam",
       {{"mode", to_string(c.ddam.mode)},
        {"strategy", to_string(c.ddam.strategy)},
        {"threshold_ratio", c.ddam.threshold_ratio},
        {"n_i", c.ddam.n_i},
        {"k_i", c.ddam.k_i}}},
      {"pulse", {{"kind", to_string(c.pulse.kind)}, {"half_width", c.pulse.half_width}, {"rolloff", c.pulse.rolloff}}},
      {"tx_power_dbm", c.tx_power_dbm},
      {"noise_psd_dbm_hz", c.noise_psd_dbm_hz},
      {"trials", c.trials},
      {"base_seed", c.base_seed},
      {"antenna_sweep", c.antenna_sweep},
      {"slot_sweep", c.slot_sweep},
      {"papr_oversample", c.papr_oversample},
      {"qam_order", c.qam_order},
      {"cp_original_slot", c.cp_original_slot},
      {"baseline_receiver", to_string(c.baseline_receiver)},
  };
}

namespace {

using Handlers = std::map<std::string, std::function<void(const json&)>>;

void walk(const json& obj, const std::string& where, const Handlers& handlers) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    auto it = handlers.find(key);
    const std::string path = where.empty() ? key : where + "." + key;
    if (it == handlers.end()) throw ConfigError("unknown config key '" + path + "'");
    try {
      it->second(value);
    } catch (const json::exception& e) {
      throw ConfigError("config key '" + path + "': " + e.what());
    }
  }
}

template <typename T>
std::function<void(const json&)> set(T& field) {
  return [&field](const json& v) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError("expected a boolean");
    } else if constexpr (std::is_arithmetic_v<T>) {
      if (!v.is_number()) throw ConfigError("expected a number");
      if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw ConfigError("expected an integer");
      }
    }
    field = v.get<T>();
  };
}

}  // namespace

ScenarioConfig scenario_from_json(const json& doc, const ScenarioConfig& base) {
  ScenarioConfig c = base;
  Handlers frame{{"bandwidth_hz", set(c.frame.bandwidth_hz)},
                 {"subcarriers", set(c.frame.subcarriers)},
                 {"time_slots", set(c.frame.time_slots)},
                 {"cp_len", set(c.frame.cp_len)},
                 {"frame_duration_s", [&](const json& v) {
                    if (v.is_null()) {
                      c.frame.frame_duration_s.reset();
                    } else {
                      if (!v.is_number()) throw ConfigError("frame.frame_duration_s: expected a number or null");
                      c.frame.frame_duration_s = v.get<double>();
                    }
                  }}};
  Handlers chan{{"num_paths", set(c.channel_gen.num_paths)},
                {"max_delay_s", set(c.channel_gen.max_delay_s)},
                {"max_speed_mps", set(c.channel_gen.max_speed_mps)},
                {"carrier_hz", set(c.channel_gen.carrier_hz)},
                {"antennas", set(c.channel_gen.antennas)},
                {"rng_seed", set(c.channel_gen.rng_seed)},
                {"path_loss_db", set(c.channel_gen.path_loss_db)}};
  Handlers dd{{"mode", [&](const json& v) {
                 const auto s = v.get<std::string>();
                 if (s == "path") c.ddam.mode = ddam::AlignMode::path;
                 else if (s == "bin") c.ddam.mode = ddam::AlignMode::bin;
                 else throw ConfigError("ddam.mode must be 'path' or 'bin'");
               }},
              {"strategy", [&](const json& v) {
                 const auto s = v.get<std::string>();
                 if (s == "isi_zf") c.ddam.strategy = ddam::BeamformerStrategy::isi_zf;
                 else if (s == "isi_mrt") c.ddam.strategy = ddam::BeamformerStrategy::isi_mrt;
                 else throw ConfigError("ddam.strategy must be 'isi_zf' or 'isi_mrt'");
               }},
              {"threshold_ratio", set(c.ddam.threshold_ratio)},
              {"n_i", set(c.ddam.n_i)},
              {"k_i", set(c.ddam.k_i)}};
  Handlers pulse{{"kind", [&](const json& v) {
                    const auto s = v.get<std::string>();
                    if (s == "ideal_sinc") c.pulse.kind = channel::PulseKind::ideal_sinc;
                    else if (s == "root_raised_cosine") c.pulse.kind = channel::PulseKind::root_raised_cosine;
                    else throw ConfigError("pulse.kind must be 'ideal_sinc' or 'root_raised_cosine'");
                  }},
                 {"half_width", set(c.pulse.half_width)},
                 {"rolloff", set(c.pulse.rolloff)}};
  Handlers top{{"frame", [&](const json& v) { walk(v, "frame", frame); }},
               {"channel_gen", [&](const json& v) { walk(v, "channel_gen", chan); }},
               {"ddam", [&](const json& v) { walk(v, "ddam", dd); }},
               {"pulse", [&](const json& v) { walk(v, "pulse", pulse); }},
               {"tx_power_dbm", set(c.tx_power_dbm)},
               {"noise_psd_dbm_hz", set(c.noise_psd_dbm_hz)},
               {"trials", set(c.trials)},
               {"base_seed", set(c.base_seed)},
               {"antenna_sweep", set(c.antenna_sweep)},
               {"slot_sweep", set(c.slot_sweep)},
               {"papr_oversample", set(c.papr_oversample)},
               {"qam_order", set(c.qam_order)},
               {"cp_original_slot", set(c.cp_original_slot)},
               {"baseline_receiver", [&](const json& v) {
                  const auto s = v.get<std::string>();
                  if (s == "single_tap") c.baseline_receiver = baseline::Receiver::single_tap;
                  else if (s == "matched_filter") c.baseline_receiver = baseline::Receiver::matched_filter;
                  else throw ConfigError("baseline_receiver must be 'single_tap' or 'matched_filter'");
                }}};
  walk(doc, "", top);
  c.validate();
  return c;
}

void apply_override(json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("override '" + std::string(assignment) + "' is not of the form key=value");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  json value = json::parse(raw, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) value = raw;

  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("override key '" + key + "' has an empty component");
    if (!node->is_object()) throw ConfigError("override key '" + key + "' descends into a non-object");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

}  // namespace ddotfs::harness
