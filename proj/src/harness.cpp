#include "ddotfs/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <random>
#include <thread>

#include "ddotfs/alignment.hpp"
#include "ddotfs/baseline.hpp"
#include "ddotfs/channel.hpp"
#include "ddotfs/rng.hpp"
#include "ddotfs/types.hpp"

namespace ddotfs::harness {

using nlohmann::json;

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(jobs, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    while (!stop.load(std::memory_order_relaxed)) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        stop = true;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

int default_jobs() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// ---- SE ----

CpOverheads se_cp_overheads(const ScenarioConfig& cfg) {
  const auto params = cfg.frame.build();
  const double tau = cfg.channel_gen.max_delay_s;
  const auto spreads = ddam::effective_spreads(cfg.ddam.n_i, cfg.ddam.k_i, params);
  return {core::cp_overhead(params.bandwidth_hz(), tau, params.subcarriers()),
          core::cp_overhead_reduced(params.bandwidth_hz(), spreads.delay_spread_s, tau, params.subcarriers(),
                                    cfg.cp_original_slot)};
}

SeTrialResult evaluate_se_trial(const ScenarioConfig& cfg, int antennas, std::size_t trial) {
  const auto params = cfg.frame.build();
  const auto pulse = cfg.pulse.build(params.sample_interval_s());
  const auto rho = se_cp_overheads(cfg);
  const std::uint64_t seed = trial_seed(cfg, trial);
  const double power = cfg.tx_power_w();
  const double n0 = cfg.noise_psd_w_hz();

  channel::ChannelGenConfig gen = cfg.channel_gen;
  gen.antennas = antennas;
  gen.rng_seed = seed;
  const auto ch = channel::random_channel(gen);
  const auto paths = channel::decompose(ch, params);
  const ddam::BeamformerDesign design{cfg.ddam.strategy, power};

  SeTrialResult out;

  try {
    auto plan = ddam::plan_path_alignment(paths);
    const auto g = ddam::path_alignment_vectors(ch, paths, params);
    plan.set_beamformers(ddam::design_beamformers(g, design));
    const auto rep = metrics::sinr_path(ch, paths, plan, pulse, cfg.ddam.n_i, n0, params);
    out.path = {metrics::spectral_efficiency(rep.sinr, rho.ddam), rep.sinr_db, false};
  } catch (const NumericalError&) {
    out.path = {0.0, 0.0, true};
  }

  try {
    const auto h_bin = channel::bin_channel_response(ch, pulse, params);
    auto plan = ddam::plan_bin_alignment(h_bin, {cfg.ddam.threshold_ratio});
    const auto g = ddam::bin_alignment_vectors(h_bin, plan, params);
    plan.set_beamformers(ddam::design_beamformers(g, design));
    const auto rep = metrics::sinr_bin(h_bin, plan, cfg.ddam.n_i, cfg.ddam.k_i, n0, params);
    out.bin = {metrics::spectral_efficiency(rep.sinr, rho.ddam), rep.sinr_db, false};
  } catch (const NumericalError&) {
    out.bin = {0.0, 0.0, true};
  }

  auto data_rng = make_engine(seed, kStreamData);
  const auto symbols = baseline::random_qam_frame(params.time_slots(), params.subcarriers(), cfg.qam_order, data_rng);
  const auto rep = baseline::empirical_sinr_baseline(ch, pulse, power, symbols, n0, params, seed, cfg.baseline_receiver);
  out.baseline = {metrics::spectral_efficiency(rep.sinr, rho.baseline), rep.sinr_db, false};
  return out;
}

namespace {

SeRow summarize(const std::string& scheme, int mt, const std::vector<SchemeOutcome>& outcomes) {
  SeRow row{scheme, mt, 0.0, 0.0, 0.0, 0};
  const double n = static_cast<double>(outcomes.size());
  double sum = 0.0;
  double sinr_sum = 0.0;
  int ok = 0;
  for (const auto& o : outcomes) {
    sum += o.se;
    if (o.failed) {
      ++row.failed_trials;
    } else {
      sinr_sum += o.sinr_db;
      ++ok;
    }
  }
  row.mean_se = sum / n;
  if (outcomes.size() > 1) {
    double ss = 0.0;
    for (const auto& o : outcomes) ss += (o.se - row.mean_se) * (o.se - row.mean_se);
    row.ci95 = 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  row.mean_sinr_db = ok > 0 ? sinr_sum / ok : 0.0;
  return row;
}

}  // namespace

SeSweepResult run_se_sweep(const ScenarioConfig& cfg, int jobs) {
  cfg.validate();
  SeSweepResult result;
  result.overheads = se_cp_overheads(cfg);

  std::vector<int> mts = cfg.antenna_sweep;
  std::sort(mts.begin(), mts.end());
  mts.erase(std::unique(mts.begin(), mts.end()), mts.end());

  const auto trials = static_cast<std::size_t>(cfg.trials);
  std::vector<std::vector<SeTrialResult>> per_mt(mts.size(), std::vector<SeTrialResult>(trials));
  parallel_for(mts.size() * trials, jobs, [&](std::size_t i) {
    const std::size_t a = i / trials;
    const std::size_t t = i % trials;
    per_mt[a][t] = evaluate_se_trial(cfg, mts[a], t);
  });

  const std::pair<const char*, SchemeOutcome SeTrialResult::*> schemes[] = {
      {kSchemeBaseline, &SeTrialResult::baseline}, {kSchemePath, &SeTrialResult::path}, {kSchemeBin, &SeTrialResult::bin}};
  for (const auto& [name, member] : schemes) {
    for (std::size_t a = 0; a < mts.size(); ++a) {
      std::vector<SchemeOutcome> outcomes;
      outcomes.reserve(trials);
      for (const auto& t : per_mt[a]) outcomes.push_back(t.*member);
      result.rows.push_back(summarize(name, mts[a], outcomes));
    }
  }
  return result;
}

// ---- PAPR ----

std::vector<double> papr_thresholds_db() {
  std::vector<double> t;
  for (int i = 0; i <= 160; ++i) t.push_back(0.1 * i);
  return t;
}

PaprSweepResult run_papr_sweep(const ScenarioConfig& cfg, int jobs) {
  cfg.validate();
  const auto base = cfg.frame.build();
  const int mn = base.frame_samples();
  const int mt = cfg.antenna_sweep.front();
  const auto trials = static_cast<std::size_t>(cfg.trials);
  const auto thresholds = papr_thresholds_db();

  PaprSweepResult result;
  result.doppler_spread_hz = core::doppler_spread(cfg.channel_gen.carrier_hz, cfg.channel_gen.max_speed_mps);
  const double slots_needed = base.frame_duration_s() * result.doppler_spread_hz;
  if (!(base.time_slots() > slots_needed)) {
    throw NumericalError("baseline OTFS with N=" + std::to_string(base.time_slots()) +
                         " cannot resolve the Doppler spread: need N > " + format_number(slots_needed));
  }

  auto finish = [&](PaprCurve curve, const std::vector<double>& samples) {
    curve.curve = metrics::ccdf(samples, thresholds);
    curve.papr_at_1e2_db = metrics::ccdf_level(samples, 1e-2);
    result.curves.push_back(std::move(curve));
  };

  for (int n : cfg.slot_sweep) {
    if (mn % n != 0) throw ConfigError("slot_sweep entry " + std::to_string(n) + " does not divide M*N = " + std::to_string(mn));
    const core::FrameParams params(base.bandwidth_hz(), base.frame_duration_s(), mn / n, n);
    std::vector<double> samples(trials);
    std::vector<char> fallback(trials, 0);
    parallel_for(trials, jobs, [&](std::size_t t) {
      const std::uint64_t seed = trial_seed(cfg, t);
      channel::ChannelGenConfig gen = cfg.channel_gen;
      gen.antennas = mt;
      gen.rng_seed = seed;
      const auto ch = channel::random_channel(gen);
      const auto paths = channel::decompose(ch, params);
      auto plan = ddam::plan_path_alignment(paths);
      const auto g = ddam::path_alignment_vectors(ch, paths, params);
      try {
        plan.set_beamformers(ddam::design_beamformers(g, {cfg.ddam.strategy, cfg.tx_power_w()}));
      } catch (const NumericalError&) {
        plan.set_beamformers(ddam::design_beamformers(g, {ddam::BeamformerStrategy::isi_mrt, cfg.tx_power_w()}));
        fallback[t] = 1;
      }
      auto data_rng = make_engine(seed, kStreamData);
      const auto symbols = baseline::random_qam_frame(params.time_slots(), params.subcarriers(), cfg.qam_order, data_rng);
      const auto s = ddam::precode(core::idzt(symbols), plan);
      samples[t] = metrics::to_db(metrics::papr_envelope(s, cfg.papr_oversample));
    });
    PaprCurve curve;
    curve.scheme = kSchemePath;
    curve.n_slots = n;
    curve.subcarriers = params.subcarriers();
    curve.mrt_fallbacks = static_cast<int>(std::count(fallback.begin(), fallback.end(), 1));
    finish(std::move(curve), samples);
  }

  std::vector<double> samples(trials);
  parallel_for(trials, jobs, [&](std::size_t t) {
    auto data_rng = make_engine(trial_seed(cfg, t), kStreamData);
    const auto symbols = baseline::random_qam_frame(base.time_slots(), base.subcarriers(), cfg.qam_order, data_rng);
    samples[t] = metrics::to_db(metrics::papr(core::idzt(symbols), cfg.papr_oversample));
  });
  PaprCurve curve;
  curve.scheme = kSchemeBaseline;
  curve.n_slots = base.time_slots();
  curve.subcarriers = base.subcarriers();
  finish(std::move(curve), samples);
  return result;
}

// ---- Feasibility ----

std::vector<FeasibilityCase> default_feasibility_cases() {
  // the example quotes the rounded spread 15.57 kHz; doppler_spread(28e9, 300/3.6) is 15.566 kHz
  return {{"unaligned", {500e-9, 15.57e3, 0.005, 8, 1e-3}}, {"aligned", {60e-9, 2e3, 0.005, 8, 1e-3}}};
}

std::vector<FeasibilityCase> feasibility_cases_from_json(const json& doc) {
  auto one = [](const json& c, std::size_t index) {
    if (!c.is_object()) throw ConfigError("feasibility case must be an object");
    FeasibilityCase fc{"case" + std::to_string(index), {0.0, 0.0, 0.0, 0, 0.0}};
    for (const auto& [key, value] : c.items()) {
      try {
        if (key == "label") fc.label = value.get<std::string>();
        else if (key == "delay_spread_s") fc.inputs.delay_spread_s = value.get<double>();
        else if (key == "doppler_spread_hz") fc.inputs.doppler_spread_hz = value.get<double>();
        else if (key == "max_cp_overhead") fc.inputs.max_cp_overhead = value.get<double>();
        else if (key == "max_slots") {
          if (!value.is_number_integer()) throw ConfigError("max_slots must be an integer");
          fc.inputs.max_slots = value.get<int>();
        } else if (key == "frame_duration_s") fc.inputs.frame_duration_s = value.get<double>();
        else throw ConfigError("unknown feasibility key '" + key + "'");
      } catch (const json::exception& e) {
        throw ConfigError("feasibility key '" + key + "': " + e.what());
      }
    }
    for (const char* required : {"delay_spread_s", "doppler_spread_hz", "max_cp_overhead", "max_slots", "frame_duration_s"}) {
      if (!c.contains(required)) throw ConfigError(std::string("feasibility case is missing '") + required + "'");
    }
    try {
      fc.inputs.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    return fc;
  };

  std::vector<FeasibilityCase> out;
  if (doc.is_object() && doc.contains("cases")) {
    if (doc.size() != 1) throw ConfigError("feasibility document: only 'cases' is allowed next to the case list");
    if (!doc["cases"].is_array() || doc["cases"].empty()) throw ConfigError("'cases' must be a non-empty array");
    for (const auto& c : doc["cases"]) out.push_back(one(c, out.size()));
  } else {
    out.push_back(one(doc, 0));
  }
  return out;
}

std::vector<FeasibilityRow> run_feasibility_report(const std::vector<FeasibilityCase>& cases) {
  std::vector<FeasibilityRow> rows;
  rows.reserve(cases.size());
  for (const auto& c : cases) rows.push_back({c.label, c.inputs, core::feasible_interval(c.inputs)});
  return rows;
}

// ---- Integer-grid round trip ----

RoundtripReport run_roundtrip_demo(std::uint64_t seed, int subcarriers, int time_slots, int antennas, int num_paths) {
  const auto params = core::FrameParams::from_grid(64e6, subcarriers, time_slots);
  const auto pulse = channel::PulseShape::ideal_sinc(params.sample_interval_s());
  auto rng = make_engine(seed, kStreamChannel);
  std::uniform_int_distribution<int> delay(0, subcarriers / 2 - 1);
  std::uniform_int_distribution<int> doppler(-time_slots / 2, time_slots / 2 - 1);
  std::uniform_real_distribution<double> angle(-kPi / 2, kPi / 2);
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5 / num_paths));

  channel::MultipathChannel ch;
  const double doppler_step = params.doppler_step_hz();
  for (int p = 0; p < num_paths; ++p) {
    const double tau = delay(rng) * params.sample_interval_s();
    const double nu = doppler(rng) * doppler_step;
    const double theta = angle(rng);
    const double re = gauss(rng);
    const double im = gauss(rng);
    ch.paths.push_back({tau, nu, cd(re, im) * channel::steering_vector(theta, antennas)});
  }
  const auto paths = channel::decompose(ch, params);
  auto plan = ddam::plan_path_alignment(paths);
  plan.set_beamformers(ddam::design_beamformers(ddam::path_alignment_vectors(ch, paths, params),
                                                {ddam::BeamformerStrategy::isi_zf, 1.0}));

  auto data_rng = make_engine(seed, kStreamData);
  const auto symbols = baseline::random_qam_frame(time_slots, subcarriers, 16, data_rng);
  const int prefix = static_cast<int>(plan.n_max) + pulse.half_width();
  const auto s = ddam::precode(core::idzt(symbols), plan, prefix);
  const auto y = channel::apply_channel(s, ch, pulse, 0.0, params, 0, {.prefix_len = prefix});
  const auto received = core::dzt(y, params);
  const auto ref = core::shift_delay(symbols, plan.n_max);

  cd num{};
  double den = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    num += std::conj(ref.data()[i]) * received.data()[i];
    den += std::norm(ref.data()[i]);
  }
  RoundtripReport rep;
  rep.n_max = plan.n_max;
  rep.coefficient = num / den;
  double max_err = 0.0, max_ref = 0.0, err_energy = 0.0, ref_energy = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const cd expected = rep.coefficient * ref.data()[i];
    const double e = std::abs(received.data()[i] - expected);
    max_err = std::max(max_err, e);
    max_ref = std::max(max_ref, std::abs(expected));
    err_energy += e * e;
    ref_energy += std::norm(expected);
  }
  rep.relative_error = max_err / max_ref;
  rep.off_tap_ratio = err_energy / ref_energy;
  return rep;
}

// ---- Output ----

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string format_short(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  std::string s = buf;
  const auto e = s.find('e');
  std::string mantissa = s.substr(0, e);
  if (mantissa.find('.') != std::string::npos) {
    while (mantissa.back() == '0') mantissa.pop_back();
    if (mantissa.back() == '.') mantissa.pop_back();
  }
  const int exponent = std::stoi(s.substr(e + 1));
  return mantissa + "e" + std::to_string(exponent);
}

namespace {

std::ofstream open_out(const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  return out;
}

}  // namespace

void write_se_csv(const std::filesystem::path& file, const SeSweepResult& result) {
  auto out = open_out(file);
  out << "scheme,mt,mean_se,ci95\n";
  for (const auto& r : result.rows) {
    out << r.scheme << ',' << r.mt << ',' << format_number(r.mean_se) << ',' << format_number(r.ci95) << '\n';
  }
}

void write_papr_csv(const std::filesystem::path& file, const PaprSweepResult& result) {
  auto out = open_out(file);
  out << "scheme,n_slots,threshold_db,ccdf\n";
  for (const auto& c : result.curves) {
    for (std::size_t i = 0; i < c.curve.thresholds_db.size(); ++i) {
      out << c.scheme << ',' << c.n_slots << ',' << format_number(c.curve.thresholds_db[i]) << ','
          << format_number(c.curve.ccdf[i]) << '\n';
    }
  }
}

void write_feasibility_csv(const std::filesystem::path& file, const std::vector<FeasibilityRow>& rows) {
  auto out = open_out(file);
  out << "label,delay_bound_s,cp_bound_s,slots_bound_s,lower_bound_s,upper_bound_s,feasible,binding\n";
  for (const auto& r : rows) {
    out << r.label << ',' << format_number(r.result.delay_bound_s) << ',' << format_number(r.result.cp_bound_s) << ','
        << format_number(r.result.slots_bound_s) << ',' << format_number(r.result.lower_bound_s) << ','
        << format_number(r.result.upper_bound_s) << ',' << (r.result.feasible ? 1 : 0) << ','
        << core::to_string(r.result.binding_constraint) << '\n';
  }
}

std::uint64_t config_hash(const ScenarioConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_json(cfg).dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

json run_meta(const ScenarioConfig& cfg, const std::string& command) {
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash(cfg)));
  return json{{"version", kVersion},
              {"command", command},
              {"seed", cfg.base_seed},
              {"config_hash", hash},
              {"config", to_json(cfg)},
              {"conventions",
               {{"se_average", "mean over channels of (1 - rho) log2(1 + sinr)"},
                {"ddam_sinr", "analytic"},
                {"baseline_sinr", "empirical demodulation with injected noise"},
                {"baseline_receiver", to_string(cfg.baseline_receiver)},
                {"baseline_beamformer", "frequency-flat MRT on the dominant eigenvector"},
                {"cp_reduced_denominator", cfg.cp_original_slot ? "M + B*tau_original" : "M + B*tau_reduced"},
                {"bin_response_scale", "1/N"},
                {"papr_ddam", "sum-power envelope over antennas"},
                {"papr_baseline", "single-antenna idzt output"},
                {"papr_oversample", cfg.papr_oversample},
                {"trial_seed", "base_seed + trial index"}}}};
}

void write_json(const std::filesystem::path& file, const json& doc) {
  auto out = open_out(file);
  out << doc.dump(2) << '\n';
}

}  // namespace ddotfs::harness
