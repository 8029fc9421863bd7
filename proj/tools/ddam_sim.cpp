// ddam_sim: drivers for the DDAM-OTFS experiments.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ddotfs/baseline.hpp"
#include "ddotfs/harness.hpp"
#include "ddotfs/rng.hpp"
#include "ddotfs/serialize.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ddotfs;

namespace {

struct Options {
  std::string config_path;
  std::string out_dir = ".";
  std::vector<std::string> overrides;
  int jobs = harness::default_jobs();
  bool full = false;
  std::optional<std::uint64_t> seed;
};

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("DDAM_SIM_SEED");
  if (v == nullptr || *v == '\0') return std::nullopt;
  try {
    std::size_t used = 0;
    const auto seed = std::stoull(v, &used, 10);
    if (used != std::string(v).size()) throw std::invalid_argument("trailing characters");
    return seed;
  } catch (const std::exception&) {
    throw ConfigError(std::string("DDAM_SIM_SEED is not an unsigned integer: ") + v);
  }
}

enum class Profile { se, papr };

harness::ScenarioConfig load_scenario(const Options& opt, Profile profile) {
  const auto base = profile == Profile::se ? harness::default_se_config() : harness::default_papr_config();
  json doc = opt.config_path.empty() ? json::object() : read_json(opt.config_path);
  for (const auto& o : opt.overrides) harness::apply_override(doc, o);
  auto cfg = harness::scenario_from_json(doc, base);
  if (opt.full) {
    if (profile == Profile::se) harness::apply_full_scale_se(cfg);
    else harness::apply_full_scale_papr(cfg);
  }
  if (opt.seed) cfg.base_seed = *opt.seed;
  else if (auto s = env_seed()) cfg.base_seed = *s;
  cfg.validate();
  return cfg;
}

fs::path prepare_out(const Options& opt) {
  fs::path dir(opt.out_dir);
  fs::create_directories(dir);
  return dir;
}

int cmd_feasibility(const Options& opt) {
  std::vector<harness::FeasibilityCase> cases = harness::default_feasibility_cases();
  if (!opt.config_path.empty()) {
    json doc = read_json(opt.config_path);
    for (const auto& o : opt.overrides) harness::apply_override(doc, o);
    cases = harness::feasibility_cases_from_json(doc);
  }
  const auto rows = harness::run_feasibility_report(cases);
  bool all_ok = true;
  for (const auto& r : rows) {
    std::cout << (r.result.feasible ? "FEASIBLE" : "INFEASIBLE") << " lower=" << harness::format_short(r.result.lower_bound_s)
              << " upper=" << harness::format_short(r.result.upper_bound_s) << '\n';
    std::cerr << "  " << r.label << ": tau_spread=" << harness::format_number(r.result.delay_bound_s)
              << " cp=" << harness::format_number(r.result.cp_bound_s)
              << " slots=" << harness::format_number(r.result.slots_bound_s)
              << " binding=" << core::to_string(r.result.binding_constraint) << '\n';
    all_ok = all_ok && r.result.feasible;
  }
  if (!opt.config_path.empty() || opt.out_dir != ".") {
    harness::write_feasibility_csv(prepare_out(opt) / "feasibility.csv", rows);
  }
  return all_ok ? 0 : 2;
}

int cmd_se_sweep(const Options& opt) {
  const auto cfg = load_scenario(opt, Profile::se);
  const auto result = harness::run_se_sweep(cfg, opt.jobs);
  const auto dir = prepare_out(opt);
  harness::write_se_csv(dir / "se_vs_mt.csv", result);
  auto meta = harness::run_meta(cfg, "se-sweep");
  meta["cp_overhead"] = {{"baseline", result.overheads.baseline}, {"ddam", result.overheads.ddam}};
  json failures = json::object();
  for (const auto& r : result.rows) {
    failures[r.scheme + "@" + std::to_string(r.mt)] = r.failed_trials;
    std::printf("%-14s mt=%-3d se=%.4f +- %.4f  sinr=%.2f dB  failed=%d\n", r.scheme.c_str(), r.mt, r.mean_se, r.ci95,
                r.mean_sinr_db, r.failed_trials);
  }
  meta["failed_trials"] = failures;
  harness::write_json(dir / "run_meta.json", meta);
  return 0;
}

int cmd_papr_sweep(const Options& opt) {
  const auto cfg = load_scenario(opt, Profile::papr);
  const auto result = harness::run_papr_sweep(cfg, opt.jobs);
  const auto dir = prepare_out(opt);
  harness::write_papr_csv(dir / "papr_ccdf.csv", result);
  auto meta = harness::run_meta(cfg, "papr-sweep");
  json curves = json::array();
  for (const auto& c : result.curves) {
    curves.push_back({{"scheme", c.scheme},
                      {"n_slots", c.n_slots},
                      {"subcarriers", c.subcarriers},
                      {"papr_at_1e-2_db", c.papr_at_1e2_db},
                      {"mrt_fallbacks", c.mrt_fallbacks}});
    std::printf("%-14s N=%-3d M=%-5d PAPR@1e-2=%.3f dB\n", c.scheme.c_str(), c.n_slots, c.subcarriers, c.papr_at_1e2_db);
  }
  meta["curves"] = curves;
  harness::write_json(dir / "run_meta.json", meta);
  return 0;
}

int cmd_roundtrip(const Options& opt) {
  std::uint64_t seed = 1;
  if (opt.seed) seed = *opt.seed;
  else if (auto s = env_seed()) seed = *s;
  const auto rep = harness::run_roundtrip_demo(seed);
  std::printf("n_max=%ld |c|=%.6g max relative error=%.3e off-tap energy ratio=%.3e\n", rep.n_max,
              std::abs(rep.coefficient), rep.relative_error, rep.off_tap_ratio);
  return rep.relative_error < 1e-9 ? 0 : 2;
}

int cmd_sinr(const Options& opt) {
  const auto cfg = load_scenario(opt, Profile::se);
  const auto params = cfg.frame.build();
  const auto pulse = cfg.pulse.build(params.sample_interval_s());
  auto gen = cfg.channel_gen;
  const auto ch = channel::random_channel(gen);
  const auto paths = channel::decompose(ch, params);
  const ddam::BeamformerDesign design{cfg.ddam.strategy, cfg.tx_power_w()};

  ddam::AlignmentPlan plan;
  metrics::SinrReport analytic;
  if (cfg.ddam.mode == ddam::AlignMode::path) {
    plan = ddam::plan_path_alignment(paths);
    plan.set_beamformers(ddam::design_beamformers(ddam::path_alignment_vectors(ch, paths, params), design));
    analytic = metrics::sinr_path(ch, paths, plan, pulse, cfg.ddam.n_i, cfg.noise_psd_w_hz(), params);
  } else {
    const auto h_bin = channel::bin_channel_response(ch, pulse, params);
    plan = ddam::plan_bin_alignment(h_bin, {cfg.ddam.threshold_ratio});
    plan.set_beamformers(ddam::design_beamformers(ddam::bin_alignment_vectors(h_bin, plan, params), design));
    analytic = metrics::sinr_bin(h_bin, plan, cfg.ddam.n_i, cfg.ddam.k_i, cfg.noise_psd_w_hz(), params);
    if (plan.entries.size() != ch.paths.size()) {
      std::cerr << "note: " << plan.entries.size() << " bins selected for " << ch.paths.size() << " paths\n";
    }
  }
  auto data_rng = make_engine(cfg.base_seed, kStreamData);
  const auto symbols =
      baseline::random_qam_frame(params.time_slots(), params.subcarriers(), cfg.qam_order, data_rng);
  const auto empirical = baseline::empirical_sinr_ddam(ch, pulse, plan, symbols, cfg.noise_psd_w_hz(), params);

  std::printf("mode=%s strategy=%s entries=%zu n_max=%ld\n", std::string(harness::to_string(cfg.ddam.mode)).c_str(),
              std::string(harness::to_string(cfg.ddam.strategy)).c_str(), plan.entries.size(), plan.n_max);
  std::printf("analytic  sinr=%.4f dB (window %.4f dB) signal=%.6g interference=%.6g noise=%.6g\n", analytic.sinr_db,
              metrics::to_db(analytic.window_sinr), analytic.signal_power, analytic.interference_power,
              analytic.noise_power);
  std::printf("empirical sinr=%.4f dB\n", empirical.sinr_db);

  const auto dir = prepare_out(opt);
  harness::write_json(dir / "channel.json", channel_to_json(ch));
  harness::write_json(dir / "plan.json", plan_to_json(plan));
  auto meta = harness::run_meta(cfg, "sinr");
  meta["analytic_sinr_db"] = analytic.sinr_db;
  meta["empirical_sinr_db"] = empirical.sinr_db;
  harness::write_json(dir / "run_meta.json", meta);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DDAM-OTFS simulator"};
  app.require_subcommand(1);
  Options opt;
  std::uint64_t seed_value = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "JSON configuration file");
    sub->add_option("--out", opt.out_dir, "output directory");
    sub->add_option("--override", opt.overrides, "dotted key=value override, repeatable")->take_all();
    sub->add_option("--jobs", opt.jobs, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--full", opt.full, "full-size numerology");
    sub->add_option("--seed", seed_value, "base seed (falls back to DDAM_SIM_SEED)");
  };

  struct Entry {
    const char* name;
    const char* help;
    int (*run)(const Options&);
  };
  const Entry entries[] = {
      {"feasibility", "tabulate the delay-period constraints", cmd_feasibility},
      {"se-sweep", "spectral efficiency versus transmit antennas", cmd_se_sweep},
      {"papr-sweep", "PAPR CCDF versus time slots", cmd_papr_sweep},
      {"demo-roundtrip", "integer-grid perfect-reconstruction check", cmd_roundtrip},
      {"sinr", "analytic and demodulated SINR of one channel", cmd_sinr},
  };
  std::vector<std::pair<CLI::App*, const Entry*>> subs;
  for (const auto& e : entries) {
    auto* sub = app.add_subcommand(e.name, e.help);
    add_common(sub);
    subs.emplace_back(sub, &e);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  for (const auto& [sub, entry] : subs) {
    if (!sub->parsed()) continue;
    if (sub->count("--seed") > 0) opt.seed = seed_value;
    try {
      return entry->run(opt);
    } catch (const NumericalError& e) {
      std::cerr << "numerical failure: " << e.what() << '\n';
      return 2;
    } catch (const ConfigError& e) {
      std::cerr << "configuration error: " << e.what() << '\n';
      return 1;
    } catch (const std::invalid_argument& e) {
      std::cerr << "configuration error: " << e.what() << '\n';
      return 1;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 2;
    }
  }
  return 1;
}
