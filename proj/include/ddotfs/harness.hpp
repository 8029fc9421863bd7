#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "ddotfs/config.hpp"
#include "ddotfs/ddcore.hpp"
#include "ddotfs/metrics.hpp"

namespace ddotfs::harness {

inline constexpr const char* kVersion = "ddotfs 0.1.0";

// Runs body(i) for i in [0, count) on up to `jobs` threads. The first
// exception thrown by any call is rethrown after all workers finish.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body);
int default_jobs();

inline std::uint64_t trial_seed(const ScenarioConfig& cfg, std::size_t trial) { return cfg.base_seed + trial; }

// ---- SE versus number of transmit antennas ----

inline constexpr const char* kSchemeBaseline = "otfs_baseline";
inline constexpr const char* kSchemePath = "ddam_path";
inline constexpr const char* kSchemeBin = "ddam_bin";

struct SchemeOutcome {
  double se = 0.0;
  double sinr_db = 0.0;
  bool failed = false;  // NumericalError in beamformer design or bin selection
};

struct SeTrialResult {
  SchemeOutcome baseline;
  SchemeOutcome path;
  SchemeOutcome bin;
};

struct CpOverheads {
  double baseline;  // full delay spread
  double ddam;      // tau' = 2 N_i T
};
CpOverheads se_cp_overheads(const ScenarioConfig& cfg);

// One random channel with `antennas` transmit antennas, evaluated for the
// three schemes. Deterministic in (cfg, antennas, trial).
SeTrialResult evaluate_se_trial(const ScenarioConfig& cfg, int antennas, std::size_t trial);

struct SeRow {
  std::string scheme;
  int mt = 0;
  double mean_se = 0.0;
  double ci95 = 0.0;
  double mean_sinr_db = 0.0;
  int failed_trials = 0;
};

struct SeSweepResult {
  std::vector<SeRow> rows;  // grouped by scheme, ascending M_t
  CpOverheads overheads{};
};

SeSweepResult run_se_sweep(const ScenarioConfig& cfg, int jobs);

// ---- PAPR CCDF ----

struct PaprCurve {
  std::string scheme;
  int n_slots = 0;
  int subcarriers = 0;
  metrics::CcdfCurve curve;
  double papr_at_1e2_db = 0.0;
  int mrt_fallbacks = 0;  // trials where zero-forcing was singular
};

struct PaprSweepResult {
  std::vector<PaprCurve> curves;  // DDAM curves in slot_sweep order, then the baseline
  double doppler_spread_hz = 0.0;
};

std::vector<double> papr_thresholds_db();

// Baseline OTFS uses frame.time_slots, DDAM-OTFS every entry of
// slot_sweep with M = MN/N. Throws NumericalError when the baseline slot
// count cannot resolve the Doppler spread (N <= T_OTFS * nu_spread).
PaprSweepResult run_papr_sweep(const ScenarioConfig& cfg, int jobs);

// ---- Feasibility ----

struct FeasibilityCase {
  std::string label;
  core::FeasibilityInputs inputs;
};

struct FeasibilityRow {
  std::string label;
  core::FeasibilityInputs inputs;
  core::FeasibilityResult result;
};

// The 128 MHz / 1 ms / 28 GHz example before and after alignment.
std::vector<FeasibilityCase> default_feasibility_cases();
// {"cases": [{label, delay_spread_s, doppler_spread_hz, max_cp_overhead,
// max_slots, frame_duration_s}, ...]} or a single case object.
std::vector<FeasibilityCase> feasibility_cases_from_json(const nlohmann::json& doc);
std::vector<FeasibilityRow> run_feasibility_report(const std::vector<FeasibilityCase>& cases);

// ---- Integer-grid round trip ----

struct RoundtripReport {
  long n_max = 0;
  cd coefficient;             // fitted aligned tap c
  double relative_error = 0;  // max |Y - cR| / max |cR|
  double off_tap_ratio = 0;   // |Y - cR|^2 / |cR|^2
};

// L paths on integer delay/Doppler bins, ideal sinc, zero-forcing, no noise.
// R is the symbol frame delayed by n_max.
RoundtripReport run_roundtrip_demo(std::uint64_t seed, int subcarriers = 32, int time_slots = 8, int antennas = 8,
                                   int num_paths = 3);

// ---- Output ----

// printf("%.9g")
std::string format_number(double v);
// Three significant digits in exponent form without padding: 1.25e-4, 5e-4.
std::string format_short(double v);

void write_se_csv(const std::filesystem::path& file, const SeSweepResult& result);
void write_papr_csv(const std::filesystem::path& file, const PaprSweepResult& result);
void write_feasibility_csv(const std::filesystem::path& file, const std::vector<FeasibilityRow>& rows);

// FNV-1a over the compact JSON dump of the configuration.
std::uint64_t config_hash(const ScenarioConfig& cfg);
nlohmann::json run_meta(const ScenarioConfig& cfg, const std::string& command);
void write_json(const std::filesystem::path& file, const nlohmann::json& doc);

}  // namespace ddotfs::harness
