// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "ddotfs/baseline.hpp"
#include "ddotfs/harness.hpp"
#include "ddotfs/rng.hpp"

using namespace ddotfs;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

cd gauss(std::mt19937_64& g) {
  std::normal_distribution<double> n(0.0, std::sqrt(0.5));
  const double re = n(g);
  return {re, n(g)};
}

Eigen::VectorXcd gauss_vector(int len, std::mt19937_64& g) {
  Eigen::VectorXcd v(len);
  for (int i = 0; i < len; ++i) v[i] = gauss(g);
  return v;
}

Outcome unitarity() {
  const std::pair<int, int> sizes[] = {{2, 2}, {4, 8}, {16, 32}, {128, 512}};
  std::mt19937_64 g(101);
  double worst = 0.0;
  const auto t0 = std::chrono::steady_clock::now();
  for (int f = 0; f < 100; ++f) {
    const auto [n, m] = sizes[f % 4];
    core::DDFrame x(n, m);
    for (auto& v : x.data()) v = gauss(g);
    const auto back = core::dzt(core::idzt(x), n, m);
    for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(back.data()[i] - x.data()[i]));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {worst <= 1e-12 && secs < 1.0, fmt("max abs error %.2e over 100 frames in %.3f s", worst, secs)};
}

// Round to `digits` significant digits.
double sig(double v, int digits) {
  const double scale = std::pow(10.0, digits - 1 - std::floor(std::log10(std::abs(v))));
  return std::round(v * scale) / scale;
}

Outcome cp_overheads() {
  const double base = core::cp_overhead(64e6, 500e-9, 512);
  const double ddam = core::cp_overhead_reduced(64e6, 62.5e-9, 500e-9, 512, true);
  // 32/544 and 4/544 to four digits, which print as 5.88% and 0.735%
  const bool ok = sig(base, 4) == 0.05882 && sig(ddam, 4) == 0.007353 && sig(100 * base, 3) == 5.88 &&
                  sig(100 * ddam, 3) == 0.735;
  return {ok, fmt("baseline %.4g%%, ddam %.4g%%", 100 * base, 100 * ddam)};
}

bool close_ulps(double a, double b) { return std::abs(a - b) <= 4 * std::numeric_limits<double>::epsilon() * std::abs(b); }

Outcome feasibility() {
  const auto rows = harness::run_feasibility_report(harness::default_feasibility_cases());
  const auto& before = rows.at(0).result;
  const auto& after = rows.at(1).result;
  const bool ok = !before.feasible && close_ulps(before.lower_bound_s, 125e-6) &&
                  close_ulps(before.upper_bound_s, 1.0 / 15.57e3) && after.feasible &&
                  close_ulps(after.lower_bound_s, 125e-6) && close_ulps(after.upper_bound_s, 500e-6) &&
                  std::abs(before.upper_bound_s - 64.23e-6) < 0.005e-6;
  return {ok, fmt("before: %s [%.6g us, %.6g us); after: %s [%.6g us, %.6g us)", before.feasible ? "feasible" : "infeasible",
                  1e6 * before.lower_bound_s, 1e6 * before.upper_bound_s, after.feasible ? "feasible" : "infeasible",
                  1e6 * after.lower_bound_s, 1e6 * after.upper_bound_s)};
}

Outcome doppler() {
  const double nu = core::max_doppler_shift(28e9, 300.0 / 3.6);
  return {std::abs(nu - 7785.0) <= 7.785, fmt("%.2f Hz", nu)};
}

Outcome roundtrip() {
  const auto t0 = std::chrono::steady_clock::now();
  double err = 0.0;
  double off = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto r = harness::run_roundtrip_demo(seed, 32, 8, 8, 3);
    err = std::max(err, r.relative_error);
    off = std::max(off, r.off_tap_ratio);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {err < 1e-9 && off < 1e-18 && secs < 5.0,
          fmt("worst of 20 channels: relative error %.2e, off-tap ratio %.2e, %.2f s", err, off, secs)};
}

Outcome channel_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  const int m = 32, n = 8, mt = 4, paths = 5, mn = m * n;
  const auto params = core::FrameParams::from_grid(64e6, m, n);
  const double ts = params.sample_interval_s();
  const auto pulse = channel::PulseShape::ideal_sinc(ts, 8);
  std::mt19937_64 g(606);
  std::uniform_real_distribution<double> ud(0.0, 20.0), uk(-3.0, 3.0);
  double worst = 0.0;
  for (int rep = 0; rep < 5; ++rep) {
    channel::MultipathChannel ch;
    for (int p = 0; p < paths; ++p) ch.paths.push_back({ud(g) * ts, uk(g) / (mn * ts), gauss_vector(mt, g)});
    Eigen::MatrixXcd s(mt, mn);
    for (int c = 0; c < mn; ++c)
      for (int a = 0; a < mt; ++a) s(a, c) = gauss(g);
    const auto y = channel::apply_channel(s, ch, pulse, 0.0, params, 1);

    // y[n] = sum_p h_p^H sum_m s[m] p((n - m - l_p)T) e^{j2pi k_p n/(NM)}, with s periodic
    // and the pulse cut to the 2W+1 samples nearest its centre.
    for (int t = 0; t < mn; ++t) {
      cd acc{};
      for (const auto& path : ch.paths) {
        const double l = path.delay_s / ts;
        const double k = path.doppler_hz * mn * ts;
        const double centre = std::floor(l + 0.5);
        for (int mm = -2 * mn; mm < 2 * mn; ++mm) {
          if (std::abs(t - mm - centre) > pulse.half_width()) continue;
          const double u = t - mm - l;
          const double pv = u == 0.0 ? 1.0 : std::sin(kPi * u) / (kPi * u);
          const int idx = ((mm % mn) + mn) % mn;
          acc += path.gain.dot(s.col(idx)) * pv * std::polar(1.0, 2 * kPi * k * t / mn);
        }
      }
      worst = std::max(worst, std::abs(acc - y[t]));
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {worst <= 1e-10 && secs < 10.0, fmt("max abs error %.2e over 5 channels, %.2f s", worst, secs)};
}

Outcome sinr_agreement() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cfg = harness::default_se_config();
  const auto params = core::FrameParams::from_grid(64e6, 64, 16);
  const auto pulse = cfg.pulse.build(params.sample_interval_s());
  const double n0 = cfg.noise_psd_w_hz();
  double analytic_db = 0.0, empirical_db = 0.0;
  const int trials = 50;
  for (int t = 0; t < trials; ++t) {
    channel::ChannelGenConfig gen;
    gen.num_paths = 5;
    gen.antennas = 32;
    gen.rng_seed = 7000 + t;
    const auto ch = channel::random_channel(gen);
    const auto paths = channel::decompose(ch, params);
    auto plan = ddam::plan_path_alignment(paths);
    plan.set_beamformers(ddam::design_beamformers(ddam::path_alignment_vectors(ch, paths, params),
                                                  {ddam::BeamformerStrategy::isi_zf, cfg.tx_power_w()}));
    analytic_db += metrics::sinr_path(ch, paths, plan, pulse, cfg.ddam.n_i, n0, params).sinr_db;
    auto rng = make_engine(7000 + t, kStreamData);
    const auto x = baseline::random_qam_frame(16, 64, cfg.qam_order, rng);
    empirical_db += baseline::empirical_sinr_ddam(ch, pulse, plan, x, n0, params).sinr_db;
  }
  analytic_db /= trials;
  empirical_db /= trials;
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double gap = std::abs(empirical_db - analytic_db);
  return {gap <= 0.5 && secs < 120.0,
          fmt("mean analytic %.3f dB, mean empirical %.3f dB, gap %.3f dB, %.1f s", analytic_db, empirical_db, gap, secs)};
}

Outcome se_ordering() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = harness::run_se_sweep(harness::default_se_config(), harness::default_jobs());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const std::size_t k = res.rows.size() / 3;
  bool ok = secs < 600.0;
  std::string detail;
  for (std::size_t i = 0; i < k; ++i) {
    const double b = res.rows[i].mean_se, p = res.rows[k + i].mean_se, q = res.rows[2 * k + i].mean_se;
    ok = ok && p > b && q > b && p >= q;
    detail += fmt("M_t=%d base %.3f path %.3f bin %.3f; ", res.rows[i].mt, b, p, q);
  }
  return {ok, detail + fmt("%.1f s", secs)};
}

Outcome papr_ordering() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cfg = harness::default_papr_config();
  const auto res = harness::run_papr_sweep(cfg, harness::default_jobs());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  bool ok = secs < 600.0 && cfg.trials >= 10000;
  std::string detail;
  for (std::size_t i = 0; i < res.curves.size(); ++i) {
    const auto& c = res.curves[i];
    detail += fmt("%s N=%d %.3f dB; ", c.scheme.c_str(), c.n_slots, c.papr_at_1e2_db);
    if (i > 0) ok = ok && c.papr_at_1e2_db > res.curves[i - 1].papr_at_1e2_db;
  }
  ok = ok && res.curves.back().scheme == harness::kSchemeBaseline && res.curves.back().n_slots == 16;
  return {ok, detail + fmt("%.1f s", secs)};
}

Outcome spreads() {
  const auto desk = ddam::effective_spreads(2, 1, core::FrameParams::from_grid(64e6, 512, 128));
  const bool ok = desk.delay_spread_s == 62.5e-9 && sig(desk.doppler_spread_hz, 1) == 2e3;
  return {ok, fmt("tau' = %.4g ns, nu' = %.1f Hz", 1e9 * desk.delay_spread_s, desk.doppler_spread_hz)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_run(const fs::path& dir, int jobs) {
  fs::create_directories(dir);
  auto se = harness::default_se_config();
  se.trials = 20;
  const auto se_res = harness::run_se_sweep(se, jobs);
  harness::write_se_csv(dir / "se_vs_mt.csv", se_res);
  harness::write_json(dir / "se_meta.json", harness::run_meta(se, "se-sweep"));

  auto pa = harness::default_papr_config();
  pa.trials = 200;
  harness::write_papr_csv(dir / "papr_ccdf.csv", harness::run_papr_sweep(pa, jobs));
  harness::write_json(dir / "papr_meta.json", harness::run_meta(pa, "papr-sweep"));
  harness::write_feasibility_csv(dir / "feasibility.csv",
                                 harness::run_feasibility_report(harness::default_feasibility_cases()));
}

Outcome determinism() {
  const auto root = fs::temp_directory_path() / "ddotfs_acceptance";
  fs::remove_all(root);
  write_run(root / "a", 1);
  write_run(root / "b", 1);
  write_run(root / "c", 4);
  int compared = 0;
  bool ok = true;
  for (const auto& entry : fs::directory_iterator(root / "a")) {
    const auto name = entry.path().filename();
    const auto a = slurp(entry.path());
    ok = ok && !a.empty() && a == slurp(root / "b" / name) && a == slurp(root / "c" / name);
    ++compared;
  }
  fs::remove_all(root);
  return {ok && compared == 5, fmt("%d files identical across repeats and --jobs 1/4", compared)};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"transform unitarity", unitarity},
      {"CP overheads", cp_overheads},
      {"feasibility example", feasibility},
      {"Doppler shift", doppler},
      {"integer-grid reconstruction", roundtrip},
      {"channel brute-force oracle", channel_oracle},
      {"analytic vs empirical SINR", sinr_agreement},
      {"SE ordering", se_ordering},
      {"PAPR ordering", papr_ordering},
      {"effective spreads", spreads},
      {"determinism", determinism},
  };
  int failed = 0;
  int index = 1;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", index++, name, o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d of %d criteria passed\n", index - 1 - failed, index - 1);
  return failed == 0 ? 0 : 1;
}
