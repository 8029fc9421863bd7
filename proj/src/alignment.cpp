#include "ddotfs/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ddotfs::ddam {

bool AlignmentPlan::beamformers_set() const {
  if (entries.empty()) return false;
  const auto mt = entries.front().f.size();
  return mt > 0 && std::all_of(entries.begin(), entries.end(), [mt](const AlignmentEntry& e) { return e.f.size() == mt; });
}

void AlignmentPlan::set_beamformers(std::vector<Eigen::VectorXcd> f) {
  if (f.size() != entries.size()) throw std::invalid_argument("set_beamformers: one beamformer per entry required");
  for (std::size_t d = 0; d < f.size(); ++d) entries[d].f = std::move(f[d]);
}

AlignmentPlan plan_path_alignment(std::span<const channel::SampledPath> paths) {
  if (paths.empty()) throw std::invalid_argument("plan_path_alignment: empty channel");
  AlignmentPlan plan;
  plan.mode = AlignMode::path;
  plan.n_max = 0;
  for (const auto& p : paths) plan.n_max = std::max(plan.n_max, p.delay_int);
  plan.entries.reserve(paths.size());
  for (const auto& p : paths) {
    if (p.delay_int < 0) throw std::invalid_argument("plan_path_alignment: negative integer delay");
    plan.entries.push_back({plan.n_max - p.delay_int, -p.doppler, {}});
  }
  return plan;
}

std::vector<Eigen::VectorXcd> design_beamformers(std::span<const Eigen::VectorXcd> vectors,
                                                 const BeamformerDesign& design) {
  if (vectors.empty()) throw std::invalid_argument("design_beamformers: no vectors");
  if (!(design.total_power_w > 0.0)) throw std::invalid_argument("design_beamformers: power must be positive");
  const auto d_count = static_cast<Eigen::Index>(vectors.size());
  const auto mt = vectors.front().size();
  for (const auto& g : vectors) {
    if (g.size() != mt) throw std::invalid_argument("design_beamformers: inconsistent vector lengths");
    if (!(g.norm() > 0.0)) throw std::invalid_argument("design_beamformers: zero vector");
  }
  const double amp = std::sqrt(design.total_power_w / static_cast<double>(d_count));

  std::vector<Eigen::VectorXcd> out;
  out.reserve(vectors.size());
  if (design.strategy == BeamformerStrategy::isi_mrt) {
    for (const auto& g : vectors) out.push_back(amp * g / g.norm());
    return out;
  }

  if (mt < d_count) {
    throw NumericalError("isi_zf needs M_t >= D (M_t = " + std::to_string(mt) + ", D = " +
                         std::to_string(d_count) + ")");
  }
  for (Eigen::Index d = 0; d < d_count; ++d) {
    Eigen::VectorXcd proj = vectors[d];
    if (d_count > 1) {
      Eigen::MatrixXcd others(mt, d_count - 1);
      for (Eigen::Index j = 0, col = 0; j < d_count; ++j) {
        if (j != d) others.col(col++) = vectors[j];
      }
      Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(others);
      const auto rank = qr.rank();
      const Eigen::MatrixXcd basis =
          (qr.householderQ() * Eigen::MatrixXcd::Identity(mt, rank)).eval();
      // second pass cleans up the residual of the first projection
      for (int pass = 0; pass < 2; ++pass) proj -= basis * (basis.adjoint() * proj);
    }
    const double norm = proj.norm();
    if (!(norm > 1e-10 * vectors[d].norm())) {
      throw NumericalError("isi_zf: vector " + std::to_string(d) + " lies in the span of the others");
    }
    out.push_back(amp * proj / norm);
  }
  return out;
}

Eigen::MatrixXcd precode(std::span<const cd> x, const AlignmentPlan& plan, int prefix_len) {
  if (!plan.beamformers_set()) throw std::invalid_argument("precode: beamformers not set");
  if (prefix_len < 0) throw std::invalid_argument("precode: negative prefix");
  const long mn = static_cast<long>(x.size());
  const auto mt = plan.entries.front().f.size();
  Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(mt, prefix_len + mn);
  for (const auto& e : plan.entries) {
    if (e.kappa < 0 || e.kappa >= mn) throw std::invalid_argument("precode: kappa out of range");
    for (long n = -prefix_len; n < mn; ++n) {
      long src = (n - e.kappa) % mn;
      if (src < 0) src += mn;
      const double phase = 2.0 * kPi * e.b * static_cast<double>(n) / static_cast<double>(mn);
      s.col(n + prefix_len) += (x[src] * std::polar(1.0, phase)) * e.f;
    }
  }
  return s;
}

AlignmentPlan plan_bin_alignment(const channel::BinResponse& h_bin, const BinSelectParams& params) {
  if (!(params.threshold_ratio > 0.0 && params.threshold_ratio < 1.0)) {
    throw std::invalid_argument("plan_bin_alignment: threshold ratio must lie in (0, 1)");
  }
  const int n = h_bin.doppler_bins();
  double peak = 0.0;
  for (int k = 0; k < n; ++k) {
    for (int m = h_bin.delay_min(); m <= h_bin.delay_max(); ++m) peak = std::max(peak, h_bin.power(k, m));
  }
  struct Candidate {
    double power;
    int k;
    int m;
  };
  std::vector<Candidate> picked;
  if (peak > 0.0) {
    for (int k = 0; k < n; ++k) {
      for (int m = h_bin.delay_min(); m <= h_bin.delay_max(); ++m) {
        const double pw = h_bin.power(k, m);
        if (pw <= 0.0 || pw < params.threshold_ratio * peak) continue;
        if (pw < h_bin.power(k, m + 1) || pw < h_bin.power(k, m - 1)) continue;
        if (pw < h_bin.power(k + 1, m) || pw < h_bin.power(k - 1, m)) continue;
        picked.push_back({pw, k, m});
      }
    }
  }
  if (picked.empty()) throw NumericalError("plan_bin_alignment: no bins pass the selection rules");
  std::stable_sort(picked.begin(), picked.end(),
                   [](const Candidate& a, const Candidate& b) { return a.power > b.power; });

  AlignmentPlan plan;
  plan.mode = AlignMode::bin;
  plan.n_max = picked.front().m;
  for (const auto& c : picked) plan.n_max = std::max<long>(plan.n_max, c.m);
  for (const auto& c : picked) {
    const int k_signed = channel::signed_doppler_bin(c.k, n);
    plan.selected_bins.push_back({k_signed, c.m});
    plan.entries.push_back({plan.n_max - c.m, static_cast<double>(-k_signed), {}});
  }
  return plan;
}

std::vector<Eigen::VectorXcd> path_alignment_vectors(const channel::MultipathChannel& channel,
                                                     std::span<const channel::SampledPath> paths,
                                                     const core::FrameParams& params) {
  if (paths.size() != channel.paths.size()) throw std::invalid_argument("path_alignment_vectors: size mismatch");
  const double mn = params.frame_samples();
  std::vector<Eigen::VectorXcd> out;
  out.reserve(paths.size());
  for (std::size_t p = 0; p < paths.size(); ++p) {
    const double phase = -2.0 * kPi * paths[p].doppler * static_cast<double>(paths[p].delay_int) / mn;
    out.push_back(channel.paths[p].gain * std::polar(1.0, phase));
  }
  return out;
}

std::vector<Eigen::VectorXcd> bin_alignment_vectors(const channel::BinResponse& h_bin,
                                                    const AlignmentPlan& plan,
                                                    const core::FrameParams& params) {
  if (plan.mode != AlignMode::bin) throw std::invalid_argument("bin_alignment_vectors: plan is not bin mode");
  const double mn = params.frame_samples();
  const double n = params.time_slots();
  std::vector<Eigen::VectorXcd> out;
  out.reserve(plan.selected_bins.size());
  for (const auto& bin : plan.selected_bins) {
    const double phase = -2.0 * kPi * bin.doppler * static_cast<double>(bin.delay) / mn;
    out.push_back(h_bin.at(bin.doppler, bin.delay) * std::polar(1.0 / n, phase));
  }
  return out;
}

EffectiveSpreads effective_spreads(int interference_delay_taps, int interference_doppler_taps,
                                   const core::FrameParams& params, AlignMode mode) {
  if (interference_delay_taps < 0 || interference_doppler_taps < 0) {
    throw std::invalid_argument("effective_spreads: window sizes must be >= 0");
  }
  const double t = params.sample_interval_s();
  EffectiveSpreads e{};
  e.delay_spread_s = 2.0 * interference_delay_taps * t;
  e.doppler_spread_hz =
      mode == AlignMode::path ? 0.0 : 2.0 * interference_doppler_taps / (params.frame_samples() * t);
  return e;
}

}  // namespace ddotfs::ddam
