#include "ddotfs/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ddotfs/fft.hpp"

namespace ddotfs::metrics {

SinrReport make_report(double signal, double interference, double window_interference, double noise) {
  SinrReport r;
  r.signal_power = signal;
  r.interference_power = interference;
  r.window_interference_power = window_interference;
  r.noise_power = noise;
  const double denom = interference + noise;
  r.sinr = denom > 0.0 ? signal / denom : std::numeric_limits<double>::infinity();
  const double wdenom = window_interference + noise;
  r.window_sinr = wdenom > 0.0 ? signal / wdenom : std::numeric_limits<double>::infinity();
  r.sinr_db = to_db(r.sinr);
  return r;
}

SinrReport sinr_path(const channel::MultipathChannel& channel, std::span<const channel::SampledPath> paths,
                     const ddam::AlignmentPlan& plan, const channel::PulseShape& pulse,
                     int interference_delay_taps, double noise_psd_w_hz, const core::FrameParams& params) {
  if (plan.mode != ddam::AlignMode::path) throw std::invalid_argument("sinr_path: plan is not path mode");
  if (!plan.beamformers_set()) throw std::invalid_argument("sinr_path: beamformers not set");
  if (plan.entries.size() != paths.size() || paths.size() != channel.paths.size()) {
    throw std::invalid_argument("sinr_path: plan/channel size mismatch");
  }
  const int w = pulse.half_width();
  const double mn = params.frame_samples();
  const auto hbar = ddam::path_alignment_vectors(channel, paths, params);
  const std::size_t count = paths.size();

  std::vector<cd> beta(count);
  for (std::size_t p = 0; p < count; ++p) beta[p] = hbar[p].dot(plan.entries[p].f);

  cd desired{};
  for (std::size_t p = 0; p < count; ++p) desired += beta[p] * pulse.at_samples(-paths[p].delay_frac);

  double interference = 0.0;
  double window = 0.0;
  for (int z = -w; z <= w; ++z) {
    if (z == 0) continue;
    cd tap{};
    for (std::size_t p = 0; p < count; ++p) {
      tap += beta[p] * pulse.at_samples(z - paths[p].delay_frac) *
             std::polar(1.0, 2.0 * kPi * paths[p].doppler * z / mn);
    }
    interference += std::norm(tap);
    if (std::abs(z) <= interference_delay_taps) window += std::norm(tap);
  }

  // Residual of mismatched path/beam pairs; zero under exact nulling.
  double leakage = 0.0;
  double window_leakage = 0.0;
  for (std::size_t p = 0; p < count; ++p) {
    for (std::size_t q = 0; q < count; ++q) {
      if (p == q) continue;
      const double gain = std::norm(channel.paths[p].gain.dot(plan.entries[q].f));
      if (gain == 0.0) continue;
      for (int z = -w; z <= w; ++z) {
        const double tap = pulse.at_samples(z - paths[p].delay_frac);
        leakage += gain * tap * tap;
        if (std::abs(z) <= interference_delay_taps) window_leakage += gain * tap * tap;
      }
    }
  }

  return make_report(std::norm(desired), interference + leakage, window + window_leakage,
                     noise_psd_w_hz * params.bandwidth_hz());
}

SinrReport sinr_bin(const channel::BinResponse& h_bin, const ddam::AlignmentPlan& plan,
                    int interference_delay_taps, int interference_doppler_taps, double noise_psd_w_hz,
                    const core::FrameParams& params) {
  if (plan.mode != ddam::AlignMode::bin) throw std::invalid_argument("sinr_bin: plan is not bin mode");
  if (!plan.beamformers_set()) throw std::invalid_argument("sinr_bin: beamformers not set");
  if (plan.selected_bins.size() != plan.entries.size()) throw std::invalid_argument("sinr_bin: malformed plan");
  const int n = h_bin.doppler_bins();
  if (n != params.time_slots()) throw std::invalid_argument("sinr_bin: bin response does not match frame");
  const double mn = params.frame_samples();
  const double scale = 1.0 / n;

  const auto vbar = ddam::bin_alignment_vectors(h_bin, plan, params);
  cd desired{};
  for (std::size_t g = 0; g < vbar.size(); ++g) desired += vbar[g].dot(plan.entries[g].f);

  int l_lo = plan.selected_bins.front().delay;
  int l_hi = l_lo;
  for (const auto& b : plan.selected_bins) {
    l_lo = std::min(l_lo, b.delay);
    l_hi = std::max(l_hi, b.delay);
  }
  const int z_min = h_bin.delay_min() - l_hi;
  const int z_max = h_bin.delay_max() - l_lo;
  const int z_span = z_max - z_min + 1;
  std::vector<cd> grid(static_cast<std::size_t>(n) * z_span, cd{});

  for (std::size_t g = 0; g < plan.entries.size(); ++g) {
    const auto& f = plan.entries[g].f;
    const int kg = plan.selected_bins[g].doppler;
    const int lg = plan.selected_bins[g].delay;
    for (int k = 0; k < n; ++k) {
      const int i = channel::signed_doppler_bin(k - kg, n);
      for (int m = h_bin.delay_min(); m <= h_bin.delay_max(); ++m) {
        const double pw = h_bin.power(k, m);
        if (pw == 0.0) continue;
        const int z = m - lg;
        const double phase =
            2.0 * kPi * (static_cast<double>(i) * (plan.n_max + z) + static_cast<double>(kg) * (z + lg)) / mn;
        const cd coef = h_bin.at(k, m).dot(f) * std::polar(scale, phase);
        const int ii = ((i % n) + n) % n;
        grid[static_cast<std::size_t>(ii) * z_span + (z - z_min)] += coef;
      }
    }
  }

  double interference = 0.0;
  double window = 0.0;
  for (int ii = 0; ii < n; ++ii) {
    const int i = channel::signed_doppler_bin(ii, n);
    for (int z = z_min; z <= z_max; ++z) {
      if (i == 0 && z == 0) continue;
      const double pw = std::norm(grid[static_cast<std::size_t>(ii) * z_span + (z - z_min)]);
      interference += pw;
      if (std::abs(i) <= interference_doppler_taps && std::abs(z) <= interference_delay_taps) window += pw;
    }
  }
  return make_report(std::norm(desired), interference, window, noise_psd_w_hz * params.bandwidth_hz());
}

double spectral_efficiency(double sinr_linear, double cp_overhead) {
  if (!(sinr_linear >= 0.0)) throw std::invalid_argument("spectral_efficiency: negative SINR");
  if (!(cp_overhead >= 0.0 && cp_overhead < 1.0)) throw std::invalid_argument("spectral_efficiency: overhead outside [0, 1)");
  return (1.0 - cp_overhead) * std::log2(1.0 + sinr_linear);
}

CVec oversample(std::span<const cd> x, int factor) {
  if (factor < 1) throw std::invalid_argument("oversample: factor must be >= 1");
  CVec freq(x.begin(), x.end());
  if (factor == 1 || freq.empty()) return freq;
  const std::size_t k = freq.size();
  fft_inplace(freq, false);
  CVec padded(k * static_cast<std::size_t>(factor), cd{});
  const std::size_t half = k / 2;
  if (k % 2 == 0) {
    for (std::size_t i = 0; i < half; ++i) padded[i] = freq[i];
    for (std::size_t i = half + 1; i < k; ++i) padded[padded.size() - k + i] = freq[i];
    // split the Nyquist bin symmetrically
    padded[half] = 0.5 * freq[half];
    padded[padded.size() - half] = 0.5 * freq[half];
  } else {
    for (std::size_t i = 0; i <= half; ++i) padded[i] = freq[i];
    for (std::size_t i = half + 1; i < k; ++i) padded[padded.size() - k + i] = freq[i];
  }
  fft_inplace(padded, true);
  const double norm = 1.0 / static_cast<double>(k);
  for (auto& v : padded) v *= norm;
  return padded;
}

namespace {

double peak_to_mean(std::span<const double> power) {
  double peak = 0.0;
  double sum = 0.0;
  for (double p : power) {
    peak = std::max(peak, p);
    sum += p;
  }
  if (!(sum > 0.0)) throw std::invalid_argument("papr: zero signal");
  return peak / (sum / static_cast<double>(power.size()));
}

}  // namespace

double papr(std::span<const cd> x, int oversample_factor) {
  if (x.empty()) throw std::invalid_argument("papr: empty signal");
  const CVec up = oversample(x, oversample_factor);
  std::vector<double> power(up.size());
  for (std::size_t i = 0; i < up.size(); ++i) power[i] = std::norm(up[i]);
  return peak_to_mean(power);
}

double papr_envelope(const Eigen::MatrixXcd& s, int oversample_factor) {
  if (s.size() == 0) throw std::invalid_argument("papr_envelope: empty signal");
  std::vector<double> power(static_cast<std::size_t>(s.cols()) * oversample_factor, 0.0);
  CVec row(static_cast<std::size_t>(s.cols()));
  for (Eigen::Index a = 0; a < s.rows(); ++a) {
    for (Eigen::Index c = 0; c < s.cols(); ++c) row[c] = s(a, c);
    const CVec up = oversample(row, oversample_factor);
    for (std::size_t i = 0; i < up.size(); ++i) power[i] += std::norm(up[i]);
  }
  return peak_to_mean(power);
}

CcdfAccumulator::CcdfAccumulator(std::vector<double> thresholds_db) : thresholds_(std::move(thresholds_db)) {
  if (!std::is_sorted(thresholds_.begin(), thresholds_.end())) {
    throw std::invalid_argument("ccdf: thresholds must be ascending");
  }
  above_.assign(thresholds_.size(), 0);
}

void CcdfAccumulator::add(double sample_db) {
  // thresholds strictly below the sample
  const auto it = std::lower_bound(thresholds_.begin(), thresholds_.end(), sample_db);
  const auto count = static_cast<std::size_t>(it - thresholds_.begin());
  for (std::size_t i = 0; i < count; ++i) ++above_[i];
  ++total_;
}

void CcdfAccumulator::merge(const CcdfAccumulator& other) {
  if (other.thresholds_ != thresholds_) throw std::invalid_argument("ccdf: merging different threshold grids");
  for (std::size_t i = 0; i < above_.size(); ++i) above_[i] += other.above_[i];
  total_ += other.total_;
}

CcdfCurve CcdfAccumulator::curve() const {
  if (total_ == 0) throw std::invalid_argument("ccdf: no samples");
  CcdfCurve c;
  c.thresholds_db = thresholds_;
  c.ccdf.resize(above_.size());
  for (std::size_t i = 0; i < above_.size(); ++i) {
    c.ccdf[i] = static_cast<double>(above_[i]) / static_cast<double>(total_);
  }
  return c;
}

CcdfCurve ccdf(std::span<const double> samples_db, std::span<const double> thresholds_db) {
  if (samples_db.empty()) throw std::invalid_argument("ccdf: empty input");
  CcdfAccumulator acc({thresholds_db.begin(), thresholds_db.end()});
  for (double s : samples_db) acc.add(s);
  return acc.curve();
}

double ccdf_level(std::span<const double> samples_db, double probability) {
  if (samples_db.empty()) throw std::invalid_argument("ccdf_level: empty input");
  std::vector<double> sorted(samples_db.begin(), samples_db.end());
  std::sort(sorted.begin(), sorted.end());
  // at most floor(p * n) samples may exceed the returned level
  const auto n = sorted.size();
  const auto allowed = static_cast<std::size_t>(std::floor(probability * static_cast<double>(n)));
  const std::size_t idx = allowed >= n ? 0 : n - 1 - allowed;
  return sorted[idx];
}

}  // namespace ddotfs::metrics
