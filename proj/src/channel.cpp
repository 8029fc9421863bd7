#include "ddotfs/channel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ddotfs/rng.hpp"

namespace ddotfs::channel {
namespace {

// Nearest integer with the fractional remainder in [-0.5, 0.5).
std::pair<long, double> split_nearest(double v) {
  const double i = std::floor(v + 0.5);
  return {static_cast<long>(i), v - i};
}

bool is_integer(double v) { return std::abs(v - std::round(v)) < 1e-12; }

}  // namespace

void MultipathChannel::validate(const core::FrameParams& params) const {
  if (paths.empty()) throw std::invalid_argument("channel: no paths");
  const auto mt = paths.front().gain.size();
  for (const auto& p : paths) {
    if (p.gain.size() != mt || mt == 0) throw std::invalid_argument("channel: inconsistent antenna count");
    if (!(p.gain.norm() > 0.0)) throw std::invalid_argument("channel: path with zero gain vector");
    if (!(p.delay_s >= 0.0)) throw std::invalid_argument("channel: negative path delay");
    if (!(p.delay_s < params.slot_duration_s())) {
      throw std::invalid_argument("channel: path delay must be shorter than one slot");
    }
  }
}

SampledPath decompose(double delay_s, double doppler_hz, const core::FrameParams& params) {
  SampledPath sp;
  const double t = params.sample_interval_s();
  sp.delay = delay_s / t;
  sp.doppler = doppler_hz * params.frame_samples() * t;
  std::tie(sp.delay_int, sp.delay_frac) = split_nearest(sp.delay);
  std::tie(sp.doppler_int, sp.doppler_frac) = split_nearest(sp.doppler);
  return sp;
}

std::vector<SampledPath> decompose(const MultipathChannel& channel, const core::FrameParams& params) {
  std::vector<SampledPath> out;
  out.reserve(channel.paths.size());
  for (const auto& p : channel.paths) out.push_back(decompose(p.delay_s, p.doppler_hz, params));
  return out;
}

PulseShape::PulseShape(PulseKind kind, double sample_interval_s, double rolloff, int half_width)
    : kind_(kind), sample_interval_s_(sample_interval_s), rolloff_(rolloff), half_width_(half_width) {
  if (!(sample_interval_s > 0.0)) throw std::invalid_argument("pulse: sample interval must be positive");
  if (half_width < 0) throw std::invalid_argument("pulse: half width must be >= 0");
}

PulseShape PulseShape::ideal_sinc(double sample_interval_s, int half_width) {
  return PulseShape(PulseKind::ideal_sinc, sample_interval_s, 0.0, half_width);
}

PulseShape PulseShape::root_raised_cosine(double sample_interval_s, double rolloff, int half_width) {
  if (!(rolloff > 0.0 && rolloff <= 1.0)) throw std::invalid_argument("pulse: RRC rolloff must lie in (0, 1]");
  return PulseShape(PulseKind::root_raised_cosine, sample_interval_s, rolloff, half_width);
}

double PulseShape::at_samples(double u) const {
  if (u == 0.0) return 1.0;
  if (kind_ == PulseKind::ideal_sinc) {
    if (is_integer(u)) return 0.0;
    const double x = kPi * u;
    return std::sin(x) / x;
  }
  const double b = rolloff_;
  const double peak = 1.0 - b + 4.0 * b / kPi;
  if (std::abs(std::abs(u) - 1.0 / (4.0 * b)) < 1e-9) {
    const double a = kPi / (4.0 * b);
    return b / std::sqrt(2.0) * ((1.0 + 2.0 / kPi) * std::sin(a) + (1.0 - 2.0 / kPi) * std::cos(a)) / peak;
  }
  const double num = std::sin(kPi * u * (1.0 - b)) + 4.0 * b * u * std::cos(kPi * u * (1.0 + b));
  const double den = kPi * u * (1.0 - (4.0 * b * u) * (4.0 * b * u));
  return num / den / peak;
}

Eigen::VectorXcd steering_vector(double theta, int antennas) {
  Eigen::VectorXcd a(antennas);
  const double s = std::sin(theta);
  for (int m = 0; m < antennas; ++m) a[m] = std::polar(1.0, kPi * m * s);
  return a;
}

void ChannelGenConfig::validate() const {
  if (num_paths < 1) throw ConfigError("channel_gen: num_paths must be >= 1");
  if (!(max_delay_s > 0.0)) throw ConfigError("channel_gen: max_delay_s must be positive");
  if (!(max_speed_mps >= 0.0)) throw ConfigError("channel_gen: max_speed_mps must be >= 0");
  if (!(carrier_hz > 0.0)) throw ConfigError("channel_gen: carrier_hz must be positive");
  if (antennas < 1) throw ConfigError("channel_gen: antennas must be >= 1");
}

MultipathChannel random_channel(const ChannelGenConfig& cfg) {
  cfg.validate();
  auto eng = make_engine(cfg.rng_seed, kStreamChannel);
  const double nu_max = core::max_doppler_shift(cfg.carrier_hz, cfg.max_speed_mps);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double alpha_std = std::sqrt(0.5 / cfg.num_paths) * std::pow(10.0, -cfg.path_loss_db / 20.0);

  MultipathChannel ch;
  ch.paths.reserve(static_cast<std::size_t>(cfg.num_paths));
  for (int p = 0; p < cfg.num_paths; ++p) {
    PathComponent pc;
    pc.delay_s = unit(eng) * cfg.max_delay_s;
    pc.doppler_hz = (2.0 * unit(eng) - 1.0) * nu_max;
    const double theta = (unit(eng) - 0.5) * kPi;
    const double re = gauss(eng);
    const double im = gauss(eng);
    pc.gain = cd(re, im) * alpha_std * steering_vector(theta, cfg.antennas);
    ch.paths.push_back(std::move(pc));
  }
  return ch;
}

CVec apply_channel(const Eigen::MatrixXcd& s, const MultipathChannel& channel, const PulseShape& pulse,
                   double noise_psd_w_hz, const core::FrameParams& params, std::uint64_t noise_seed,
                   const ApplyOptions& options) {
  const long mn = params.frame_samples();
  const long prefix = options.prefix_len;
  if (noise_psd_w_hz < 0.0) throw std::invalid_argument("apply_channel: negative noise PSD");
  if (prefix < 0) throw std::invalid_argument("apply_channel: negative prefix length");
  if (channel.paths.empty()) throw std::invalid_argument("apply_channel: empty channel");
  if (s.rows() != channel.antennas() || s.cols() != prefix + mn) {
    throw std::invalid_argument("apply_channel: signal is " + std::to_string(s.rows()) + "x" +
                                std::to_string(s.cols()) + ", expected " +
                                std::to_string(channel.antennas()) + "x" + std::to_string(prefix + mn));
  }

  const int w = pulse.half_width();
  CVec y(static_cast<std::size_t>(mn), cd{});
  std::vector<double> taps(static_cast<std::size_t>(2 * w + 1));

  for (const auto& path : channel.paths) {
    const SampledPath sp = decompose(path.delay_s, path.doppler_hz, params);
    // u[c] = h_p^H s[:, c] for every stored column
    const Eigen::VectorXcd u = (path.gain.adjoint() * s).transpose();
    for (int z = -w; z <= w; ++z) taps[z + w] = pulse.at_samples(z - sp.delay_frac);

    auto sample = [&](long t) -> cd {
      if (t >= -prefix && t < mn) return u[t + prefix];
      if (options.linear_edges) return cd{};
      long r = t % mn;
      if (r < 0) r += mn;
      return u[r + prefix];
    };

    for (long n = 0; n < mn; ++n) {
      cd acc{};
      const long base = n - sp.delay_int;
      for (int z = -w; z <= w; ++z) {
        const double tap = taps[z + w];
        if (tap != 0.0) acc += tap * sample(base - z);
      }
      const double phase = 2.0 * kPi * sp.doppler * static_cast<double>(n) / static_cast<double>(mn);
      y[n] += acc * std::polar(1.0, phase);
    }
  }

  if (noise_psd_w_hz > 0.0) {
    auto eng = make_engine(noise_seed, kStreamNoise);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double sigma = std::sqrt(noise_psd_w_hz * params.bandwidth_hz() / 2.0);
    for (auto& v : y) {
      const double re = gauss(eng);
      const double im = gauss(eng);
      v += sigma * cd(re, im);
    }
  }
  return y;
}

double wrap_doppler(double d, int time_slots) {
  const double n = time_slots;
  double r = std::fmod(d, n);
  if (r <= -n / 2.0) r += n;
  if (r > n / 2.0) r -= n;
  return r;
}

int signed_doppler_bin(int k, int time_slots) {
  int r = ((k % time_slots) + time_slots) % time_slots;
  if (2 * r > time_slots) r -= time_slots;
  return r;
}

cd doppler_kernel(double d, int time_slots) {
  const double n = time_slots;
  const double r = wrap_doppler(d, time_slots);
  if (std::abs(r) < 1e-12) return cd(n, 0.0);
  if (is_integer(r)) return cd{};
  // e^{-j pi r (N-1)/N} sin(pi r) / sin(pi r / N)
  return std::polar(std::sin(kPi * r) / std::sin(kPi * r / n), -kPi * r * (n - 1.0) / n);
}

BinResponse::BinResponse(int doppler_bins, int delay_min, int delay_bins, int antennas)
    : n_(doppler_bins), delay_min_(delay_min), delay_bins_(delay_bins), antennas_(antennas) {
  if (doppler_bins < 1 || delay_bins < 1 || antennas < 1) throw std::invalid_argument("BinResponse: empty");
  data_ = Eigen::MatrixXcd::Zero(antennas, static_cast<Eigen::Index>(doppler_bins) * delay_bins);
}

std::size_t BinResponse::column(int k, int m) const {
  const int kk = ((k % n_) + n_) % n_;
  return static_cast<std::size_t>(kk) * delay_bins_ + static_cast<std::size_t>(m - delay_min_);
}

Eigen::VectorXcd BinResponse::at(int k, int m) const {
  if (m < delay_min_ || m > delay_max()) return Eigen::VectorXcd::Zero(antennas_);
  return data_.col(static_cast<Eigen::Index>(column(k, m)));
}

Eigen::Ref<Eigen::VectorXcd> BinResponse::mutable_at(int k, int m) {
  if (m < delay_min_ || m > delay_max()) throw std::out_of_range("BinResponse: delay bin out of range");
  return data_.col(static_cast<Eigen::Index>(column(k, m)));
}

double BinResponse::power(int k, int m) const {
  if (m < delay_min_ || m > delay_max()) return 0.0;
  return data_.col(static_cast<Eigen::Index>(column(k, m))).squaredNorm();
}

BinResponse bin_channel_response(const MultipathChannel& channel, const PulseShape& pulse,
                                 const core::FrameParams& params) {
  if (channel.paths.empty()) throw std::invalid_argument("bin_channel_response: empty channel");
  const auto sampled = decompose(channel, params);
  const int w = pulse.half_width();
  long max_l = 0;
  for (const auto& sp : sampled) max_l = std::max(max_l, sp.delay_int);
  const int n = params.time_slots();
  BinResponse out(n, -w, static_cast<int>(max_l) + 2 * w + 1, channel.antennas());

  for (std::size_t p = 0; p < sampled.size(); ++p) {
    const auto& sp = sampled[p];
    const auto& h = channel.paths[p].gain;
    for (int k = 0; k < n; ++k) {
      // conjugated so that h_bin^H carries G(k - k_p), the weight of bin k in e^{j2pi k_p n/(MN)}
      const cd g = std::conj(doppler_kernel(k - sp.doppler, n));
      if (g == cd{}) continue;
      for (long m = sp.delay_int - w; m <= sp.delay_int + w; ++m) {
        const double tap = pulse.at_samples(static_cast<double>(m) - sp.delay);
        if (tap == 0.0) continue;
        out.mutable_at(k, static_cast<int>(m)) += (tap * g) * h;
      }
    }
  }
  return out;
}

}  // namespace ddotfs::channel
