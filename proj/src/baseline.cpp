#include "ddotfs/baseline.hpp"

#include <cmath>
#include <stdexcept>

#include "ddotfs/types.hpp"

namespace ddotfs::baseline {

Eigen::VectorXcd dominant_direction(const channel::MultipathChannel& channel) {
  const int mt = channel.antennas();
  if (mt == 0) throw std::invalid_argument("dominant_direction: empty channel");
  Eigen::MatrixXcd cov = Eigen::MatrixXcd::Zero(mt, mt);
  for (const auto& p : channel.paths) cov.noalias() += p.gain * p.gain.adjoint();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(cov);
  if (eig.info() != Eigen::Success) throw NumericalError("dominant_direction: eigen decomposition failed");
  Eigen::VectorXcd u = eig.eigenvectors().col(mt - 1);
  return u / u.norm();
}

core::DDFrame random_qam_frame(int time_slots, int subcarriers, int order, std::mt19937_64& rng) {
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(order))));
  if (side < 2 || side * side != order) throw std::invalid_argument("random_qam_frame: order must be a square >= 4");
  // levels -(side-1), ..., side-1 in steps of 2; E|s|^2 = 2(side^2 - 1)/3
  const double scale = 1.0 / std::sqrt(2.0 * (order - 1) / 3.0);
  std::uniform_int_distribution<int> pick(0, side - 1);
  core::DDFrame frame(time_slots, subcarriers);
  for (auto& v : frame.data()) {
    const int re = 2 * pick(rng) - (side - 1);
    const int im = 2 * pick(rng) - (side - 1);
    v = scale * cd(re, im);
  }
  return frame;
}

CVec matched_filter(std::span<const cd> y, const channel::MultipathChannel& channel, const Eigen::VectorXcd& f,
                    const channel::PulseShape& pulse, const core::FrameParams& params) {
  const long mn = params.frame_samples();
  if (static_cast<long>(y.size()) != mn) throw std::invalid_argument("matched_filter: length must be M*N");
  const int w = pulse.half_width();
  CVec out(static_cast<std::size_t>(mn), cd{});
  CVec derotated(static_cast<std::size_t>(mn));
  for (const auto& path : channel.paths) {
    const auto sp = channel::decompose(path.delay_s, path.doppler_hz, params);
    const cd a = path.gain.adjoint() * f;
    for (long n = 0; n < mn; ++n) {
      const double phase = -2.0 * kPi * sp.doppler * static_cast<double>(n) / static_cast<double>(mn);
      derotated[n] = y[n] * std::polar(1.0, phase);
    }
    for (int z = -w; z <= w; ++z) {
      const double tap = pulse.at_samples(z - sp.delay_frac);
      if (tap == 0.0) continue;
      const cd weight = std::conj(a) * tap;
      long src = (z + sp.delay_int) % mn;
      if (src < 0) src += mn;
      for (long m = 0; m < mn; ++m) {
        out[m] += weight * derotated[src];
        if (++src == mn) src = 0;
      }
    }
  }
  return out;
}

namespace {

struct Fit {
  cd coefficient;
  double residual;  // per sample
};

Fit least_squares(const core::DDFrame& ref, const core::DDFrame& y) {
  cd num{};
  double den = 0.0;
  const auto r = ref.data();
  const auto v = y.data();
  for (std::size_t i = 0; i < r.size(); ++i) {
    num += std::conj(r[i]) * v[i];
    den += std::norm(r[i]);
  }
  if (den <= 0.0) throw std::invalid_argument("empirical SINR: reference frame has zero energy");
  const cd c = num / den;
  double res = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) res += std::norm(v[i] - c * r[i]);
  return {c, res / static_cast<double>(r.size())};
}

}  // namespace

metrics::SinrReport empirical_sinr_ddam(const channel::MultipathChannel& channel, const channel::PulseShape& pulse,
                                        const ddam::AlignmentPlan& plan, const core::DDFrame& symbols,
                                        double noise_psd_w_hz, const core::FrameParams& params) {
  if (!symbols.matches(params)) throw std::invalid_argument("empirical_sinr_ddam: frame does not match params");
  const int prefix = static_cast<int>(plan.n_max) + pulse.half_width();
  const CVec x = core::idzt(symbols);
  const Eigen::MatrixXcd s = ddam::precode(x, plan, prefix);
  const CVec y = channel::apply_channel(s, channel, pulse, 0.0, params, 0, {.prefix_len = prefix});
  const core::DDFrame received = core::dzt(y, params);
  const core::DDFrame ref = core::shift_delay(symbols, plan.n_max);
  const Fit fit = least_squares(ref, received);
  const double es = symbols.energy() / static_cast<double>(symbols.size());
  const double noise = noise_psd_w_hz * params.bandwidth_hz();
  return metrics::make_report(std::norm(fit.coefficient) * es, fit.residual, fit.residual, noise);
}

metrics::SinrReport empirical_sinr_baseline(const channel::MultipathChannel& channel,
                                            const channel::PulseShape& pulse, double total_power_w,
                                            const core::DDFrame& symbols, double noise_psd_w_hz,
                                            const core::FrameParams& params, std::uint64_t noise_seed,
                                            Receiver receiver) {
  if (!symbols.matches(params)) throw std::invalid_argument("empirical_sinr_baseline: frame does not match params");
  const Eigen::VectorXcd f = std::sqrt(total_power_w) * dominant_direction(channel);
  const CVec x = core::idzt(symbols);
  const Eigen::Map<const Eigen::RowVectorXcd> row(x.data(), static_cast<Eigen::Index>(x.size()));
  const Eigen::MatrixXcd s = f * row;
  const CVec y = channel::apply_channel(s, channel, pulse, noise_psd_w_hz, params, noise_seed);
  const double es = symbols.energy() / static_cast<double>(symbols.size());

  Fit best{};
  if (receiver == Receiver::matched_filter) {
    best = least_squares(symbols, core::dzt(matched_filter(y, channel, f, pulse, params), params));
  } else {
    const core::DDFrame received = core::dzt(y, params);
    const long mn = params.frame_samples();
    bool first = true;
    CVec tap(static_cast<std::size_t>(mn));
    for (const auto& sp : channel::decompose(channel, params)) {
      const double k = static_cast<double>(sp.doppler_int);
      for (long n = 0; n < mn; ++n) {
        long src = (n - sp.delay_int) % mn;
        if (src < 0) src += mn;
        tap[n] = x[src] * std::polar(1.0, 2.0 * kPi * k * static_cast<double>(n) / static_cast<double>(mn));
      }
      const Fit fit = least_squares(core::dzt(tap, params), received);
      if (first || std::norm(fit.coefficient) > std::norm(best.coefficient)) best = fit;
      first = false;
    }
  }
  // Noise is already inside the residual.
  return metrics::make_report(std::norm(best.coefficient) * es, best.residual, best.residual, 0.0);
}

}  // namespace ddotfs::baseline
