#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ddotfs/alignment.hpp"
#include "ddotfs/baseline.hpp"
#include "ddotfs/metrics.hpp"
#include "ddotfs/rng.hpp"
#include "support.hpp"

using namespace ddotfs;
using namespace ddotfs::metrics;
using Catch::Approx;

namespace {

const auto kSmall = core::FrameParams::from_grid(64e6, 32, 8);

struct PathCase {
  channel::MultipathChannel ch;
  std::vector<channel::SampledPath> paths;
  ddam::AlignmentPlan plan;
};

PathCase path_case(channel::MultipathChannel ch, const core::FrameParams& p, ddam::BeamformerStrategy s,
                   double power = 1.0) {
  PathCase c{std::move(ch), {}, {}};
  c.paths = channel::decompose(c.ch, p);
  c.plan = ddam::plan_path_alignment(c.paths);
  c.plan.set_beamformers(ddam::design_beamformers(ddam::path_alignment_vectors(c.ch, c.paths, p), {s, power}));
  return c;
}

double sinc(double u) { return u == 0.0 ? 1.0 : std::sin(kPi * u) / (kPi * u); }

}  // namespace

TEST_CASE("integer delays leave no interference in path mode") {
  auto g = testing::rng(31);
  const auto pulse = channel::PulseShape::ideal_sinc(kSmall.sample_interval_s());
  channel::MultipathChannel ch;
  for (int p = 0; p < 3; ++p) ch.paths.push_back(testing::grid_path(2 + 5 * p, 0.3 * p - 1.1, testing::random_vector(6, g), kSmall));
  const auto c = path_case(ch, kSmall, ddam::BeamformerStrategy::isi_zf);
  const double n0 = 1e-12;
  const auto r = sinr_path(c.ch, c.paths, c.plan, pulse, 2, n0, kSmall);
  CHECK(r.interference_power < 1e-28);
  const auto hbar = ddam::path_alignment_vectors(c.ch, c.paths, kSmall);
  cd sum{};
  for (std::size_t p = 0; p < 3; ++p) sum += hbar[p].dot(c.plan.entries[p].f);
  CHECK(r.signal_power == Approx(std::norm(sum)).epsilon(1e-12));
  CHECK(r.sinr == Approx(std::norm(sum) / (n0 * 64e6)).epsilon(1e-12));
  CHECK(r.noise_power == Approx(n0 * 64e6));
}

TEST_CASE("half-sample delay leaks into the sinc tails") {
  auto g = testing::rng(32);
  const auto pulse = channel::PulseShape::ideal_sinc(kSmall.sample_interval_s(), 4);
  const auto c = path_case({{testing::grid_path(6.5, 0.7, testing::random_vector(3, g), kSmall)}}, kSmall,
                           ddam::BeamformerStrategy::isi_zf, 2.0);
  const double frac = c.paths[0].delay_frac;
  REQUIRE(std::abs(std::abs(frac) - 0.5) < 1e-9);
  const auto r = sinr_path(c.ch, c.paths, c.plan, pulse, 2, 0.0, kSmall);
  const double beta2 = std::norm(ddam::path_alignment_vectors(c.ch, c.paths, kSmall)[0].dot(c.plan.entries[0].f));
  double tails = 0;
  for (int z = -4; z <= 4; ++z) {
    if (z == 0) continue;
    // sinc(z - 1/2) = 2 (-1)^(z+1) / ((2z - 1) pi), mirrored for a fractional part of -1/2
    const double u = z - frac;
    tails += std::pow(2.0 / (std::abs(2 * u) * kPi), 2);
    CHECK(std::abs(sinc(u)) == Approx(2.0 / (std::abs(2 * u) * kPi)));
  }
  CHECK(r.interference_power == Approx(beta2 * tails).epsilon(1e-12));
  CHECK(r.signal_power == Approx(beta2 * 4 / (kPi * kPi)).epsilon(1e-12));
  CHECK(r.window_interference_power <= r.interference_power);
}

TEST_CASE("SINR vanishes as noise grows") {
  auto g = testing::rng(33);
  const auto pulse = channel::PulseShape::ideal_sinc(kSmall.sample_interval_s());
  const auto c = path_case(testing::random_grid_channel(3, 8, 20, 3, kSmall, g), kSmall, ddam::BeamformerStrategy::isi_zf);
  CHECK(sinr_path(c.ch, c.paths, c.plan, pulse, 2, 1e10, kSmall).sinr < 1e-15);
}

TEST_CASE("SINR is invariant under a global phase of the channel") {
  auto g = testing::rng(34);
  const auto pulse = channel::PulseShape::ideal_sinc(kSmall.sample_interval_s());
  for (int rep = 0; rep < 10; ++rep) {
    const auto c = path_case(testing::random_grid_channel(4, 8, 20, 3, kSmall, g), kSmall,
                             rep % 2 ? ddam::BeamformerStrategy::isi_mrt : ddam::BeamformerStrategy::isi_zf);
    auto rotated = c.ch;
    const cd phase = std::polar(1.0, 0.37 + rep);
    for (auto& p : rotated.paths) p.gain *= phase;
    const auto a = sinr_path(c.ch, c.paths, c.plan, pulse, 2, 1e-15, kSmall);
    const auto b = sinr_path(rotated, c.paths, c.plan, pulse, 2, 1e-15, kSmall);
    CHECK(std::abs(a.sinr - b.sinr) <= 1e-12 * a.sinr);

    const auto h = channel::bin_channel_response(c.ch, pulse, kSmall);
    const auto hr = channel::bin_channel_response(rotated, pulse, kSmall);
    auto plan = ddam::plan_bin_alignment(h, {0.1});
    if (plan.entries.size() > 8) continue;
    plan.set_beamformers(ddam::design_beamformers(ddam::bin_alignment_vectors(h, plan, kSmall), {ddam::BeamformerStrategy::isi_mrt, 1.0}));
    const auto x = sinr_bin(h, plan, 2, 1, 1e-15, kSmall);
    const auto y = sinr_bin(hr, plan, 2, 1, 1e-15, kSmall);
    CHECK(std::abs(x.sinr - y.sinr) <= 1e-12 * x.sinr);
  }
}

TEST_CASE("path-mode SINR shows array gain when noise dominates") {
  // With little noise the SINR is set by the fractional-delay ISI and does not
  // depend on the array size; the array gain shows once noise dominates.
  const auto params = core::FrameParams::from_grid(64e6, 128, 16);
  const auto pulse = channel::PulseShape::ideal_sinc(params.sample_interval_s());
  const double n0 = 1.0 / 64e6;  // unit noise power against unit transmit power
  double previous = 0.0;
  for (int mt : {8, 16, 32, 64}) {
    double sum = 0.0;
    for (int t = 0; t < 200; ++t) {
      channel::ChannelGenConfig gen;
      gen.antennas = mt;
      gen.rng_seed = 500 + t;
      const auto c = path_case(channel::random_channel(gen), params, ddam::BeamformerStrategy::isi_zf);
      sum += sinr_path(c.ch, c.paths, c.plan, pulse, 2, n0, params).sinr;
    }
    CHECK(sum / 200 > previous);
    previous = sum / 200;
  }
}

TEST_CASE("single integer-bin path in bin mode") {
  auto g = testing::rng(35);
  const auto pulse = channel::PulseShape::ideal_sinc(kSmall.sample_interval_s(), 6);
  const Eigen::VectorXcd h = testing::random_vector(4, g);
  channel::MultipathChannel ch{{testing::grid_path(7, 3, h, kSmall)}};
  const auto hb = channel::bin_channel_response(ch, pulse, kSmall);
  auto plan = ddam::plan_bin_alignment(hb, {0.1});
  plan.set_beamformers(ddam::design_beamformers(ddam::bin_alignment_vectors(hb, plan, kSmall), {ddam::BeamformerStrategy::isi_zf, 1.0}));
  const double n0 = 1e-12;
  const auto r = sinr_bin(hb, plan, 2, 1, n0, kSmall);
  CHECK(r.interference_power < 1e-28);
  // the bin response carries the kernel gain N; the aligned tap is h^H f
  CHECK(r.sinr == Approx(std::norm(h.dot(plan.entries[0].f)) / (n0 * 64e6)).epsilon(1e-12));
}

TEST_CASE("windowed bin-mode SINR never grows with the window") {
  auto g = testing::rng(36);
  const auto pulse = channel::PulseShape::ideal_sinc(kSmall.sample_interval_s(), 6);
  for (int rep = 0; rep < 10; ++rep) {
    const auto ch = testing::random_grid_channel(2, 8, 20, 3, kSmall, g);
    const auto hb = channel::bin_channel_response(ch, pulse, kSmall);
    auto plan = ddam::plan_bin_alignment(hb, {0.1});
    plan.set_beamformers(ddam::design_beamformers(ddam::bin_alignment_vectors(hb, plan, kSmall), {ddam::BeamformerStrategy::isi_mrt, 1.0}));
    double previous = std::numeric_limits<double>::infinity();
    for (int w = 0; w <= 6; ++w) {
      const auto r = sinr_bin(hb, plan, w, w, 1e-14, kSmall);
      CHECK(r.window_sinr <= previous * (1 + 1e-12));
      CHECK(r.window_interference_power <= r.interference_power * (1 + 1e-12));
      previous = r.window_sinr;
    }
  }
}

TEST_CASE("bin-mode SINR agrees with demodulation") {
  auto g = testing::rng(37);
  const auto pulse = channel::PulseShape::ideal_sinc(kSmall.sample_interval_s());
  for (int rep = 0; rep < 3; ++rep) {
    const auto ch = testing::random_grid_channel(2, 16, 12, 3, kSmall, g);
    const auto hb = channel::bin_channel_response(ch, pulse, kSmall);
    auto plan = ddam::plan_bin_alignment(hb, {0.1});
    plan.set_beamformers(ddam::design_beamformers(ddam::bin_alignment_vectors(hb, plan, kSmall), {ddam::BeamformerStrategy::isi_zf, 1.0}));
    const auto analytic = sinr_bin(hb, plan, 2, 1, 0.0, kSmall);
    // noise comparable to the interference
    const double n0 = analytic.interference_power / 64e6;
    const auto with_noise = sinr_bin(hb, plan, 2, 1, n0, kSmall);
    double signal = 0, residual = 0;
    for (int f = 0; f < 200; ++f) {
      auto rng = make_engine(f, kStreamData);
      const auto X = baseline::random_qam_frame(8, 32, 16, rng);
      const auto e = baseline::empirical_sinr_ddam(ch, pulse, plan, X, 0.0, kSmall);
      signal += e.signal_power / 200;
      residual += e.interference_power / 200;
    }
    const double empirical = to_db(signal / (residual + n0 * 64e6));
    CHECK(std::abs(empirical - with_noise.sinr_db) <= 0.5);
  }
}

TEST_CASE("path-mode SINR agrees with demodulation") {
  auto g = testing::rng(38);
  const auto params = core::FrameParams::from_grid(64e6, 64, 16);
  const auto pulse = channel::PulseShape::ideal_sinc(params.sample_interval_s());
  for (int rep = 0; rep < 5; ++rep) {
    const auto c = path_case(testing::random_grid_channel(5, 32, 30, 5, params, g), params,
                             rep % 2 ? ddam::BeamformerStrategy::isi_mrt : ddam::BeamformerStrategy::isi_zf);
    const auto analytic = sinr_path(c.ch, c.paths, c.plan, pulse, 2, 0.0, params);
    auto rng = make_engine(rep, kStreamData);
    const auto X = baseline::random_qam_frame(16, 64, 16, rng);
    const auto e = baseline::empirical_sinr_ddam(c.ch, pulse, c.plan, X, 0.0, params);
    CHECK(std::abs(e.sinr_db - analytic.sinr_db) <= 0.5);
  }
}

TEST_CASE("spectral efficiency") {
  CHECK(spectral_efficiency(0.0, 0.1) == 0.0);
  CHECK(spectral_efficiency(1.0, 0.0) == 1.0);
  CHECK(spectral_efficiency(1e3, 0.0588) == Approx(0.9412 * std::log2(1001.0)));
  CHECK(spectral_efficiency(1e3, 0.0588) == Approx(9.382).epsilon(1e-4));
  CHECK_THROWS_AS(spectral_efficiency(-1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(spectral_efficiency(1.0, 1.0), std::invalid_argument);
}

TEST_CASE("oversampling interpolates through the original samples") {
  auto g = testing::rng(39);
  for (int len : {16, 17, 64}) {
    const auto x = testing::random_signal(len, g);
    CHECK(oversample(x, 1) == x);
    const auto y = oversample(x, 4);
    REQUIRE(y.size() == x.size() * 4);
    for (int n = 0; n < len; ++n) CHECK(std::abs(y[4 * n] - x[n]) < 1e-12);
  }
}

TEST_CASE("PAPR of simple signals") {
  const int k = 64;
  CVec tone(k);
  for (int n = 0; n < k; ++n) tone[n] = std::polar(1.0, 2 * kPi * 5 * n / k);
  CHECK(papr(tone, 1) == Approx(1.0));
  CHECK(papr(tone, 4) == Approx(1.0));
  CVec impulse(k, cd{});
  impulse[3] = cd(0, 2);
  CHECK(papr(impulse, 1) == Approx(double(k)));
  CHECK_THROWS_AS(papr(CVec(8, cd{}), 4), std::invalid_argument);

  auto g = testing::rng(40);
  std::uniform_int_distribution<int> bit(0, 1);
  for (int rep = 0; rep < 100; ++rep) {
    CVec qpsk(128);
    for (auto& v : qpsk) v = cd(2 * bit(g) - 1, 2 * bit(g) - 1);
    const auto ofdm_like = core::idzt([&] {
      core::DDFrame f(16, 8);
      std::copy(qpsk.begin(), qpsk.end(), f.data().begin());
      return f;
    }());
    CHECK(papr(ofdm_like, 4) >= papr(ofdm_like, 1) * (1 - 1e-12));
  }

  Eigen::MatrixXcd s(2, k);
  for (int n = 0; n < k; ++n) {
    s(0, n) = tone[n];
    s(1, n) = std::conj(tone[n]);
  }
  CHECK(papr_envelope(s, 4) == Approx(1.0));
}

TEST_CASE("CCDF estimation") {
  const std::vector<double> same(10, 3.0);
  const std::vector<double> th{2.999, 3.0, 3.5};
  const auto c = ccdf(same, th);
  CHECK(c.ccdf == std::vector<double>{1.0, 0.0, 0.0});
  CHECK(ccdf(same, std::vector<double>{-10.0}).ccdf[0] == 1.0);
  CHECK_THROWS_AS(ccdf(std::vector<double>{}, th), std::invalid_argument);

  auto g = testing::rng(41);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::vector<double> samples(20000);
  for (auto& s : samples) s = u(g);
  const double p = ccdf(samples, std::vector<double>{5.0}).ccdf[0];
  CHECK(std::abs(p - 0.5) < 3 * std::sqrt(0.25 / samples.size()));

  std::vector<double> grid;
  for (int i = -20; i <= 120; ++i) grid.push_back(0.1 * i);
  for (int rep = 0; rep < 20; ++rep) {
    std::normal_distribution<double> n(5.0, 3.0);
    std::vector<double> xs(1 + rep * 7);
    for (auto& x : xs) x = n(g);
    const auto curve = ccdf(xs, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      CHECK(curve.ccdf[i] >= 0.0);
      CHECK(curve.ccdf[i] <= 1.0);
      if (i > 0) CHECK(curve.ccdf[i] <= curve.ccdf[i - 1]);
    }
    // merging halves equals one pass
    CcdfAccumulator a(grid), b(grid);
    for (std::size_t i = 0; i < xs.size(); ++i) (i % 2 ? a : b).add(xs[i]);
    a.merge(b);
    CHECK(a.curve().ccdf == curve.ccdf);
    CHECK(a.total() == xs.size());
  }
}

TEST_CASE("CCDF level") {
  std::vector<double> xs;
  for (int i = 1; i <= 1000; ++i) xs.push_back(i);
  const double v = ccdf_level(xs, 1e-2);
  CHECK(v == 990.0);
  CHECK(ccdf(xs, std::vector<double>{v}).ccdf[0] <= 1e-2);
  CHECK(ccdf(xs, std::vector<double>{v - 0.5}).ccdf[0] > 1e-2);
}
