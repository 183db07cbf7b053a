#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "support.hpp"
#include "otalink/seed.hpp"
#include "otalink/stbc.hpp"

using namespace otalink;
using namespace otalink::stbc;

namespace {

using S2 = Stacked<double>;

S2 s2(cdouble a, cdouble b) { return S2(a, b); }

cdouble rc(std::mt19937_64& rng) { return oracle::random_complex(1, rng)[0]; }

/// Direct evaluation of the two-interval receive equations.
S2 receive_oracle(cdouble x1, cdouble x2, cdouble h11, cdouble h12, cdouble n1, cdouble n2) {
  const cdouble y1 = h11 * x1 + h12 * x2 + n1;
  const cdouble y2 = h11 * (-std::conj(x2)) + h12 * std::conj(x1) + std::conj(n2);
  return s2(y1, std::conj(y2));
}

}  // namespace

TEST_CASE("encode examples") {
  const auto p = alamouti_encode(cdouble(1, 0), cdouble(0, 1));
  CHECK(p.antenna1[0] == cdouble(1, 0));
  CHECK(p.antenna1[1] == cdouble(0, 1));
  CHECK(p.antenna2[0] == cdouble(0, 1));
  CHECK(p.antenna2[1] == cdouble(1, 0));
  const auto z = alamouti_encode(cdouble{}, cdouble{});
  for (auto v : {z.antenna1[0], z.antenna1[1], z.antenna2[0], z.antenna2[1]}) CHECK(v == cdouble{});

  std::mt19937_64 rng(1);
  for (int t = 0; t < 100; ++t) {
    const cdouble x1 = rc(rng), x2 = rc(rng);
    const auto q = alamouti_encode(x1, x2);
    const double pw = std::norm(x1) + std::norm(x2);
    CHECK(std::norm(q.antenna1[0]) + std::norm(q.antenna2[0]) == doctest::Approx(pw));
    CHECK(std::norm(q.antenna1[1]) + std::norm(q.antenna2[1]) == doctest::Approx(pw));
    // Antenna sequences are orthogonal over the pair.
    const cdouble dot = q.antenna1[0] * std::conj(q.antenna2[0]) + q.antenna1[1] * std::conj(q.antenna2[1]);
    CHECK(dot == cdouble{});
  }
}

TEST_CASE("receive examples") {
  const cdouble x1(0.3, -0.4), x2(-1.0, 0.2);
  const auto y = alamouti_receive(alamouti_encode(x1, x2), cdouble(1, 0), cdouble{}, S2::Zero());
  CHECK(std::abs(y[0] - x1) < 1e-15);
  CHECK(std::abs(y[1] - (-x2)) < 1e-15);  // conj of -conj(x2)

  const S2 n = s2(cdouble(0.1, 0.2), cdouble(-0.3, 0.4));
  const auto yn = alamouti_receive(alamouti_encode(cdouble{}, cdouble{}), cdouble(0.5, 0.5), cdouble(1, 0), n);
  CHECK(yn == n);

  std::mt19937_64 rng(2);
  for (int t = 0; t < 100; ++t) {
    const cdouble a = rc(rng), b = rc(rng), h11 = rc(rng), h12 = rc(rng), n1 = rc(rng), n2 = rc(rng);
    // Stacked noise is [n1, conj(n2)] in the conjugated domain.
    const auto got = alamouti_receive(alamouti_encode(a, b), h11, h12, s2(n1, n2));
    const auto want = receive_oracle(a, b, h11, h12, n1, n2);
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-14);
    // Same as the equivalent-channel product.
    const S2 via_h = equivalent_channel(h11, h12) * s2(a, b) + s2(n1, n2);
    CHECK((got - via_h).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("combine examples") {
  const ChannelEstimate unit{cdouble(0.6, 0.0), cdouble(0.0, 0.8), EstimateSource::known};
  const cdouble x1(0.7, -0.7), x2(-0.7, -0.7);
  const auto y = alamouti_receive(alamouti_encode(x1, x2), unit.h11, unit.h12, S2::Zero());
  const auto c = alamouti_combine(y, unit);
  CHECK(c.gain == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(c.r[0] - x1) < 1e-14);
  CHECK(std::abs(c.r[1] - x2) < 1e-14);

  CHECK(code_of([] { alamouti_combine(S2::Zero().eval(), ChannelEstimate{}); }) == Errc::degenerate_channel);

  std::mt19937_64 rng(3);
  for (int t = 0; t < 100; ++t) {
    const cdouble a = rc(rng), b = rc(rng), h11 = rc(rng), h12 = rc(rng), n1 = rc(rng), n2 = rc(rng);
    const auto r = alamouti_combine(alamouti_receive(alamouti_encode(a, b), h11, h12, s2(n1, n2)),
                                    ChannelEstimate{h11, h12, EstimateSource::known});
    const double g = std::norm(h11) + std::norm(h12);
    CHECK(std::abs(r.r[0] - (g * a + std::conj(h11) * n1 + h12 * n2)) < 1e-14 * (1.0 + std::abs(r.r[0])));
    CHECK(std::abs(r.r[1] - (g * b + std::conj(h12) * n1 - h11 * n2)) < 1e-14 * (1.0 + std::abs(r.r[1])));
  }
}

TEST_CASE("equivalent channel is orthogonal") {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 100; ++t) {
    const cdouble h11 = rc(rng), h12 = rc(rng);
    const auto h = equivalent_channel(h11, h12);
    const Matrix2c<double> hh = h.adjoint() * h;
    const double g = std::norm(h11) + std::norm(h12);
    CHECK((hh - g * Matrix2c<double>::Identity()).cwiseAbs().maxCoeff() < 1e-14 * g);
  }
}

TEST_CASE("interference enters additively before combining") {
  std::mt19937_64 rng(5);
  const cdouble a = rc(rng), b = rc(rng), h11 = rc(rng), h12 = rc(rng);
  const S2 i = s2(rc(rng), rc(rng));
  const auto clean = alamouti_receive(alamouti_encode(a, b), h11, h12, S2::Zero());
  const auto dirty = alamouti_receive(alamouti_encode(a, b), h11, h12, S2::Zero(), std::optional<S2>(i));
  CHECK((dirty - clean - i).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("pilot estimate is exact without noise") {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 50; ++t) {
    const cdouble x1 = rc(rng), x2 = rc(rng), h11 = rc(rng), h12 = rc(rng);
    const auto y = alamouti_receive(alamouti_encode(x1, x2), h11, h12, S2::Zero());
    const auto est = estimate_channel_pilots<double>(y, s2(x1, x2));
    CHECK(std::abs(est.h11 - h11) < 1e-12);
    CHECK(std::abs(est.h12 - h12) < 1e-12);
    CHECK(est.source == EstimateSource::pilot_clean);
  }
  CHECK(code_of([] { estimate_channel_pilots<double>(S2::Ones().eval(), S2::Zero().eval()); }) == Errc::estimation);
}

TEST_CASE("pilot estimate converges as noise vanishes") {
  std::mt19937_64 rng(9);
  const cdouble h11(0.3, 0.9), h12(-0.5, 0.1), x1(1, 0), x2(0, 1);
  // Noise amplitude 1e-12, so variance 1e-24.
  const auto noise = oracle::random_complex(2, rng, 1e-24);
  const auto y = alamouti_receive(alamouti_encode(x1, x2), h11, h12, S2(noise));
  const auto est = estimate_channel_pilots<double>(y, s2(x1, x2));
  CHECK(std::abs(est.h11 - h11) < 1e-10);
  CHECK(std::abs(est.h12 - h12) < 1e-10);
}

TEST_CASE("contamination deviates the estimate linearly") {
  const cdouble h11(0.8, -0.1), h12(0.2, 0.5);
  const cdouble x1 = cdouble(1, 1) / std::sqrt(2.0), x2 = cdouble(1, -1) / std::sqrt(2.0);
  const auto y = alamouti_receive(alamouti_encode(x1, x2), h11, h12, S2::Zero());
  std::vector<double> dev;
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    const auto est = estimate_channel_pilots<double>(y, s2(x1, x2), std::optional<S2>(s2(eps, 0.0)));
    CHECK(est.source == EstimateSource::pilot_contaminated);
    dev.push_back(std::hypot(std::abs(est.h11 - h11), std::abs(est.h12 - h12)));
  }
  CHECK(dev[0] > dev[1]);
  CHECK(dev[1] > dev[2]);
  CHECK(dev[0] / dev[1] == doctest::Approx(10.0).epsilon(0.05));
  CHECK(dev[1] / dev[2] == doctest::Approx(10.0).epsilon(0.05));
}

TEST_CASE("averaging pilot pairs reduces estimation error") {
  std::mt19937_64 rng(7);
  const cdouble h11(0.4, -0.6), h12(0.9, 0.2);
  const double sigma2 = 0.01;
  const int trials = 2000;
  auto run = [&](int pairs) {
    double err = 0.0;
    for (int t = 0; t < trials; ++t) {
      std::vector<S2> rx, known;
      for (int p = 0; p < pairs; ++p) {
        const auto x = oracle::random_complex(2, rng);
        const auto noise = oracle::random_complex(2, rng, sigma2);
        known.push_back(s2(x[0] / std::abs(x[0]), x[1] / std::abs(x[1])));
        rx.push_back(alamouti_receive(alamouti_encode(known.back()[0], known.back()[1]), h11, h12, S2(noise)));
      }
      const auto est = estimate_channel_pilots<double>(rx, known);
      err += std::norm(est.h11 - h11) + std::norm(est.h12 - h12);
    }
    return err / trials;
  };
  const double single = run(1);
  const double many = run(100);
  const double expected = single / 100.0;
  CHECK(many < 3.0 * expected);
  CHECK(many > expected / 3.0);
  // LS with unit-modulus pilots: error variance is sigma^2 per coefficient.
  CHECK(single == doctest::Approx(sigma2).epsilon(0.1));
}

TEST_CASE("zero-noise known-H recovery is exact") {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 1000; ++t) {
    const cdouble a = rc(rng), b = rc(rng), h11 = rc(rng), h12 = rc(rng);
    if (std::norm(h11) + std::norm(h12) <= 1e-9) continue;
    const auto r = alamouti_combine(alamouti_receive(alamouti_encode(a, b), h11, h12, S2::Zero()),
                                    ChannelEstimate{h11, h12, EstimateSource::known});
    CHECK((r.symbols() - s2(a, b)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("link: clean channel gives zero EVM") {
  StbcLinkConfig cfg;
  cfg.n_subframes = 3;
  for (auto order : {waveform::ConstellationOrder::QPSK, waveform::ConstellationOrder::QAM256}) {
    cfg.order = order;
    for (auto mode : {EstimationMode::known_h, EstimationMode::realtime_estimate}) {
      cfg.mode = mode;
      const auto res = run_stbc_link(cfg);
      REQUIRE(res.size() == 3);
      for (const auto& r : res) {
        CHECK(r.ok());
        CHECK(r.evm.normalized_evm_rms < 1e-9);
        CHECK(std::isinf(r.sinr.linear));
      }
    }
  }
}

TEST_CASE("link: realtime estimate is exact when clean") {
  StbcLinkConfig cfg;
  cfg.mode = EstimationMode::realtime_estimate;
  cfg.channel = channel::RayleighIid{5};
  cfg.n_subframes = 4;
  for (const auto& r : run_stbc_link(cfg)) {
    CHECK(std::abs(r.estimate.h11 - r.truth.h11) < 1e-12 * std::abs(r.truth.h11) + 1e-15);
    CHECK(std::abs(r.estimate.h12 - r.truth.h12) < 1e-12 * std::abs(r.truth.h12) + 1e-15);
    CHECK(r.estimate.source == EstimateSource::pilot_clean);
  }
}

TEST_CASE("link: calibrated GWN hits the waveform-plane target") {
  StbcLinkConfig cfg;
  cfg.n_subframes = 2;
  interference::InterferenceSource src;
  src.power = 1.0;
  src.seed = 3;
  src.band = waveform::occupied_band(cfg.params);
  cfg.interferers = {src};
  cfg.noise_variance = 1e-6;
  cfg.target_sinr_db = 12.0;
  for (const auto& r : run_stbc_link(cfg)) {
    REQUIRE(r.ok());
    CHECK(r.waveform_sinr.db == doctest::Approx(12.0).epsilon(1e-9));
    CHECK(r.sinr.db == doctest::Approx(12.0).epsilon(0.05));
    // Known-H Alamouti: normalized EVM sits close to 100/sqrt(SINR).
    CHECK(r.evm.normalized_evm_rms == doctest::Approx(100.0 / std::sqrt(r.sinr.linear)).epsilon(0.2));
  }
}

TEST_CASE("link: infeasible targets are skipped, not thrown") {
  StbcLinkConfig cfg;
  cfg.n_subframes = 2;
  cfg.noise_variance = 1.0;
  cfg.signal_power = 1e-3;
  interference::InterferenceSource src;
  src.power = 1.0;
  cfg.interferers = {src};
  cfg.target_sinr_db = 30.0;
  const auto res = run_stbc_link(cfg);
  REQUIRE(res.size() == 2);
  for (const auto& r : res) CHECK(r.skip_reason == "infeasible_sinr");
}

TEST_CASE("link: validation") {
  StbcLinkConfig cfg;
  cfg.n_subframes = 0;
  CHECK(code_of([&] { run_stbc_link(cfg); }) == Errc::validation);
  cfg.n_subframes = 1;
  cfg.mode = EstimationMode::realtime_estimate;
  cfg.n_pilot_pairs = 0;
  CHECK(code_of([&] { run_stbc_link(cfg); }) == Errc::validation);
  cfg.n_pilot_pairs = 10000;
  CHECK(code_of([&] { run_stbc_link(cfg); }) == Errc::capacity);
}
