#include <doctest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "support.hpp"
#include "otalink/interference.hpp"
#include "otalink/metrics.hpp"

using namespace otalink;
using namespace otalink::metrics;

namespace {

CVector<double> with_power(Index n, double power, std::mt19937_64& rng) {
  CVector<double> v = oracle::random_complex(n, rng);
  return v * std::sqrt(power / oracle::mean_power(v));
}

std::vector<GradientPoint> on_line(double a, const std::vector<double>& sinr_db) {
  std::vector<GradientPoint> pts;
  for (double d : sinr_db) pts.push_back({from_db(d), a / std::sqrt(from_db(d))});
  return pts;
}

}  // namespace

TEST_CASE("channel power: constant and zero buffers") {
  IqBuffer two{CVector<double>::Constant(256, cdouble(2.0, 0.0)), 1.0};
  CHECK(channel_power(two) == doctest::Approx(4.0).epsilon(1e-12));
  IqBuffer zero{CVector<double>::Zero(256), 1.0};
  CHECK(channel_power(zero) == 0.0);
  IqBuffer empty{CVector<double>(0), 1.0};
  CHECK(code_of([&] { channel_power(empty); }) == Errc::validation);
}

TEST_CASE("channel power: full band equals mean power for any buffer") {
  std::mt19937_64 rng(2);
  IqBuffer b{oracle::random_complex(1000, rng), 1.0};
  CHECK(channel_power(b) == doctest::Approx(oracle::mean_power(b.samples)).epsilon(1e-12));
}

TEST_CASE("channel power: a tone is counted only inside its band") {
  const Index n = 128;
  IqBuffer tone{CVector<double>(n), 1.0};
  for (Index t = 0; t < n; ++t) tone.samples[t] = std::polar(1.0, 2.0 * oracle::pi * 16.0 * t / n);
  CHECK(channel_power(tone, {0.1, 0.2}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(channel_power(tone, {0.2, 0.3}) < 1e-20);
}

TEST_CASE("channel power: half-band GWN keeps 99% in band") {
  const Band half{0.0, 0.25};
  const auto b = interference::gen_gwn_interferer(100000, 1.0, half, 31);
  CHECK(channel_power(b, half) >= 0.99 * channel_power(b));
}

TEST_CASE("symbol SINR examples") {
  std::mt19937_64 rng(1);
  const auto s = with_power(1000, 1.0, rng);
  const std::vector<CVector<double>> one{with_power(1000, 0.1, rng)};
  const auto r = sinr_from_symbols(s, one, 0.01);
  CHECK(r.linear == doctest::Approx(1.0 / 0.11).epsilon(1e-12));
  CHECK(r.db == doctest::Approx(9.586).epsilon(1e-4));
  CHECK(r.plane == SinrPlane::symbol);
  CHECK(std::abs(r.db - 10.0 * std::log10(r.linear)) < 1e-12);

  CHECK(code_of([&] { sinr_from_symbols(s, std::vector<CVector<double>>{}, 0.0); }) == Errc::undefined_sinr);

  const double p = 0.05;
  const std::vector<CVector<double>> three{with_power(1000, p, rng), with_power(1000, p, rng), with_power(1000, p, rng)};
  CHECK(sinr_from_symbols(s, three, 0.0).linear == doctest::Approx(1.0 / (3.0 * p)).epsilon(1e-12));
}

TEST_CASE("symbol SINR drops when any interferer is added") {
  std::mt19937_64 rng(4);
  const auto s = with_power(100, 1.0, rng);
  std::vector<CVector<double>> intf;
  double prev = sinr_from_symbols(s, intf, 1e-3).linear;
  for (int j = 0; j < 4; ++j) {
    intf.push_back(with_power(100, 1e-6 * (j + 1), rng));
    const double now = sinr_from_symbols(s, intf, 1e-3).linear;
    CHECK(now < prev);
    prev = now;
  }
  const std::vector<CVector<double>> bad{CVector<double>::Zero(99)};
  CHECK(code_of([&] { sinr_from_symbols(s, bad, 0.1); }) == Errc::input_shape);
}

TEST_CASE("per-RE SINR") {
  waveform::SymbolFrame clean;
  clean.grid = CMatrix<double>::Constant(3, 4, cdouble(0.0, 1.0));
  clean.roles.assign(12, waveform::ReRole::data);
  waveform::SymbolFrame zero;
  zero.grid = CMatrix<double>::Zero(3, 4);
  zero.roles = clean.roles;
  const std::vector<waveform::SymbolFrame> zeros{zero};
  for (const auto& s : sinr_per_demod_symbol(clean, zeros, 1.0)) CHECK(s.linear == doctest::Approx(1.0));

  std::mt19937_64 rng(5);
  clean.grid = oracle::random_complex(12, rng).reshaped(3, 4);
  std::vector<waveform::SymbolFrame> intf(2, zero);
  intf[0].grid = oracle::random_complex(12, rng).reshaped(3, 4);
  intf[1].grid = oracle::random_complex(12, rng).reshaped(3, 4);
  const double noise = 0.3;
  const auto per = sinr_per_demod_symbol(clean, intf, noise);
  REQUIRE(per.size() == 12);
  double denom_mean = 0.0;
  for (int s = 0; s < 3; ++s)
    for (int c = 0; c < 4; ++c) {
      const double d = std::norm(intf[0].grid(s, c)) + std::norm(intf[1].grid(s, c)) + noise;
      denom_mean += d;
      CHECK(per[static_cast<std::size_t>(s * 4 + c)].linear ==
            doctest::Approx(std::norm(clean.grid(s, c)) / d).epsilon(1e-12));
    }
  denom_mean /= 12.0;
  const std::vector<CVector<double>> flat{intf[0].grid.reshaped<Eigen::RowMajor>(), intf[1].grid.reshaped<Eigen::RowMajor>()};
  const CVector<double> sflat = clean.grid.reshaped<Eigen::RowMajor>();
  const auto agg = sinr_from_symbols(sflat, flat, noise);
  CHECK(oracle::mean_power(sflat) / agg.linear == doctest::Approx(denom_mean).epsilon(1e-12));

  waveform::SymbolFrame small;
  small.grid = CMatrix<double>::Zero(2, 4);
  const std::vector<waveform::SymbolFrame> mismatched{small};
  CHECK(code_of([&] { sinr_per_demod_symbol(clean, mismatched, 0.1); }) == Errc::input_shape);
}

TEST_CASE("EVM of identical sequences is zero") {
  std::mt19937_64 rng(6);
  const auto ref = oracle::random_complex(64, rng);
  const auto r = evm(ref, ref);
  CHECK(r.evm_rms == 0.0);
  CHECK(r.normalized_evm_rms == 0.0);
  CHECK(r.mag_err_rms == 0.0);
  CHECK(r.phase_err_rms == 0.0);
  CHECK(r.evm_per_symbol.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("EVM single symbol by hand") {
  CVector<double> act(1), ref(1);
  act << cdouble(1.1, 0.0);
  ref << cdouble(1.0, 0.0);
  const auto r = evm(act, ref);
  CHECK(r.normalized_evm_rms == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(r.evm_rms == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(r.mag_err_rms == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(r.phase_err_rms == 0.0);
  CHECK(r.evm_per_symbol[0] == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("EVM identity between the unnormalized and normalized forms") {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 100; ++t) {
    const Index n = 1 + static_cast<Index>(rng() % 500);
    const auto ref = oracle::random_complex(n, rng);
    const CVector<double> act = ref + oracle::random_complex(n, rng, 0.1);
    const auto r = evm(act, ref);
    CHECK(std::abs(r.evm_rms * std::sqrt(static_cast<double>(n)) / r.normalized_evm_rms - 1.0) < 1e-12);
  }
}

TEST_CASE("EVM phase is wrapped and the per-symbol reference is selectable") {
  CVector<double> act(1), ref(1);
  ref << std::polar(1.0, oracle::pi - 0.1);
  act << std::polar(1.0, -oracle::pi + 0.1);
  CHECK(evm(act, ref).phase_err_rms == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(wrap_phase(oracle::pi) == doctest::Approx(oracle::pi));
  CHECK(wrap_phase(-oracle::pi) == doctest::Approx(oracle::pi));

  CVector<double> r2(2), a2(2);
  r2 << cdouble(1.0, 0.0), cdouble(3.0, 0.0);
  a2 << cdouble(1.5, 0.0), cdouble(3.0, 0.0);
  CHECK(evm(a2, r2).evm_per_symbol[0] == doctest::Approx(0.5 / 3.0 * 100.0));
  CHECK(evm(a2, r2, {RefMagnitude::peak, 5.0}).evm_per_symbol[0] == doctest::Approx(10.0));
  CHECK(evm(a2, r2, {RefMagnitude::rms, {}}).evm_per_symbol[0] == doctest::Approx(0.5 / std::sqrt(5.0) * 100.0));
}

TEST_CASE("EVM errors") {
  const CVector<double> zero = CVector<double>::Zero(4);
  const CVector<double> one = CVector<double>::Ones(4);
  CHECK(code_of([&] { evm(one, zero); }) == Errc::validation);
  CHECK(code_of([&] { evm(one, CVector<double>(CVector<double>::Ones(3))); }) == Errc::input_shape);
}

TEST_CASE("EVM under Gaussian error of variance 0.01 is 10%") {
  std::mt19937_64 rng(8);
  const Index n = 100000;
  CVector<double> ref(n);
  const auto alpha = waveform::constellation(waveform::ConstellationOrder::QAM16);
  for (auto& z : ref) z = alpha[static_cast<Index>(rng() % 16)];
  ref *= std::sqrt(1.0 / oracle::mean_power(ref));
  const CVector<double> act = ref + oracle::random_complex(n, rng, 0.01);
  CHECK(std::abs(evm(act, ref).normalized_evm_rms - 10.0) < 0.2);
}

TEST_CASE("gradient fit recovers exact lines") {
  const auto pts = on_line(93.3, {0, 5, 10, 15, 20, 25, 30});
  const auto f = fit_gradient(pts);
  CHECK(std::abs(f.a - 93.3) < 1e-9);
  CHECK(f.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.n_points == 7);

  const std::vector<GradientPoint> two{{1.0, 50.0}, {4.0, 25.0}};
  CHECK(fit_gradient(two).a == doctest::Approx(50.0).epsilon(1e-12));
}

TEST_CASE("gradient fit with 1% multiplicative noise") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0.0, 0.01);
  std::vector<GradientPoint> pts;
  for (int i = 0; i < 50; ++i) {
    const double sinr = from_db(30.0 * i / 49.0);
    pts.push_back({sinr, 100.0 / std::sqrt(sinr) * (1.0 + g(rng))});
  }
  const auto f = fit_gradient(pts);
  CHECK(std::abs(f.a - 100.0) < 0.5);
  CHECK(f.r_squared > 0.999);
}

TEST_CASE("gradient fit invariances") {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  std::vector<GradientPoint> pts;
  for (int i = 0; i < 40; ++i) {
    const double sinr = from_db(-5.0 + i);
    pts.push_back({sinr, 80.0 / std::sqrt(sinr) * u(rng)});
  }
  const auto base = fit_gradient(pts);
  auto scaled = pts;
  for (auto& p : scaled) p.evm_pct *= 4.0;
  const auto fs = fit_gradient(scaled);
  CHECK(fs.a == 4.0 * base.a);
  CHECK(fs.r_squared == doctest::Approx(base.r_squared).epsilon(1e-14));
  for (int t = 0; t < 5; ++t) {
    auto perm = pts;
    std::shuffle(perm.begin(), perm.end(), rng);
    const auto fp = fit_gradient(perm);
    CHECK(fp.a == base.a);
    CHECK(fp.r_squared == base.r_squared);
  }
  CHECK(base.r_squared >= 0.0);
  CHECK(base.r_squared <= 1.0);
}

TEST_CASE("gradient fit floor and insufficient data") {
  auto pts = on_line(100.0, {-10, -5, 0, 5, 10});
  pts[0].evm_pct = 1000.0;  // below the floor, must be ignored
  const auto f = fit_gradient(pts, -7.0);
  CHECK(f.n_points == 4);
  CHECK(f.a == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(f.sinr_floor_db == -7.0);
  CHECK(code_of([&] { fit_gradient(pts, 7.0); }) == Errc::insufficient_data);
  const std::vector<GradientPoint> zeros{{1.0, 0.0}, {2.0, 0.0}};
  CHECK(code_of([&] { fit_gradient(zeros); }) == Errc::insufficient_data);
}
