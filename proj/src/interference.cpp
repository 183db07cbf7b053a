#include "otalink/interference.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "otalink/channel.hpp"
#include "otalink/error.hpp"
#include "otalink/seed.hpp"

namespace otalink::interference {

namespace {

constexpr double kPi = 3.14159265358979323846;

double ideal_lowpass(double cutoff, double n) {
  if (n == 0.0) return 2.0 * cutoff;
  return std::sin(2.0 * kPi * cutoff * n) / (kPi * n);
}

}  // namespace

Eigen::VectorXd bandpass_taps(Band band, int order) {
  if (!(band.lo >= 0.0 && band.lo < band.hi && band.hi <= 0.5))
    throw Error(Errc::validation, "band must satisfy 0 <= lo < hi <= 0.5");
  if (order < 2 || order % 2 != 0) throw Error(Errc::validation, "FIR order must be even and >= 2");
  Eigen::VectorXd taps(order + 1);
  const double mid = order / 2.0;
  for (int k = 0; k <= order; ++k) {
    const double n = k - mid;
    const double window = 0.54 - 0.46 * std::cos(2.0 * kPi * k / order);
    taps[k] = (ideal_lowpass(band.hi, n) - ideal_lowpass(band.lo, n)) * window;
  }
  return taps;
}

void rescale_to_power(CVector<double>& x, double power) {
  if (!(power >= 0.0)) throw Error(Errc::validation, "power must be non-negative");
  const double current = mean_power(x);
  if (power == 0.0 || current == 0.0) {
    x.setZero();
    return;
  }
  x *= std::sqrt(power / current);
}

IqBuffer gen_gwn_interferer(Index length, double power, Band band, std::uint64_t seed,
                            double sample_rate, int fir_order) {
  const Eigen::VectorXd taps = bandpass_taps(band, fir_order);
  if (!(power >= 0.0)) throw Error(Errc::validation, "power must be non-negative");
  if (length < 0) throw Error(Errc::validation, "negative length");
  IqBuffer out;
  out.sample_rate = sample_rate;
  out.samples = CVector<double>::Zero(length);
  if (power == 0.0 || length == 0) return out;

  // Filter a longer run and keep only fully-overlapped outputs.
  const Index ntaps = taps.size();
  const CVector<double> white = channel::complex_gaussian(length + ntaps - 1, 1.0, seed);
  const Eigen::VectorXd reversed = taps.reverse();
  for (Index n = 0; n < length; ++n)
    out.samples[n] = (white.segment(n, ntaps).array() * reversed.array().cast<cdouble>()).sum();
  rescale_to_power(out.samples, power);
  return out;
}

IqBuffer gen_ofdm_interferer(const waveform::OfdmParams& params, waveform::ConstellationOrder order,
                             double power, Index frame_offset, std::uint64_t seed) {
  params.validate();
  const Index frame = params.frame_len();
  if (frame_offset < 0 || frame_offset >= frame)
    throw Error(Errc::validation, "frame offset " + std::to_string(frame_offset) +
                                      " outside frame of " + std::to_string(frame));
  const std::size_t capacity = waveform::data_capacity_bits(params, order);
  std::mt19937_64 rng(derive_seed(seed, {stream::payload}));
  Bits bits(capacity);
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng() >> 63);
  const auto subframe = static_cast<int>(derive_seed(seed, {stream::pilot}) & 0x3ff);
  const auto grid = waveform::build_subframe(bits, order, params, subframe);
  IqBuffer wave = waveform::ofdm_modulate(grid, params);
  IqBuffer out;
  out.sample_rate = wave.sample_rate;
  out.samples.resize(frame);
  out.samples.head(frame - frame_offset) = wave.samples.tail(frame - frame_offset);
  out.samples.tail(frame_offset) = wave.samples.head(frame_offset);
  rescale_to_power(out.samples, power);
  return out;
}

IqBuffer render_source(const InterferenceSource& src, Index length, Index start, double sample_rate) {
  if (src.kind == SourceKind::gwn_bandpass)
    return gen_gwn_interferer(length, src.power, src.band, src.seed, sample_rate);
  const IqBuffer frame = gen_ofdm_interferer(src.params, src.order, src.power, src.frame_offset, src.seed);
  IqBuffer out;
  out.sample_rate = frame.sample_rate;
  out.samples.resize(length);
  const Index period = frame.size();
  for (Index n = 0; n < length; ++n) out.samples[n] = frame.samples[(start + n) % period];
  return out;
}

double interference_scale_for_sinr(double signal_power, std::span<const double> interferer_powers,
                                   double noise_power, double target_sinr_db) {
  if (!(signal_power > 0.0)) throw Error(Errc::validation, "signal has zero power");
  if (!(noise_power >= 0.0)) throw Error(Errc::validation, "noise power must be non-negative");
  if (interferer_powers.empty() && noise_power == 0.0)
    throw Error(Errc::validation, "need at least one interferer or a noise floor");
  const double total_i = std::accumulate(interferer_powers.begin(), interferer_powers.end(), 0.0);
  const double budget = signal_power / from_db(target_sinr_db) - noise_power;
  if (budget < 0.0)
    throw Error(Errc::infeasible, "target " + std::to_string(target_sinr_db) +
                                      " dB unreachable: noise alone exceeds the budget");
  if (total_i <= 0.0) {
    if (budget == 0.0) return 0.0;
    throw Error(Errc::infeasible, "target " + std::to_string(target_sinr_db) +
                                      " dB unreachable without interference power");
  }
  return std::sqrt(budget / total_i);
}

std::vector<double> calibrate_to_sinr(const IqBuffer& signal, std::span<const IqBuffer> interferers,
                                      double noise_power, double target_sinr_db) {
  std::vector<double> powers;
  powers.reserve(interferers.size());
  for (const auto& b : interferers) powers.push_back(mean_power(b.samples));
  const double s =
      interference_scale_for_sinr(mean_power(signal.samples), powers, noise_power, target_sinr_db);
  return std::vector<double>(interferers.size(), s);
}

}  // namespace otalink::interference
