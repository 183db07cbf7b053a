#ifndef OTALINK_STBC_HPP
#define OTALINK_STBC_HPP

#include <array>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "otalink/channel.hpp"
#include "otalink/error.hpp"
#include "otalink/interference.hpp"
#include "otalink/metrics.hpp"
#include "otalink/types.hpp"
#include "otalink/waveform.hpp"

namespace otalink::stbc {

/// Alamouti code word over two symbol intervals.
template <typename Scalar>
struct StbcPair {
  std::array<std::complex<Scalar>, 2> antenna1;  // [x1, -conj(x2)]
  std::array<std::complex<Scalar>, 2> antenna2;  // [x2,  conj(x1)]
};

/// [y(t1), conj(y(t2))]
template <typename Scalar>
using Stacked = Eigen::Matrix<std::complex<Scalar>, 2, 1>;

template <typename Scalar>
using Matrix2c = Eigen::Matrix<std::complex<Scalar>, 2, 2>;

enum class EstimateSource { known, pilot_clean, pilot_contaminated };

template <typename Scalar>
struct BasicChannelEstimate {
  std::complex<Scalar> h11{};
  std::complex<Scalar> h12{};
  EstimateSource source = EstimateSource::known;
};

using ChannelEstimate = BasicChannelEstimate<double>;

template <typename Scalar>
StbcPair<Scalar> alamouti_encode(std::complex<Scalar> x1, std::complex<Scalar> x2) {
  return {{x1, -std::conj(x2)}, {x2, std::conj(x1)}};
}

/// Equivalent 2x2 channel acting on [x1, x2] to give the stacked vector.
template <typename Scalar>
Matrix2c<Scalar> equivalent_channel(std::complex<Scalar> h11, std::complex<Scalar> h12) {
  Matrix2c<Scalar> h;
  h << h11, h12, std::conj(h12), -std::conj(h11);
  return h;
}

/// Stacked receive vector. Noise and interference are given in the stacked
/// (second entry already conjugated) domain and added after the channel.
template <typename Scalar>
Stacked<Scalar> alamouti_receive(const StbcPair<Scalar>& pair, std::complex<Scalar> h11,
                                 std::complex<Scalar> h12, const std::type_identity_t<Stacked<Scalar>>& noise,
                                 const std::optional<Stacked<Scalar>>& interference = std::nullopt) {
  const std::complex<Scalar> y1 = h11 * pair.antenna1[0] + h12 * pair.antenna2[0];
  const std::complex<Scalar> y2 = h11 * pair.antenna1[1] + h12 * pair.antenna2[1];
  Stacked<Scalar> y(y1, std::conj(y2));
  y += noise;
  if (interference) y += *interference;
  return y;
}

template <typename Scalar>
struct CombineResult {
  Stacked<Scalar> r;
  Scalar gain{};

  Stacked<Scalar> symbols() const { return r / gain; }
};

/// r = H^H y with H built from the estimate; gain = |h11|^2 + |h12|^2.
template <typename Scalar>
CombineResult<Scalar> alamouti_combine(const Stacked<Scalar>& received,
                                       const BasicChannelEstimate<Scalar>& est) {
  const Scalar gain = std::norm(est.h11) + std::norm(est.h12);
  if (!(gain > Scalar(0)) || !std::isfinite(gain))
    throw Error(Errc::degenerate_channel, "channel estimate has zero gain");
  return {equivalent_channel(est.h11, est.h12).adjoint() * received, gain};
}

/// Least-squares channel estimate from known pilot pairs. Each pair gives
/// y1 = x1 h11 + x2 h12 and conj(y2c) = -conj(x2) h11 + conj(x1) h12, whose
/// coefficient matrix has orthogonal columns of energy |x1|^2 + |x2|^2.
template <typename Scalar>
BasicChannelEstimate<Scalar> estimate_channel_pilots(std::span<const Stacked<Scalar>> rx_pilots,
                                                     std::span<const Stacked<Scalar>> known_pilots,
                                                     EstimateSource source = EstimateSource::pilot_clean) {
  if (rx_pilots.size() != known_pilots.size() || rx_pilots.empty())
    throw Error(Errc::input_shape, "pilot observation and reference counts differ");
  Stacked<Scalar> acc = Stacked<Scalar>::Zero();
  Scalar energy = 0;
  for (std::size_t p = 0; p < rx_pilots.size(); ++p) {
    const auto x1 = known_pilots[p][0];
    const auto x2 = known_pilots[p][1];
    Matrix2c<Scalar> a;
    a << x1, x2, -std::conj(x2), std::conj(x1);
    const Stacked<Scalar> b(rx_pilots[p][0], std::conj(rx_pilots[p][1]));
    acc += a.adjoint() * b;
    energy += std::norm(x1) + std::norm(x2);
  }
  if (!(energy > Scalar(0))) throw Error(Errc::estimation, "singular pilot system (all-zero pilots)");
  const Stacked<Scalar> h = acc / energy;
  return {h[0], h[1], source};
}

/// Single pair; contamination, when present, is added to the observation.
template <typename Scalar>
BasicChannelEstimate<Scalar> estimate_channel_pilots(
    const Stacked<Scalar>& rx_pilots, const Stacked<Scalar>& known_pilots,
    const std::optional<Stacked<Scalar>>& contamination = std::nullopt) {
  const Stacked<Scalar> observed = contamination ? Stacked<Scalar>(rx_pilots + *contamination) : rx_pilots;
  return estimate_channel_pilots<Scalar>(
      std::span<const Stacked<Scalar>>(&observed, 1), std::span<const Stacked<Scalar>>(&known_pilots, 1),
      contamination ? EstimateSource::pilot_contaminated : EstimateSource::pilot_clean);
}

// ---------------------------------------------------------------------------
// Sub-frame level 2x1 link.

enum class EstimationMode { known_h, realtime_estimate };

struct StbcLinkConfig {
  waveform::OfdmParams params{};
  waveform::ConstellationOrder order = waveform::ConstellationOrder::QPSK;
  int n_subframes = 1;
  int first_subframe = 0;
  EstimationMode mode = EstimationMode::known_h;
  /// Leading STBC pairs of every sub-frame carry known pilots. They are
  /// transmitted in both modes so matched runs share one layout.
  int n_pilot_pairs = 1;
  /// Fixed 1x2 channel, or i.i.d. Rayleigh redrawn per sub-frame.
  channel::ChannelKind channel = channel::FixedChannel{CMatrix<double>::Constant(1, 2, cdouble(M_SQRT1_2, 0.0))};
  channel::PrecoderWeights precoder = channel::PrecoderWeights::identity(2);
  /// In-band receive channel power for a unit-gain channel.
  double signal_power = 1.0;
  std::vector<interference::InterferenceSource> interferers;
  double noise_variance = 0.0;
  /// When set, interferers get one common scale per sub-frame so the
  /// waveform-plane SINR over the occupied band hits the target.
  std::optional<double> target_sinr_db;
  std::uint64_t seed = 0;
  /// EVM reference magnitude: constellation peak or rms.
  metrics::RefMagnitude evm_reference = metrics::RefMagnitude::peak;
};

struct SubframeResult {
  int subframe_index = 0;
  std::string skip_reason;  // empty when the sub-frame was evaluated
  metrics::EvmReport evm;
  metrics::SinrSample sinr;          // symbol plane, data REs
  metrics::SinrSample waveform_sinr; // occupied-band channel powers
  double channel_power_signal = 0.0;
  double channel_power_interference = 0.0;
  double interference_scale = 1.0;
  ChannelEstimate estimate;
  ChannelEstimate truth;

  bool ok() const { return skip_reason.empty(); }
};

/// Data pairs available per sub-frame after pilots.
Index stbc_data_pairs(const StbcLinkConfig& cfg);

std::vector<SubframeResult> run_stbc_link(const StbcLinkConfig& cfg);

}  // namespace otalink::stbc

#endif  // OTALINK_STBC_HPP
