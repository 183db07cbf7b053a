#ifndef OTALINK_INTERFERENCE_HPP
#define OTALINK_INTERFERENCE_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "otalink/types.hpp"
#include "otalink/waveform.hpp"

namespace otalink::interference {

enum class SourceKind { gwn_bandpass, ofdm_lte_like };

struct InterferenceSource {
  SourceKind kind = SourceKind::gwn_bandpass;
  double power = 0.0;  // linear, mean |sample|^2
  std::uint64_t seed = 0;
  Index frame_offset = 0;  // ofdm only
  Band band = Band::full();  // gwn only
  waveform::OfdmParams params{};  // ofdm only
  waveform::ConstellationOrder order = waveform::ConstellationOrder::QPSK;  // ofdm only
};

inline constexpr int kDefaultFirOrder = 128;

/// Hamming-windowed sinc bandpass, linear phase, order + 1 real taps.
Eigen::VectorXd bandpass_taps(Band band, int order = kDefaultFirOrder);

/// Scales a buffer so its mean sample power is exactly `power`.
void rescale_to_power(CVector<double>& x, double power);

IqBuffer gen_gwn_interferer(Index length, double power, Band band, std::uint64_t seed,
                            double sample_rate = 1.0, int fir_order = kDefaultFirOrder);

/// One CP-OFDM frame with random payload, circularly shifted by frame_offset.
IqBuffer gen_ofdm_interferer(const waveform::OfdmParams& params, waveform::ConstellationOrder order,
                             double power, Index frame_offset, std::uint64_t seed);

/// Waveform for a source, `length` samples long. An OFDM source loops its
/// frame when the window is longer than one frame; `start` is the window
/// position along that loop.
IqBuffer render_source(const InterferenceSource& src, Index length, Index start = 0,
                       double sample_rate = 1.0);

/// Common amplitude scale s with P_S / (s^2 sum P_I + noise) = target.
double interference_scale_for_sinr(double signal_power, std::span<const double> interferer_powers,
                                   double noise_power, double target_sinr_db);

/// Same as above with powers measured as mean |sample|^2; one factor per
/// interferer (all equal).
std::vector<double> calibrate_to_sinr(const IqBuffer& signal, std::span<const IqBuffer> interferers,
                                      double noise_power, double target_sinr_db);

}  // namespace otalink::interference

#endif  // OTALINK_INTERFERENCE_HPP
