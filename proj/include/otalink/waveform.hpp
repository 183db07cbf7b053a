#ifndef OTALINK_WAVEFORM_HPP
#define OTALINK_WAVEFORM_HPP

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "otalink/types.hpp"

namespace otalink::waveform {

/// Square Gray-coded QAM, unit average power.
enum class ConstellationOrder : int { QPSK = 4, QAM16 = 16, QAM64 = 64, QAM256 = 256 };

int bits_per_symbol(ConstellationOrder order);
ConstellationOrder order_from_int(int m);
/// Full alphabet indexed by the symbol's bit pattern (MSB first).
CVector<double> constellation(ConstellationOrder order);
/// Largest magnitude in the unit-average-power alphabet.
double constellation_peak(ConstellationOrder order);

CVector<double> map_symbols(std::span<const std::uint8_t> bits, ConstellationOrder order);
/// Hard-decision nearest-point demapper.
Bits demap_symbols(const CVector<double>& symbols, ConstellationOrder order);

struct OfdmParams {
  int fft_size = 64;
  int cp_len = 16;
  int active_subcarriers = 48;
  int symbols_per_subframe = 14;
  int pilot_spacing = 6;
  /// Symbol carrying the PSS; negative means the sub-frame has none.
  int pss_symbol_index = 0;
  int pss_root = 25;
  double sample_rate = 960e3;

  int symbol_len() const { return fft_size + cp_len; }
  int frame_len() const { return symbols_per_subframe * symbol_len(); }
  bool has_pss() const { return pss_symbol_index >= 0; }

  void validate() const;

  /// 20 MHz LTE-like numerology.
  static OfdmParams lte20();
};

/// FFT bin of each active subcarrier column. When every bin is active the
/// mapping is the identity; otherwise the band is centered and DC is unused.
std::vector<int> subcarrier_bins(const OfdmParams& params);

/// Band spanned by the active subcarriers, half a bin past the outermost one.
Band occupied_band(const OfdmParams& params);

enum class ReRole : std::uint8_t { null, data, pilot, pss };

/// Resource roles, row-major over [symbol][subcarrier].
struct ResourceLayout {
  int symbols = 0;
  int subcarriers = 0;
  std::vector<ReRole> roles;

  ReRole at(int symbol, int subcarrier) const {
    return roles[static_cast<std::size_t>(symbol) * subcarriers + subcarrier];
  }
  std::size_t count(ReRole role) const;
};

ResourceLayout make_layout(const OfdmParams& params);

struct SymbolFrame {
  CMatrix<double> grid;  // [symbols_per_subframe x active_subcarriers]
  std::vector<ReRole> roles;

  ReRole role(Index symbol, Index subcarrier) const {
    return roles[static_cast<std::size_t>(symbol * grid.cols() + subcarrier)];
  }
  /// Values of every RE with the given role, row-major.
  CVector<double> gather(ReRole role) const;
};

/// Deterministic QPSK pilot sequence for a sub-frame.
CVector<double> pilot_sequence(int subframe_index, Index length);
/// Constant-amplitude Zadoff-Chu style sequence.
CVector<double> pss_sequence(int root, Index length);

IqBuffer ofdm_modulate(const SymbolFrame& frame, const OfdmParams& params);
SymbolFrame ofdm_demodulate(const IqBuffer& buf, const OfdmParams& params);

SymbolFrame build_subframe(std::span<const std::uint8_t> payload_bits, ConstellationOrder order,
                           const OfdmParams& params, int subframe_index);

/// Payload capacity in bits of one sub-frame.
std::size_t data_capacity_bits(const OfdmParams& params, ConstellationOrder order);

// Unitary DFT pair (1/sqrt(N) both ways).
CVector<double> unitary_dft(const CVector<double>& x);
CVector<double> unitary_idft(const CVector<double>& x);

}  // namespace otalink::waveform

#endif  // OTALINK_WAVEFORM_HPP
