#include "otalink/waveform.hpp"

#include <algorithm>
#include <random>
#include <string>

#include <unsupported/Eigen/FFT>

#include "otalink/error.hpp"
#include "otalink/seed.hpp"

namespace otalink::waveform {

namespace {

constexpr double kPi = 3.14159265358979323846;

int axis_bits(ConstellationOrder order) { return bits_per_symbol(order) / 2; }

double axis_norm(ConstellationOrder order) {
  const double m = static_cast<double>(order);
  return std::sqrt(2.0 * (m - 1.0) / 3.0);
}

unsigned gray_to_binary(unsigned g) {
  for (unsigned shift = g >> 1; shift != 0; shift >>= 1) g ^= shift;
  return g;
}

// Level index 0 is the most positive amplitude, so an all-zero bit pattern
// lands in the first quadrant.
double axis_amplitude(unsigned gray_bits, int nbits) {
  const unsigned level = gray_to_binary(gray_bits);
  return static_cast<double>((1u << nbits) - 1u) - 2.0 * level;
}

unsigned axis_decide(double scaled, int nbits) {
  const int top = (1 << nbits) - 1;
  int level = static_cast<int>(std::lround((top - scaled) / 2.0));
  level = std::clamp(level, 0, top);
  const auto l = static_cast<unsigned>(level);
  return l ^ (l >> 1);
}

Eigen::FFT<double>& fft_engine() {
  thread_local Eigen::FFT<double> fft = [] {
    Eigen::FFT<double> f;
    f.SetFlag(Eigen::FFT<double>::Unscaled);
    return f;
  }();
  return fft;
}

void require(bool cond, Errc code, const std::string& msg) {
  if (!cond) throw Error(code, msg);
}

}  // namespace

int bits_per_symbol(ConstellationOrder order) {
  switch (order) {
    case ConstellationOrder::QPSK: return 2;
    case ConstellationOrder::QAM16: return 4;
    case ConstellationOrder::QAM64: return 6;
    case ConstellationOrder::QAM256: return 8;
  }
  throw Error(Errc::validation, "unknown constellation order");
}

ConstellationOrder order_from_int(int m) {
  switch (m) {
    case 4: return ConstellationOrder::QPSK;
    case 16: return ConstellationOrder::QAM16;
    case 64: return ConstellationOrder::QAM64;
    case 256: return ConstellationOrder::QAM256;
    default: throw Error(Errc::validation, "unsupported modulation order " + std::to_string(m));
  }
}

CVector<double> constellation(ConstellationOrder order) {
  const int bps = bits_per_symbol(order);
  const int m = axis_bits(order);
  const double norm = axis_norm(order);
  const int size = 1 << bps;
  CVector<double> points(size);
  for (int v = 0; v < size; ++v) {
    const auto u = static_cast<unsigned>(v);
    const unsigned i_bits = u >> m;
    const unsigned q_bits = u & ((1u << m) - 1u);
    points[v] = cdouble(axis_amplitude(i_bits, m), axis_amplitude(q_bits, m)) / norm;
  }
  return points;
}

double constellation_peak(ConstellationOrder order) {
  const int m = axis_bits(order);
  const double a = static_cast<double>((1 << m) - 1);
  return std::sqrt(2.0) * a / axis_norm(order);
}

CVector<double> map_symbols(std::span<const std::uint8_t> bits, ConstellationOrder order) {
  const int bps = bits_per_symbol(order);
  require(bits.size() % static_cast<std::size_t>(bps) == 0, Errc::input_shape,
          "bit count " + std::to_string(bits.size()) + " not divisible by " + std::to_string(bps));
  const int m = bps / 2;
  const double norm = axis_norm(order);
  const auto n = static_cast<Index>(bits.size() / bps);
  CVector<double> out(n);
  for (Index k = 0; k < n; ++k) {
    unsigned i_bits = 0, q_bits = 0;
    for (int b = 0; b < m; ++b) {
      const auto bi = bits[k * bps + b];
      const auto bq = bits[k * bps + m + b];
      require(bi <= 1 && bq <= 1, Errc::validation, "bits must be 0 or 1");
      i_bits = (i_bits << 1) | bi;
      q_bits = (q_bits << 1) | bq;
    }
    out[k] = cdouble(axis_amplitude(i_bits, m), axis_amplitude(q_bits, m)) / norm;
  }
  return out;
}

Bits demap_symbols(const CVector<double>& symbols, ConstellationOrder order) {
  const int bps = bits_per_symbol(order);
  const int m = bps / 2;
  const double norm = axis_norm(order);
  Bits out;
  out.reserve(static_cast<std::size_t>(symbols.size() * bps));
  for (Index k = 0; k < symbols.size(); ++k) {
    const unsigned i_bits = axis_decide(symbols[k].real() * norm, m);
    const unsigned q_bits = axis_decide(symbols[k].imag() * norm, m);
    for (int b = m - 1; b >= 0; --b) out.push_back(static_cast<std::uint8_t>((i_bits >> b) & 1u));
    for (int b = m - 1; b >= 0; --b) out.push_back(static_cast<std::uint8_t>((q_bits >> b) & 1u));
  }
  return out;
}

void OfdmParams::validate() const {
  require(fft_size >= 1, Errc::validation, "fft_size must be positive");
  require(cp_len >= 0 && cp_len <= fft_size, Errc::validation, "cp_len must lie in [0, fft_size]");
  require(active_subcarriers >= 1 && active_subcarriers <= fft_size, Errc::validation,
          "active_subcarriers must lie in [1, fft_size]");
  require(symbols_per_subframe >= 1, Errc::validation, "symbols_per_subframe must be positive");
  require(pilot_spacing >= 1, Errc::validation, "pilot_spacing must be positive");
  require(pss_symbol_index < symbols_per_subframe, Errc::validation,
          "pss_symbol_index outside the sub-frame");
  require(pss_root >= 1, Errc::validation, "pss_root must be positive");
  require(sample_rate > 0.0, Errc::validation, "sample_rate must be positive");
}

OfdmParams OfdmParams::lte20() {
  OfdmParams p;
  p.fft_size = 2048;
  p.cp_len = 144;
  p.active_subcarriers = 1200;
  p.symbols_per_subframe = 14;
  p.pilot_spacing = 6;
  p.pss_symbol_index = 6;
  p.pss_root = 25;
  p.sample_rate = 30.72e6;
  return p;
}

std::vector<int> subcarrier_bins(const OfdmParams& params) {
  params.validate();
  const int n = params.fft_size;
  const int k = params.active_subcarriers;
  std::vector<int> bins(static_cast<std::size_t>(k));
  if (k == n) {
    for (int c = 0; c < k; ++c) bins[c] = c;
    return bins;
  }
  const int n_neg = k / 2;
  for (int c = 0; c < k; ++c) bins[c] = c < n_neg ? n - n_neg + c : 1 + (c - n_neg);
  return bins;
}

Band occupied_band(const OfdmParams& params) {
  params.validate();
  const int k = params.active_subcarriers;
  if (k == params.fft_size) return Band::full();
  const int outer = std::max(k / 2, k - k / 2);
  return {0.0, std::min(0.5, (outer + 0.5) / params.fft_size)};
}

std::size_t ResourceLayout::count(ReRole role) const {
  return static_cast<std::size_t>(std::count(roles.begin(), roles.end(), role));
}

ResourceLayout make_layout(const OfdmParams& params) {
  params.validate();
  ResourceLayout layout;
  layout.symbols = params.symbols_per_subframe;
  layout.subcarriers = params.active_subcarriers;
  layout.roles.assign(static_cast<std::size_t>(layout.symbols) * layout.subcarriers, ReRole::data);
  for (int s = 0; s < layout.symbols; ++s) {
    for (int c = 0; c < layout.subcarriers; ++c) {
      const auto re = static_cast<std::size_t>(s) * layout.subcarriers + c;
      if (s == params.pss_symbol_index)
        layout.roles[re] = ReRole::pss;
      else if (re % static_cast<std::size_t>(params.pilot_spacing) == 0)
        layout.roles[re] = ReRole::pilot;
    }
  }
  return layout;
}

CVector<double> SymbolFrame::gather(ReRole role) const {
  std::vector<cdouble> picked;
  for (Index s = 0; s < grid.rows(); ++s)
    for (Index c = 0; c < grid.cols(); ++c)
      if (this->role(s, c) == role) picked.push_back(grid(s, c));
  return Eigen::Map<const CVector<double>>(picked.data(), static_cast<Index>(picked.size()));
}

CVector<double> pilot_sequence(int subframe_index, Index length) {
  std::mt19937_64 rng(derive_seed(stream::pilot, {static_cast<std::uint64_t>(subframe_index)}));
  Bits bits(static_cast<std::size_t>(2 * length));
  for (Index k = 0; k < length; ++k) {
    const auto v = rng();
    bits[2 * k] = static_cast<std::uint8_t>(v >> 63);
    bits[2 * k + 1] = static_cast<std::uint8_t>((v >> 62) & 1u);
  }
  return map_symbols(bits, ConstellationOrder::QPSK);
}

CVector<double> pss_sequence(int root, Index length) {
  // Odd sequence length keeps the chirp constant-amplitude for any root.
  const Index zc_len = length % 2 == 1 ? length : length + 1;
  CVector<double> seq(length);
  for (Index n = 0; n < length; ++n) {
    const double phase = -kPi * root * static_cast<double>(n * (n + 1)) / static_cast<double>(zc_len);
    seq[n] = std::polar(1.0, phase);
  }
  return seq;
}

CVector<double> unitary_dft(const CVector<double>& x) {
  CVector<double> out(x.size());
  if (x.size() == 0) return out;
  fft_engine().fwd(out, x);
  return out / std::sqrt(static_cast<double>(x.size()));
}

CVector<double> unitary_idft(const CVector<double>& x) {
  CVector<double> out(x.size());
  if (x.size() == 0) return out;
  fft_engine().inv(out, x);
  return out / std::sqrt(static_cast<double>(x.size()));
}

IqBuffer ofdm_modulate(const SymbolFrame& frame, const OfdmParams& params) {
  params.validate();
  require(frame.grid.rows() == params.symbols_per_subframe &&
              frame.grid.cols() == params.active_subcarriers,
          Errc::input_shape,
          "frame grid is " + std::to_string(frame.grid.rows()) + "x" +
              std::to_string(frame.grid.cols()) + ", params expect " +
              std::to_string(params.symbols_per_subframe) + "x" +
              std::to_string(params.active_subcarriers));
  const auto bins = subcarrier_bins(params);
  const int n = params.fft_size;
  const int cp = params.cp_len;
  IqBuffer out;
  out.sample_rate = params.sample_rate;
  out.samples.resize(params.frame_len());
  CVector<double> spectrum(n);
  for (int s = 0; s < params.symbols_per_subframe; ++s) {
    spectrum.setZero();
    for (int c = 0; c < params.active_subcarriers; ++c) spectrum[bins[c]] = frame.grid(s, c);
    const CVector<double> body = unitary_idft(spectrum);
    auto dst = out.samples.segment(static_cast<Index>(s) * params.symbol_len(), params.symbol_len());
    dst.head(cp) = body.tail(cp);
    dst.tail(n) = body;
  }
  return out;
}

SymbolFrame ofdm_demodulate(const IqBuffer& buf, const OfdmParams& params) {
  params.validate();
  require(buf.size() == params.frame_len(), Errc::input_shape,
          "buffer holds " + std::to_string(buf.size()) + " samples, params expect " +
              std::to_string(params.frame_len()));
  const auto bins = subcarrier_bins(params);
  SymbolFrame frame;
  frame.grid.resize(params.symbols_per_subframe, params.active_subcarriers);
  frame.roles = make_layout(params).roles;
  for (int s = 0; s < params.symbols_per_subframe; ++s) {
    const CVector<double> body =
        buf.samples.segment(static_cast<Index>(s) * params.symbol_len() + params.cp_len, params.fft_size);
    const CVector<double> spectrum = unitary_dft(body);
    for (int c = 0; c < params.active_subcarriers; ++c) frame.grid(s, c) = spectrum[bins[c]];
  }
  return frame;
}

std::size_t data_capacity_bits(const OfdmParams& params, ConstellationOrder order) {
  return make_layout(params).count(ReRole::data) * static_cast<std::size_t>(bits_per_symbol(order));
}

SymbolFrame build_subframe(std::span<const std::uint8_t> payload_bits, ConstellationOrder order,
                           const OfdmParams& params, int subframe_index) {
  const ResourceLayout layout = make_layout(params);
  const std::size_t capacity =
      layout.count(ReRole::data) * static_cast<std::size_t>(bits_per_symbol(order));
  require(!payload_bits.empty(), Errc::capacity, "empty payload");
  require(payload_bits.size() <= capacity, Errc::capacity,
          "payload of " + std::to_string(payload_bits.size()) + " bits exceeds capacity " +
              std::to_string(capacity));
  const CVector<double> data = map_symbols(payload_bits, order);
  const CVector<double> pilots =
      pilot_sequence(subframe_index, static_cast<Index>(layout.count(ReRole::pilot)));
  const CVector<double> pss = pss_sequence(params.pss_root, layout.subcarriers);

  SymbolFrame frame;
  frame.grid = CMatrix<double>::Zero(layout.symbols, layout.subcarriers);
  frame.roles = layout.roles;
  Index next_data = 0, next_pilot = 0;
  for (int s = 0; s < layout.symbols; ++s) {
    for (int c = 0; c < layout.subcarriers; ++c) {
      const auto re = static_cast<std::size_t>(s) * layout.subcarriers + c;
      switch (layout.roles[re]) {
        case ReRole::data:
          if (next_data < data.size())
            frame.grid(s, c) = data[next_data++];
          else
            frame.roles[re] = ReRole::null;  // unfilled capacity stays silent
          break;
        case ReRole::pilot: frame.grid(s, c) = pilots[next_pilot++]; break;
        case ReRole::pss: frame.grid(s, c) = pss[c]; break;
        case ReRole::null: break;
      }
    }
  }
  return frame;
}

}  // namespace otalink::waveform
