#include "otalink/channel.hpp"

#include <random>
#include <string>

#include "otalink/error.hpp"
#include "otalink/seed.hpp"

namespace otalink::channel {

CVector<double> complex_gaussian(Index n, double variance, std::uint64_t seed) {
  if (!(variance >= 0.0)) throw Error(Errc::validation, "noise variance must be non-negative");
  CVector<double> out = CVector<double>::Zero(n);
  if (variance == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, std::sqrt(variance / 2.0));
  for (Index k = 0; k < n; ++k) {
    const double re = gauss(rng);
    out[k] = cdouble(re, gauss(rng));
  }
  return out;
}

ChannelMatrix gen_channel(const ChannelKind& kind, Index n_r, Index n_t) {
  if (n_r < 1 || n_t < 1) throw Error(Errc::validation, "channel dimensions must be at least 1x1");
  ChannelMatrix out;
  if (const auto* fixed = std::get_if<FixedChannel>(&kind)) {
    if (fixed->h.rows() != n_r || fixed->h.cols() != n_t)
      throw Error(Errc::input_shape, "fixed channel is " + std::to_string(fixed->h.rows()) + "x" +
                                         std::to_string(fixed->h.cols()));
    if (!fixed->h.allFinite()) throw Error(Errc::validation, "channel entries must be finite");
    out.h = fixed->h;
    return out;
  }
  const auto& ray = std::get<RayleighIid>(kind);
  out.h = complex_gaussian(n_r * n_t, 1.0, ray.seed).reshaped(n_r, n_t);
  return out;
}

std::vector<IqBuffer> apply_channel(std::span<const IqBuffer> tx, const ChannelMatrix& h,
                                    const PrecoderWeights& w, const NoiseSpec& noise) {
  const Index n_t = h.h.cols();
  const Index n_r = h.h.rows();
  if (static_cast<Index>(tx.size()) != n_t)
    throw Error(Errc::input_shape, std::to_string(tx.size()) + " transmit buffers for " +
                                       std::to_string(n_t) + " channel columns");
  if (w.w.size() != n_t)
    throw Error(Errc::input_shape, "precoder length does not match transmit antennas");
  if (!w.w.allFinite()) throw Error(Errc::validation, "precoder weights must be finite");
  const Index len = tx.front().size();
  for (const auto& b : tx)
    if (b.size() != len) throw Error(Errc::input_shape, "transmit buffers differ in length");

  CMatrix<double> x(n_t, len);
  for (Index j = 0; j < n_t; ++j) x.row(j) = tx[j].samples.transpose();
  const CMatrix<double> y = h.h * w.w.asDiagonal() * x;

  std::vector<IqBuffer> out(static_cast<std::size_t>(n_r));
  for (Index i = 0; i < n_r; ++i) {
    out[i].sample_rate = tx.front().sample_rate;
    out[i].samples = y.row(i).transpose();
    if (noise.variance > 0.0)
      out[i].samples += complex_gaussian(
          len, noise.variance, derive_seed(noise.seed, {stream::noise, static_cast<std::uint64_t>(i)}));
    else if (noise.variance < 0.0)
      throw Error(Errc::validation, "noise variance must be non-negative");
  }
  return out;
}

}  // namespace otalink::channel
