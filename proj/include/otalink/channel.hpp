#ifndef OTALINK_CHANNEL_HPP
#define OTALINK_CHANNEL_HPP

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "otalink/types.hpp"

namespace otalink::channel {

/// Flat channel for one sub-frame, [n_r x n_t].
struct ChannelMatrix {
  CMatrix<double> h;
  int subframe_index = 0;
};

struct NoiseSpec {
  double variance = 0.0;  // per complex sample
  std::uint64_t seed = 0;
};

struct PrecoderWeights {
  CVector<double> w;

  static PrecoderWeights identity(Index n_t) { return {CVector<double>::Ones(n_t)}; }
};

struct FixedChannel {
  CMatrix<double> h;
};

struct RayleighIid {
  std::uint64_t seed = 0;
};

using ChannelKind = std::variant<FixedChannel, RayleighIid>;

ChannelMatrix gen_channel(const ChannelKind& kind, Index n_r, Index n_t);

/// Circularly-symmetric complex Gaussian samples of the given variance.
CVector<double> complex_gaussian(Index n, double variance, std::uint64_t seed);

/// y_i[n] = sum_j h_ij w_j x_j[n] + n_i[n].
std::vector<IqBuffer> apply_channel(std::span<const IqBuffer> tx, const ChannelMatrix& h,
                                    const PrecoderWeights& w, const NoiseSpec& noise);

}  // namespace otalink::channel

#endif  // OTALINK_CHANNEL_HPP
