#ifndef OTALINK_UNCERTAINTY_HPP
#define OTALINK_UNCERTAINTY_HPP

#include <span>
#include <utility>

#include "otalink/metrics.hpp"

namespace otalink::uncertainty {

/// Spectrum-analyser contributions to a channel power reading, in dB.
struct InstrumentTerms {
  double u_fre_resp = 0.38;    // frequency response
  double u_input_att = 0.2;    // input attenuation switching
  double u_abs = 0.24;         // absolute amplitude accuracy
  double u_rbw = 0.03;         // resolution bandwidth switching
  double u_input_mixer = 0.07; // input mixer level linearity

  static constexpr InstrumentTerms zero() { return {0.0, 0.0, 0.0, 0.0, 0.0}; }
  void validate() const;
};

struct RepeatStats {
  double mean = 0.0;
  double std = 0.0;  // n - 1 denominator
  Index n = 0;
  double expanded_k2 = 0.0;
};

enum class Combination { linear_sum, rss };

struct UncertaintyBudget {
  double repeatability_db = 0.0;
  InstrumentTerms terms;
  double total_db = 0.0;
  Combination combination = Combination::linear_sum;
};

RepeatStats repeat_stats(std::span<const double> samples);

/// 10 log10(1 + 2 sigma/mu) plus the instrument terms. The default is the
/// plain sum of the dB contributions; rss is offered for GUM-style work.
UncertaintyBudget channel_power_uncertainty(const RepeatStats& stats, const InstrumentTerms& terms = {},
                                            Combination combination = Combination::linear_sum);

struct TraceableSinr {
  metrics::SinrSample sinr;
  double uncertainty_db = 0.0;
};

/// SINR from mean receive powers; its dB uncertainty combines both budgets
/// (worst-case sum by default).
TraceableSinr traceable_sinr(const RepeatStats& signal, const RepeatStats& interference, double noise_power,
                             const UncertaintyBudget& signal_budget,
                             const UncertaintyBudget& interference_budget,
                             Combination combination = Combination::linear_sum);

}  // namespace otalink::uncertainty

#endif  // OTALINK_UNCERTAINTY_HPP
