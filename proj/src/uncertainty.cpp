#include "otalink/uncertainty.hpp"

#include <cmath>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

namespace otalink::uncertainty {

namespace {

// Correctly rounded sum (Shewchuk partials), so the default term list adds
// to 0.92 with no trailing ulp.
double exact_sum(std::initializer_list<double> values) {
  std::vector<double> partials;
  for (double x : values) {
    std::size_t i = 0;
    for (double y : partials) {
      if (std::abs(x) < std::abs(y)) std::swap(x, y);
      const double hi = x + y;
      const double lo = y - (hi - x);
      if (lo != 0.0) partials[i++] = lo;
      x = hi;
    }
    partials.resize(i);
    partials.push_back(x);
  }
  double total = 0.0;
  if (partials.empty()) return total;
  auto n = partials.size();
  total = partials[--n];
  while (n > 0) {
    const double x = total;
    const double y = partials[--n];
    total = x + y;
    const double lo = y - (total - x);
    if (lo != 0.0) {
      // Half-way case: round using the sign of the next partial.
      if (n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0))) {
        const double y2 = lo * 2.0;
        const double x2 = total + y2;
        if (y2 == x2 - total) total = x2;
      }
      break;
    }
  }
  return total;
}

}  // namespace

void InstrumentTerms::validate() const {
  for (double t : {u_fre_resp, u_input_att, u_abs, u_rbw, u_input_mixer})
    if (!(t >= 0.0)) throw Error(Errc::validation, "instrument terms must be non-negative");
}

RepeatStats repeat_stats(std::span<const double> samples) {
  if (samples.size() < 2)
    throw Error(Errc::insufficient_data, "repeatability needs at least 2 samples, got " +
                                             std::to_string(samples.size()));
  for (double s : samples)
    if (!(s >= 0.0)) throw Error(Errc::validation, "power samples must be non-negative");
  const Eigen::Map<const Eigen::VectorXd> x(samples.data(), static_cast<Index>(samples.size()));
  RepeatStats st;
  st.n = x.size();
  st.mean = x.mean();
  st.std = std::sqrt((x.array() - st.mean).square().sum() / static_cast<double>(st.n - 1));
  st.expanded_k2 = 2.0 * st.std;
  return st;
}

UncertaintyBudget channel_power_uncertainty(const RepeatStats& stats, const InstrumentTerms& terms,
                                            Combination combination) {
  if (!(stats.mean > 0.0)) throw Error(Errc::validation, "mean channel power must be positive");
  if (!(stats.std >= 0.0)) throw Error(Errc::validation, "standard deviation must be non-negative");
  terms.validate();
  UncertaintyBudget b;
  b.terms = terms;
  b.combination = combination;
  b.repeatability_db = 10.0 * std::log10(1.0 + 2.0 * stats.std / stats.mean);
  if (combination == Combination::linear_sum) {
    b.total_db = exact_sum({b.repeatability_db, terms.u_fre_resp, terms.u_input_att, terms.u_abs, terms.u_rbw,
                            terms.u_input_mixer});
  } else {
    b.total_db = std::sqrt(b.repeatability_db * b.repeatability_db + terms.u_fre_resp * terms.u_fre_resp +
                           terms.u_input_att * terms.u_input_att + terms.u_abs * terms.u_abs +
                           terms.u_rbw * terms.u_rbw + terms.u_input_mixer * terms.u_input_mixer);
  }
  return b;
}

TraceableSinr traceable_sinr(const RepeatStats& signal, const RepeatStats& interference, double noise_power,
                             const UncertaintyBudget& signal_budget,
                             const UncertaintyBudget& interference_budget, Combination combination) {
  if (!(signal.mean > 0.0)) throw Error(Errc::validation, "signal mean power must be positive");
  if (!(interference.mean >= 0.0) || !(noise_power >= 0.0))
    throw Error(Errc::validation, "interference and noise powers must be non-negative");
  const double denom = interference.mean + noise_power;
  if (!(denom > 0.0)) throw Error(Errc::undefined_sinr, "zero interference-plus-noise power");
  TraceableSinr out;
  out.sinr = metrics::SinrSample::from_linear(signal.mean / denom, metrics::SinrPlane::waveform);
  out.uncertainty_db = combination == Combination::linear_sum
                           ? signal_budget.total_db + interference_budget.total_db
                           : std::hypot(signal_budget.total_db, interference_budget.total_db);
  return out;
}

}  // namespace otalink::uncertainty
