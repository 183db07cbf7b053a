#ifndef OTALINK_METRICS_HPP
#define OTALINK_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "otalink/error.hpp"
#include "otalink/types.hpp"
#include "otalink/waveform.hpp"

namespace otalink::metrics {

enum class SinrPlane { waveform, symbol };

struct SinrSample {
  double linear = 0.0;
  double db = -std::numeric_limits<double>::infinity();
  SinrPlane plane = SinrPlane::symbol;

  static SinrSample from_linear(double linear, SinrPlane plane) {
    if (!(linear >= 0.0)) throw Error(Errc::validation, "SINR must be non-negative");
    return {linear, to_db(linear), plane};
  }
};

/// Integrated periodogram over |f| in [band.lo, band.hi]. Over the full band
/// this is the mean sample power.
double channel_power(const IqBuffer& buf, Band band = Band::full());

/// mean|S|^2 / (sum_j mean|J_j|^2 + noise).
SinrSample sinr_from_symbols(const CVector<double>& signal, std::span<const CVector<double>> interferers,
                             double noise_power);

/// Per-RE SINR over every non-null RE of the clean grid, row-major.
std::vector<SinrSample> sinr_per_demod_symbol(const waveform::SymbolFrame& y_clean,
                                              std::span<const waveform::SymbolFrame> interference,
                                              double noise_power);

/// What |R_i| means in the per-symbol EVM.
enum class RefMagnitude { peak, rms };

struct EvmOptions {
  RefMagnitude reference = RefMagnitude::peak;
  /// Alphabet peak; falls back to the largest reference magnitude supplied.
  std::optional<double> peak_magnitude;
};

struct EvmReport {
  Eigen::VectorXd evm_per_symbol;  // %
  double mag_err_rms = 0.0;        // %
  double phase_err_rms = 0.0;      // rad
  double evm_rms = 0.0;            // %
  double normalized_evm_rms = 0.0; // %
  Index n_symbol = 0;
};

/// Principal value in (-pi, pi].
inline double wrap_phase(double a) {
  constexpr double pi = 3.14159265358979323846;
  double w = std::remainder(a, 2.0 * pi);
  if (w <= -pi) w += 2.0 * pi;
  return w;
}

template <typename DerivedAct, typename DerivedRef>
EvmReport evm(const Eigen::MatrixBase<DerivedAct>& s_act, const Eigen::MatrixBase<DerivedRef>& s_ref,
              const EvmOptions& options = {}) {
  using std::abs;
  using std::arg;
  if (s_act.size() != s_ref.size() || s_ref.size() == 0)
    throw Error(Errc::input_shape, "EVM needs equal non-empty symbol sequences");
  const auto n = s_ref.size();
  const double ref_energy = s_ref.squaredNorm();
  if (!(ref_energy > 0.0)) throw Error(Errc::validation, "reference symbols have zero power");

  double r = 0.0;
  if (options.reference == RefMagnitude::rms) {
    r = std::sqrt(ref_energy / static_cast<double>(n));
  } else if (options.peak_magnitude) {
    r = *options.peak_magnitude;
  } else {
    r = s_ref.cwiseAbs().maxCoeff();
  }
  if (!(r > 0.0)) throw Error(Errc::validation, "reference magnitude must be positive");

  EvmReport rep;
  rep.n_symbol = n;
  rep.evm_per_symbol.resize(n);
  double err_energy = 0.0, mag_energy = 0.0, phase_sq = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto act = s_act.derived().coeff(i);
    const auto ref = s_ref.derived().coeff(i);
    const double e = abs(act - ref);
    rep.evm_per_symbol[i] = e / r * 100.0;
    err_energy += e * e;
    const double dm = abs(act) - abs(ref);
    mag_energy += dm * dm;
    const double dp = wrap_phase(arg(act) - arg(ref));
    phase_sq += dp * dp;
  }
  const double nd = static_cast<double>(n);
  rep.mag_err_rms = std::sqrt(mag_energy / ref_energy) * 100.0;
  rep.phase_err_rms = std::sqrt(phase_sq / nd);
  rep.evm_rms = std::sqrt(1.0 / nd * (err_energy / ref_energy)) * 100.0;
  rep.normalized_evm_rms = std::sqrt(err_energy / ref_energy) * 100.0;
  return rep;
}

struct GradientPoint {
  double sinr_linear = 0.0;
  double evm_pct = 0.0;
};

struct GradientFit {
  double a = 0.0;
  double r_squared = 0.0;
  Index n_points = 0;
  double sinr_floor_db = -std::numeric_limits<double>::infinity();
};

/// Least-squares fit of EVM = a / sqrt(SINR) through the origin, using only
/// points with SINR strictly above the floor. r_squared is the uncentred
/// coefficient of determination of the no-intercept model.
GradientFit fit_gradient(std::span<const GradientPoint> points,
                         double sinr_floor_db = -std::numeric_limits<double>::infinity());

}  // namespace otalink::metrics

#endif  // OTALINK_METRICS_HPP
