#include "otalink/metrics.hpp"

#include <string>
#include <utility>

namespace otalink::metrics {

double channel_power(const IqBuffer& buf, Band band) {
  if (buf.size() == 0) throw Error(Errc::validation, "channel power of an empty buffer");
  if (!(band.lo >= 0.0 && band.lo < band.hi && band.hi <= 0.5))
    throw Error(Errc::validation, "band must satisfy 0 <= lo < hi <= 0.5");
  const Index len = buf.size();
  if (band.lo == 0.0 && band.hi == 0.5) return mean_power(buf.samples);
  const CVector<double> spectrum = waveform::unitary_dft(buf.samples);
  constexpr double eps = 1e-12;
  double in_band = 0.0;
  for (Index k = 0; k < len; ++k) {
    const double f = static_cast<double>(std::min(k, len - k)) / static_cast<double>(len);
    if (f >= band.lo - eps && f <= band.hi + eps) in_band += std::norm(spectrum[k]);
  }
  return in_band / static_cast<double>(len);
}

SinrSample sinr_from_symbols(const CVector<double>& signal, std::span<const CVector<double>> interferers,
                             double noise_power) {
  if (signal.size() == 0) throw Error(Errc::input_shape, "no symbols");
  if (!(noise_power >= 0.0)) throw Error(Errc::validation, "noise power must be non-negative");
  double denom = noise_power;
  for (const auto& j : interferers) {
    if (j.size() != signal.size())
      throw Error(Errc::input_shape, "interferer symbol count differs from signal");
    denom += mean_power(j);
  }
  if (!(denom > 0.0)) throw Error(Errc::undefined_sinr, "zero interference-plus-noise power");
  return SinrSample::from_linear(mean_power(signal) / denom, SinrPlane::symbol);
}

std::vector<SinrSample> sinr_per_demod_symbol(const waveform::SymbolFrame& y_clean,
                                              std::span<const waveform::SymbolFrame> interference,
                                              double noise_power) {
  if (!(noise_power >= 0.0)) throw Error(Errc::validation, "noise power must be non-negative");
  for (const auto& g : interference)
    if (g.grid.rows() != y_clean.grid.rows() || g.grid.cols() != y_clean.grid.cols())
      throw Error(Errc::input_shape, "interference grid shape differs from signal grid");
  if (static_cast<Index>(y_clean.roles.size()) != y_clean.grid.size())
    throw Error(Errc::input_shape, "role mask does not match grid");
  std::vector<SinrSample> out;
  for (Index s = 0; s < y_clean.grid.rows(); ++s) {
    for (Index c = 0; c < y_clean.grid.cols(); ++c) {
      if (y_clean.role(s, c) == waveform::ReRole::null) continue;
      double denom = noise_power;
      for (const auto& g : interference) denom += std::norm(g.grid(s, c));
      if (!(denom > 0.0))
        throw Error(Errc::undefined_sinr, "zero interference-plus-noise power at RE (" +
                                              std::to_string(s) + "," + std::to_string(c) + ")");
      out.push_back(SinrSample::from_linear(std::norm(y_clean.grid(s, c)) / denom, SinrPlane::symbol));
    }
  }
  return out;
}

GradientFit fit_gradient(std::span<const GradientPoint> points, double sinr_floor_db) {
  std::vector<std::pair<double, double>> usable;  // (1/sqrt(SINR), EVM)
  for (const auto& p : points) {
    if (!(p.sinr_linear > 0.0) || !std::isfinite(p.sinr_linear) || !std::isfinite(p.evm_pct)) continue;
    if (!(to_db(p.sinr_linear) > sinr_floor_db)) continue;
    usable.emplace_back(1.0 / std::sqrt(p.sinr_linear), p.evm_pct);
  }
  if (usable.size() < 2)
    throw Error(Errc::insufficient_data,
                std::to_string(usable.size()) + " usable point(s) above the SINR floor, need 2");
  // Fixed summation order makes the fit independent of input order.
  std::sort(usable.begin(), usable.end());
  const auto n = static_cast<Index>(usable.size());
  Eigen::VectorXd x(n), y(n);
  for (Index i = 0; i < n; ++i) {
    x[i] = usable[i].first;
    y[i] = usable[i].second;
  }
  const double sxy = x.dot(y);
  const double syy = y.squaredNorm();
  if (!(syy > 0.0)) throw Error(Errc::insufficient_data, "all EVM values are zero");
  GradientFit fit;
  fit.a = sxy / x.squaredNorm();
  fit.n_points = n;
  fit.sinr_floor_db = sinr_floor_db;
  const double ssr = (y - fit.a * x).squaredNorm();
  fit.r_squared = std::clamp(1.0 - ssr / syy, 0.0, 1.0);
  return fit;
}

}  // namespace otalink::metrics
