#ifndef OTALINK_TYPES_HPP
#define OTALINK_TYPES_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace otalink {

template <typename Scalar>
using CVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

template <typename Scalar>
using CMatrix = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

using cdouble = std::complex<double>;
using Index = Eigen::Index;
using Bits = std::vector<std::uint8_t>;

/// Complex baseband samples plus the rate they were taken at.
template <typename Scalar>
struct BasicIqBuffer {
  CVector<Scalar> samples;
  double sample_rate = 0.0;

  Index size() const { return samples.size(); }
};

using IqBuffer = BasicIqBuffer<double>;

/// Two-sided passband given as |f| in [lo, hi], in cycles per sample.
struct Band {
  double lo = 0.0;
  double hi = 0.5;

  static constexpr Band full() { return {0.0, 0.5}; }
  /// Fraction of the sample rate covered by both mirror halves.
  double fraction() const { return 2.0 * (hi - lo); }
};

template <typename Derived>
typename Derived::RealScalar mean_power(const Eigen::MatrixBase<Derived>& x) {
  if (x.size() == 0) return 0;
  return x.squaredNorm() / static_cast<typename Derived::RealScalar>(x.size());
}

inline double to_db(double linear) { return 10.0 * std::log10(linear); }
inline double from_db(double db) { return std::pow(10.0, db / 10.0); }

/// Sample power |v|^2 across a reference impedance for a level in dBm.
inline double dbm_to_sample_power(double dbm, double impedance_ohm) {
  return impedance_ohm * std::pow(10.0, (dbm - 30.0) / 10.0);
}

inline double sample_power_to_dbm(double power, double impedance_ohm) {
  return 10.0 * std::log10(power / impedance_ohm) + 30.0;
}

}  // namespace otalink

#endif  // OTALINK_TYPES_HPP
