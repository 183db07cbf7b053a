// Reference implementations used only by tests. They are written the slow,
// obvious way so they share no code path with the library.
#ifndef OTALINK_TESTS_ORACLES_HPP
#define OTALINK_TESTS_ORACLES_HPP

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using cd = std::complex<double>;
using CVec = Eigen::VectorXcd;

inline constexpr double pi = 3.14159265358979323846;

/// O(N^2) DFT with the 1/sqrt(N) scaling.
inline CVec naive_dft(const CVec& x, int sign = -1) {
  const auto n = x.size();
  CVec y(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    cd acc{};
    for (Eigen::Index t = 0; t < n; ++t)
      acc += x[t] * std::polar(1.0, sign * 2.0 * pi * static_cast<double>(k * t) / static_cast<double>(n));
    y[k] = acc / std::sqrt(static_cast<double>(n));
  }
  return y;
}

inline CVec random_complex(Eigen::Index n, std::mt19937_64& rng, double var = 1.0) {
  std::normal_distribution<double> g(0.0, std::sqrt(var / 2.0));
  CVec v(n);
  for (auto& z : v) z = {g(rng), g(rng)};
  return v;
}

inline double max_rel_err(const CVec& a, const CVec& b) {
  const double scale = std::max(b.cwiseAbs().maxCoeff(), 1e-300);
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

inline double mean_power(const CVec& v) { return v.squaredNorm() / static_cast<double>(v.size()); }

}  // namespace oracle

#endif
