// tests/test_util.hpp
//
// Independent little oracles shared by the unit and acceptance suites.
// Everything here is deliberately written with plain loops, separate from
// the library implementation paths it checks.

#ifndef VAEMM_TESTS_TEST_UTIL_HPP_
#define VAEMM_TESTS_TEST_UTIL_HPP_

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <Eigen/Dense>

namespace testutil {

/// O(n^2) DFT of a real frame; reference for the FFT path.
inline Eigen::VectorXcd naive_dft(const Eigen::VectorXd& frame) {
  const Eigen::Index n = frame.size();
  Eigen::VectorXcd bins(n / 2 + 1);
  for (Eigen::Index k = 0; k < bins.size(); ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (Eigen::Index t = 0; t < n; ++t) {
      const double phase = -2.0 * std::numbers::pi * static_cast<double>(k * t) / static_cast<double>(n);
      acc += frame[t] * std::complex<double>(std::cos(phase), std::sin(phase));
    }
    bins[k] = acc;
  }
  return bins;
}

inline Eigen::VectorXd random_vector(Eigen::Index n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = scale * dist(rng);
  return v;
}

inline Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng,
                                     double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = scale * dist(rng);
  return m;
}

inline Eigen::MatrixXd random_positive_matrix(Eigen::Index r, Eigen::Index c,
                                              std::mt19937_64& rng, double lo = 0.1,
                                              double hi = 1.1) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = dist(rng);
  return m;
}

inline Eigen::VectorXcd random_complex_vector(Eigen::Index n, std::mt19937_64& rng,
                                              double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = std::complex<double>(scale * dist(rng), scale * dist(rng));
  return v;
}

inline double relative_l2(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).norm() / b.norm();
}

}  // namespace testutil

#endif  // VAEMM_TESTS_TEST_UTIL_HPP_
