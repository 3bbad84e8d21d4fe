// vaemm/nmf.hpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef VAEMM_NMF_HPP_
#define VAEMM_NMF_HPP_

#include <Eigen/Dense>

#include "vaemm/common.hpp"
#include "vaemm/rng.hpp"

namespace vaemm {

/// Entry floor for the factors and the target power matrix inside the
/// multiplicative updates; keeps the elementwise quotients away from 0/0.
inline constexpr double kNmfFloor = 1e-12;

/// Low-rank noise power model: variance of bin (f, n) is (W H)(f, n).
struct NmfParams {
  Eigen::MatrixXd w;  // F x K, spectral power patterns
  Eigen::MatrixXd h;  // K x N, temporal activations
};

inline NmfParams random_nmf(Eigen::Index f, Eigen::Index k, Eigen::Index n, Rng& rng) {
  std::uniform_real_distribution<double> dist(0.1, 1.1);
  NmfParams params{Eigen::MatrixXd(f, k), Eigen::MatrixXd(k, n)};
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index i = 0; i < f; ++i) params.w(i, j) = dist(rng);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < k; ++i) params.h(i, j) = dist(rng);
  return params;
}

inline Eigen::MatrixXd noise_variance(const NmfParams& params) {
  require(params.w.cols() == params.h.rows(), "nmf: W/H rank mismatch");
  require(params.w.minCoeff() > 0 && params.h.minCoeff() > 0, "nmf: factors must be positive");
  return params.w * params.h;
}

/// Itakura-Saito divergence sum_fn [v/r - log(v/r) - 1]. Entries of `v`
/// are floored so silent bins contribute finitely.
template <typename DerivedV, typename DerivedR>
double is_divergence(const Eigen::MatrixBase<DerivedV>& v, const Eigen::MatrixBase<DerivedR>& r) {
  require(v.rows() == r.rows() && v.cols() == r.cols(), "is_divergence: shape mismatch");
  require(r.minCoeff() > 0, "is_divergence: non-positive reference entry");
  const auto q = (v.derived().array().max(kNmfFloor) / r.derived().array()).eval();
  return (q - q.log() - 1.0).sum();
}

template <typename Derived>
NmfParams update_h(const NmfParams& params, const Eigen::MatrixBase<Derived>& v_power) {
  const Eigen::MatrixXd r = noise_variance(params);
  require(v_power.rows() == r.rows() && v_power.cols() == r.cols(), "update_h: shape mismatch");
  const Eigen::ArrayXXd v = v_power.derived().array().max(kNmfFloor);
  const Eigen::MatrixXd num = params.w.transpose() * (v / r.array().square()).matrix();
  const Eigen::MatrixXd den = params.w.transpose() * r.cwiseInverse();
  NmfParams out{params.w,
                (params.h.array() * num.array() / den.array()).max(kNmfFloor).matrix()};
  return out;
}

template <typename Derived>
NmfParams update_w(const NmfParams& params, const Eigen::MatrixBase<Derived>& v_power) {
  const Eigen::MatrixXd r = noise_variance(params);
  require(v_power.rows() == r.rows() && v_power.cols() == r.cols(), "update_w: shape mismatch");
  const Eigen::ArrayXXd v = v_power.derived().array().max(kNmfFloor);
  const Eigen::MatrixXd num = (v / r.array().square()).matrix() * params.h.transpose();
  const Eigen::MatrixXd den = r.cwiseInverse() * params.h.transpose();
  NmfParams out{(params.w.array() * num.array() / den.array()).max(kNmfFloor).matrix(),
                params.h};
  return out;
}

}  // namespace vaemm

#endif  // VAEMM_NMF_HPP_
