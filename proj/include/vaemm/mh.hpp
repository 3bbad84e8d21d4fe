// vaemm/mh.hpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef VAEMM_MH_HPP_
#define VAEMM_MH_HPP_

#include <cmath>

#include <Eigen/Dense>

#include "vaemm/common.hpp"
#include "vaemm/rng.hpp"

namespace vaemm {

/// Random-walk proposal with covariance epsilon * I; the first `burn_in`
/// states of the chain are discarded.
struct MhConfig {
  int n_iters = 40;
  int burn_in = 30;
  double epsilon = 0.01;
  std::uint64_t seed = 0;
};

inline void validate_mh(const MhConfig& config) {
  require(config.n_iters > 0, "mh: n_iters must be positive");
  require(config.burn_in >= 0 && config.burn_in < config.n_iters,
          "mh: burn_in must satisfy 0 <= burn_in < n_iters");
  require(config.epsilon > 0, "mh: epsilon must be positive");
}

struct LatentSamples {
  Eigen::MatrixXd samples;  // L x D, one retained state per column
  int accepted = 0;
  int proposals = 0;

  Eigen::Index count() const { return samples.cols(); }
  double acceptance_rate() const {
    return proposals > 0 ? static_cast<double>(accepted) / proposals : 0.0;
  }
  Eigen::VectorXd last() const { return samples.col(samples.cols() - 1); }
};

/// One chain of `n_iters` transitions from `init`. The proposal is
/// symmetric, so acceptance uses the bare target ratio
/// min(1, exp(log_target(z') - log_target(z))); a non-finite proposal
/// density rejects. One uniform draw is consumed per transition whatever
/// the outcome, so the generator stream is independent of the trajectory.
template <typename LogTarget, typename Generator = Rng>
LatentSamples mh_sample(LogTarget&& log_target, const Eigen::VectorXd& init,
                        const MhConfig& config, Generator& rng) {
  validate_mh(config);
  const Eigen::Index dim = init.size();
  require(dim > 0, "mh: empty initial state");

  double lp = log_target(init);
  if (!std::isfinite(lp)) throw NumericError("mh: log_target not finite at the initial state");

  const double step = std::sqrt(config.epsilon);
  const int retained = config.n_iters - config.burn_in;

  LatentSamples result;
  result.samples.resize(dim, retained);
  result.proposals = config.n_iters;

  Eigen::VectorXd state = init;
  Eigen::VectorXd proposal(dim);
  for (int m = 0; m < config.n_iters; ++m) {
    for (Eigen::Index i = 0; i < dim; ++i) proposal[i] = state[i] + step * standard_normal(rng);
    const double lp_proposal = log_target(proposal);
    const double u = uniform01(rng);
    if (std::isfinite(lp_proposal) && u < std::exp(std::min(0.0, lp_proposal - lp))) {
      state = proposal;
      lp = lp_proposal;
      ++result.accepted;
    }
    if (m >= config.burn_in) result.samples.col(m - config.burn_in) = state;
  }
  return result;
}

}  // namespace vaemm

#endif  // VAEMM_MH_HPP_
