// vaemm/model.hpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef VAEMM_MODEL_HPP_
#define VAEMM_MODEL_HPP_

#include <optional>
#include <string>

#include <Eigen/Dense>

#include "vaemm/mlp.hpp"

namespace vaemm {

/// The generative networks used at inference time. Decoders emit
/// log-variances; the prior network emits [mean; log-variance]. Encoders
/// (optional, for latent initialization) emit [mean; log-variance] of the
/// approximate posterior and take the frame power spectrum as audio input.
struct ModelBundle {
  Eigen::Index latent_dim = 0;    // L
  Eigen::Index visual_dim = 0;    // M
  Eigen::Index spectrum_dim = 0;  // F

  MlpSpec decoder_a;   // R^L -> R^F
  MlpSpec decoder_av;  // R^(L+M) -> R^F
  MlpSpec prior_av;    // R^M -> R^(2L)
  std::optional<MlpSpec> encoder_a;   // R^F -> R^(2L)
  std::optional<MlpSpec> encoder_av;  // R^(F+M) -> R^(2L)
};

struct LatentPrior {
  Eigen::VectorXd mean;     // R^L
  Eigen::VectorXd log_var;  // R^L
  Eigen::VectorXd var() const { return log_var.array().exp(); }
};

void validate_bundle(const ModelBundle& bundle);

ModelBundle load_model(const std::string& path);
void save_model(const std::string& path, const ModelBundle& bundle);

namespace detail {
template <typename Derived>
void check_input(const Eigen::MatrixBase<Derived>& x, Eigen::Index expected, const char* what) {
  require(x.size() == expected, std::string(what) + ": input length " + std::to_string(x.size()) +
                                    ", expected " + std::to_string(expected));
  require(x.allFinite(), std::string(what) + ": non-finite input");
}
}  // namespace detail

/// Raw log-variance heads; the sampler works on these directly so that a
/// wild network output becomes -inf density instead of an exception.
template <typename Derived>
Eigen::VectorXd log_var_a(const ModelBundle& bundle, const Eigen::MatrixBase<Derived>& z) {
  detail::check_input(z, bundle.latent_dim, "log_var_a");
  return forward(bundle.decoder_a, z);
}

template <typename DerivedZ, typename DerivedV>
Eigen::VectorXd log_var_av(const ModelBundle& bundle, const Eigen::MatrixBase<DerivedZ>& z,
                           const Eigen::MatrixBase<DerivedV>& v) {
  detail::check_input(z, bundle.latent_dim, "log_var_av");
  detail::check_input(v, bundle.visual_dim, "log_var_av");
  Eigen::VectorXd zv(bundle.latent_dim + bundle.visual_dim);
  zv << z, v;
  return forward(bundle.decoder_av, zv);
}

template <typename Derived>
Eigen::VectorXd decode_a(const ModelBundle& bundle, const Eigen::MatrixBase<Derived>& z) {
  Eigen::VectorXd var = log_var_a(bundle, z).array().exp();
  if (!var.allFinite()) throw NumericError("decode_a: non-finite variance output");
  return var;
}

template <typename DerivedZ, typename DerivedV>
Eigen::VectorXd decode_av(const ModelBundle& bundle, const Eigen::MatrixBase<DerivedZ>& z,
                          const Eigen::MatrixBase<DerivedV>& v) {
  Eigen::VectorXd var = log_var_av(bundle, z, v).array().exp();
  if (!var.allFinite()) throw NumericError("decode_av: non-finite variance output");
  return var;
}

template <typename Derived>
LatentPrior prior_av(const ModelBundle& bundle, const Eigen::MatrixBase<Derived>& v) {
  detail::check_input(v, bundle.visual_dim, "prior_av");
  const Eigen::VectorXd out = forward(bundle.prior_av, v);
  LatentPrior prior{out.head(bundle.latent_dim), out.tail(bundle.latent_dim)};
  if (!prior.mean.allFinite() || !prior.log_var.allFinite())
    throw NumericError("prior_av: non-finite prior output");
  return prior;
}

/// Posterior mean from an encoder head (first L of the 2L outputs).
template <typename Derived>
Eigen::VectorXd encode_mean(const MlpSpec& encoder, Eigen::Index latent_dim,
                            const Eigen::MatrixBase<Derived>& input) {
  detail::check_input(input, encoder.input_dim(), "encode_mean");
  return forward(encoder, input).head(latent_dim);
}

}  // namespace vaemm

#endif  // VAEMM_MODEL_HPP_
