// tests/test_model.cpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#include "vaemm/model.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include "test_util.hpp"
#include "vaemm/synth.hpp"

using namespace vaemm;

namespace {

MlpSpec constant_mlp(Eigen::Index in, const Eigen::VectorXd& bias) {
  DenseLayer layer;
  layer.weight = Eigen::MatrixXd::Zero(bias.size(), in);
  layer.bias = bias;
  layer.activation = Activation::kIdentity;
  return MlpSpec{{layer}};
}

/// Constant-output toy bundle: both decoders emit exp(bias) everywhere and
/// the prior is (mu0, exp(log_var0)) for every v.
ModelBundle constant_bundle(Eigen::Index l, Eigen::Index m, Eigen::Index f,
                            const Eigen::VectorXd& dec_bias, double mu0, double log_var0) {
  ModelBundle b;
  b.latent_dim = l;
  b.visual_dim = m;
  b.spectrum_dim = f;
  b.decoder_a = constant_mlp(l, dec_bias);
  b.decoder_av = constant_mlp(l + m, dec_bias);
  Eigen::VectorXd prior_bias(2 * l);
  prior_bias.head(l).setConstant(mu0);
  prior_bias.tail(l).setConstant(log_var0);
  b.prior_av = constant_mlp(m, prior_bias);
  return b;
}

/// Plain-loop forward pass, independent of the Eigen implementation.
Eigen::VectorXd forward_oracle(const MlpSpec& mlp, Eigen::VectorXd h) {
  for (const DenseLayer& layer : mlp.layers) {
    Eigen::VectorXd next(layer.weight.rows());
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      double acc = layer.bias[r];
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) acc += layer.weight(r, c) * h[c];
      switch (layer.activation) {
        case Activation::kIdentity: next[r] = acc; break;
        case Activation::kTanh: next[r] = std::tanh(acc); break;
        case Activation::kRelu: next[r] = acc > 0 ? acc : 0.0; break;
      }
    }
    h = next;
  }
  return h;
}

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("model: constant decoder returns exp(bias) for any latent") {
  Eigen::VectorXd bias(3);
  bias << 0.5, -1.0, 2.0;
  const ModelBundle b = constant_bundle(2, 1, 3, bias, 0.0, 0.0);
  Eigen::VectorXd z(2);
  z << 3.0, -7.0;
  const Eigen::VectorXd var = decode_a(b, z);
  for (Eigen::Index f = 0; f < 3; ++f) CHECK(var[f] == doctest::Approx(std::exp(bias[f])));
  Eigen::VectorXd v(1);
  v << 42.0;
  CHECK((decode_av(b, z, v) - var).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("model: hand-built single-layer decoder") {
  // weight [[1], [-1]], zero bias, identity head, z = 0.5
  ModelBundle b;
  b.latent_dim = 1;
  b.visual_dim = 1;
  b.spectrum_dim = 2;
  DenseLayer layer;
  layer.weight.resize(2, 1);
  layer.weight << 1.0, -1.0;
  layer.bias = Eigen::VectorXd::Zero(2);
  b.decoder_a = MlpSpec{{layer}};
  Eigen::VectorXd z(1);
  z << 0.5;
  const Eigen::VectorXd var = decode_a(b, z);
  CHECK(var[0] == doctest::Approx(std::exp(0.5)).epsilon(1e-14));
  CHECK(var[1] == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
}

TEST_CASE("model: forward pass matches an independent dense oracle to 1e-12") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const ModelBundle b = make_toy_bundle(2, 2, 16, 1000 + trial);
    const Eigen::VectorXd z = testutil::random_vector(2, rng);
    const Eigen::VectorXd v = testutil::random_vector(2, rng);

    const Eigen::VectorXd got_a = decode_a(b, z);
    const Eigen::VectorXd want_a = forward_oracle(b.decoder_a, z).array().exp();
    CHECK((got_a - want_a).cwiseAbs().maxCoeff() < 1e-12);

    Eigen::VectorXd zv(4);
    zv << z, v;
    const Eigen::VectorXd got_av = decode_av(b, z, v);
    const Eigen::VectorXd want_av = forward_oracle(b.decoder_av, zv).array().exp();
    CHECK((got_av - want_av).cwiseAbs().maxCoeff() < 1e-12);

    const LatentPrior prior = prior_av(b, v);
    const Eigen::VectorXd want_prior = forward_oracle(b.prior_av, v);
    CHECK((prior.mean - want_prior.head(2)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((prior.log_var - want_prior.tail(2)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("model: decoded variances stay positive and evaluation is deterministic") {
  std::mt19937_64 rng(22);
  const ModelBundle b = make_toy_bundle(2, 2, 8, 77);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::VectorXd z = testutil::random_vector(2, rng, 3.0);
    const Eigen::VectorXd v = testutil::random_vector(2, rng, 3.0);
    const Eigen::VectorXd var = decode_av(b, z, v);
    CHECK(var.minCoeff() > 0.0);
    CHECK((decode_av(b, z, v) - var).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("model: input validation") {
  const ModelBundle b = make_toy_bundle(2, 2, 8, 5);
  Eigen::VectorXd z(2), v(2);
  z.setZero();
  v.setZero();

  SUBCASE("wrong latent length") {
    CHECK_THROWS_AS(decode_a(b, Eigen::VectorXd::Zero(3)), ValidationError);
  }
  SUBCASE("wrong visual length") {
    CHECK_THROWS_AS(decode_av(b, z, Eigen::VectorXd::Zero(1)), ValidationError);
    CHECK_THROWS_AS(prior_av(b, Eigen::VectorXd::Zero(3)), ValidationError);
  }
  SUBCASE("NaN latent is rejected, not propagated") {
    z[0] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(decode_a(b, z), ValidationError);
  }
}

TEST_CASE("model: prior network constants") {
  SUBCASE("zero-weight prior with bias (mu0, log sigma0)") {
    const ModelBundle b = constant_bundle(2, 1, 3, Eigen::VectorXd::Zero(3), 1.5, std::log(0.25));
    Eigen::VectorXd v(1);
    v << -3.0;
    const LatentPrior prior = prior_av(b, v);
    CHECK(prior.mean[0] == doctest::Approx(1.5));
    CHECK(prior.var()[1] == doctest::Approx(0.25));
  }
  SUBCASE("zero mean and zero log-variance encode the standard normal") {
    const ModelBundle b = constant_bundle(2, 1, 3, Eigen::VectorXd::Zero(3), 0.0, 0.0);
    const LatentPrior prior = prior_av(b, Eigen::VectorXd::Ones(1));
    CHECK(prior.mean.cwiseAbs().maxCoeff() == 0.0);
    CHECK((prior.var() - Eigen::VectorXd::Ones(2)).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("model: save/load round trip is field-exact") {
  const std::string path = temp_path("vaemm_model_roundtrip.vaemm.json");
  const ModelBundle b = make_toy_bundle(2, 2, 8, 99, 6, /*with_encoders=*/true);
  save_model(path, b);
  const ModelBundle back = load_model(path);

  CHECK(back.latent_dim == b.latent_dim);
  CHECK(back.visual_dim == b.visual_dim);
  CHECK(back.spectrum_dim == b.spectrum_dim);
  REQUIRE(back.encoder_a.has_value());
  REQUIRE(back.encoder_av.has_value());
  auto same = [](const MlpSpec& x, const MlpSpec& y) {
    REQUIRE(x.layers.size() == y.layers.size());
    for (size_t i = 0; i < x.layers.size(); ++i) {
      CHECK(x.layers[i].weight == y.layers[i].weight);
      CHECK(x.layers[i].bias == y.layers[i].bias);
      CHECK(x.layers[i].activation == y.layers[i].activation);
    }
  };
  same(back.decoder_a, b.decoder_a);
  same(back.decoder_av, b.decoder_av);
  same(back.prior_av, b.prior_av);
  same(*back.encoder_a, *b.encoder_a);
  same(*back.encoder_av, *b.encoder_av);
  std::remove(path.c_str());
}

TEST_CASE("model: loader rejects broken documents") {
  const std::string path = temp_path("vaemm_model_bad.vaemm.json");

  SUBCASE("dimension chain mismatch inside a network") {
    std::ofstream out(path);
    out << R"({"dims": {"latent": 2, "visual": 1, "bins": 1},
      "decoder_a": {"layers": [
        {"rows": 3, "cols": 2, "weight": [0,0,0,0,0,0], "bias": [0,0,0], "activation": "tanh"},
        {"rows": 1, "cols": 4, "weight": [0,0,0,0], "bias": [0], "activation": "identity"}]},
      "decoder_av": {"layers": [
        {"rows": 1, "cols": 3, "weight": [0,0,0], "bias": [0], "activation": "identity"}]},
      "prior_av": {"layers": [
        {"rows": 4, "cols": 1, "weight": [0,0,0,0], "bias": [0,0,0,0], "activation": "identity"}]}})";
    out.close();
    CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("chain"), ValidationError);
  }
  SUBCASE("unknown activation") {
    std::ofstream out(path);
    out << R"({"dims": {"latent": 1, "visual": 1, "bins": 1},
      "decoder_a": {"layers": [{"rows": 1, "cols": 1, "weight": [0], "bias": [0], "activation": "gelu"}]},
      "decoder_av": {"layers": [{"rows": 1, "cols": 2, "weight": [0,0], "bias": [0], "activation": "identity"}]},
      "prior_av": {"layers": [{"rows": 2, "cols": 1, "weight": [0,0], "bias": [0,0], "activation": "identity"}]}})";
    out.close();
    CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("activation"), ValidationError);
  }
  SUBCASE("parse error") {
    std::ofstream out(path);
    out << "{ not json";
    out.close();
    CHECK_THROWS_AS(load_model(path), IoError);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(load_model("/nonexistent.vaemm.json"), IoError); }
  std::remove(path.c_str());
}

TEST_CASE("model: constant decoder loaded from a file evaluates to exp(bias)") {
  const std::string path = temp_path("vaemm_model_const.vaemm.json");
  {
    std::ofstream out(path);
    out << R"({"dims": {"latent": 1, "visual": 1, "bins": 2},
      "decoder_a": {"layers": [{"rows": 2, "cols": 1, "weight": [0,0], "bias": [0.3,-0.2], "activation": "identity"}]},
      "decoder_av": {"layers": [{"rows": 2, "cols": 2, "weight": [0,0,0,0], "bias": [0.3,-0.2], "activation": "identity"}]},
      "prior_av": {"layers": [{"rows": 2, "cols": 1, "weight": [0,0], "bias": [0,0], "activation": "identity"}]}})";
  }
  const ModelBundle b = load_model(path);
  Eigen::VectorXd z(1);
  z << 123.0;
  const Eigen::VectorXd var = decode_a(b, z);
  CHECK(var[0] == doctest::Approx(std::exp(0.3)).epsilon(1e-14));
  CHECK(var[1] == doctest::Approx(std::exp(-0.2)).epsilon(1e-14));
  std::remove(path.c_str());
}
