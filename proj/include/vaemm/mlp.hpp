// vaemm/mlp.hpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef VAEMM_MLP_HPP_
#define VAEMM_MLP_HPP_

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vaemm/common.hpp"

namespace vaemm {

enum class Activation { kIdentity, kTanh, kRelu };

inline const char* to_string(Activation a) {
  switch (a) {
    case Activation::kIdentity: return "identity";
    case Activation::kTanh: return "tanh";
    case Activation::kRelu: return "relu";
  }
  return "identity";
}

inline Activation activation_from_string(const std::string& name) {
  if (name == "identity") return Activation::kIdentity;
  if (name == "tanh") return Activation::kTanh;
  if (name == "relu") return Activation::kRelu;
  throw ValidationError("unknown activation name: " + name);
}

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
  Activation activation = Activation::kIdentity;
};

struct MlpSpec {
  std::vector<DenseLayer> layers;

  Eigen::Index input_dim() const { return layers.empty() ? 0 : layers.front().weight.cols(); }
  Eigen::Index output_dim() const { return layers.empty() ? 0 : layers.back().weight.rows(); }
};

inline void validate_mlp(const MlpSpec& mlp, const std::string& name) {
  require(!mlp.layers.empty(), name + ": needs at least one layer");
  for (size_t i = 0; i < mlp.layers.size(); ++i) {
    const DenseLayer& layer = mlp.layers[i];
    require(layer.weight.rows() == layer.bias.size(),
            name + ": layer " + std::to_string(i) + " bias size does not match weight rows");
    if (i > 0)
      require(layer.weight.cols() == mlp.layers[i - 1].weight.rows(),
              name + ": layer " + std::to_string(i) + " input dim " +
                  std::to_string(layer.weight.cols()) + " does not chain from previous output " +
                  std::to_string(mlp.layers[i - 1].weight.rows()));
  }
}

template <typename Derived>
Eigen::VectorXd forward(const MlpSpec& mlp, const Eigen::MatrixBase<Derived>& input) {
  Eigen::VectorXd h = input;
  for (const DenseLayer& layer : mlp.layers) {
    h = (layer.weight * h + layer.bias).eval();
    switch (layer.activation) {
      case Activation::kIdentity: break;
      case Activation::kTanh: h = h.array().tanh(); break;
      case Activation::kRelu: h = h.cwiseMax(0.0); break;
    }
  }
  return h;
}

}  // namespace vaemm

#endif  // VAEMM_MLP_HPP_
