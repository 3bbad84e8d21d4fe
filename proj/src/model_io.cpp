// vaemm/model_io.cpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#include "vaemm/model.hpp"

#include <fstream>

#include <json.hpp>

namespace vaemm {

namespace {

using nlohmann::json;

json layer_to_json(const DenseLayer& layer) {
  std::vector<double> flat(static_cast<size_t>(layer.weight.size()));
  for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
    for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
      flat[static_cast<size_t>(r * layer.weight.cols() + c)] = layer.weight(r, c);
  return json{{"rows", layer.weight.rows()},
              {"cols", layer.weight.cols()},
              {"weight", flat},
              {"bias", std::vector<double>(layer.bias.begin(), layer.bias.end())},
              {"activation", to_string(layer.activation)}};
}

DenseLayer layer_from_json(const json& j, const std::string& name) {
  DenseLayer layer;
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  require(rows > 0 && cols > 0, name + ": layer dims must be positive");
  const auto flat = j.at("weight").get<std::vector<double>>();
  require(static_cast<Eigen::Index>(flat.size()) == rows * cols,
          name + ": weight array has " + std::to_string(flat.size()) + " entries, expected " +
              std::to_string(rows * cols));
  layer.weight.resize(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) layer.weight(r, c) = flat[static_cast<size_t>(r * cols + c)];
  const auto bias = j.at("bias").get<std::vector<double>>();
  require(static_cast<Eigen::Index>(bias.size()) == rows, name + ": bias length mismatch");
  layer.bias = Eigen::Map<const Eigen::VectorXd>(bias.data(), rows);
  layer.activation = activation_from_string(j.at("activation").get<std::string>());
  return layer;
}

json mlp_to_json(const MlpSpec& mlp) {
  json layers = json::array();
  for (const DenseLayer& layer : mlp.layers) layers.push_back(layer_to_json(layer));
  return json{{"layers", layers}};
}

MlpSpec mlp_from_json(const json& j, const std::string& name) {
  MlpSpec mlp;
  for (const json& jl : j.at("layers")) mlp.layers.push_back(layer_from_json(jl, name));
  validate_mlp(mlp, name);
  return mlp;
}

void check_io(const MlpSpec& mlp, Eigen::Index in, Eigen::Index out, const std::string& name) {
  require(mlp.input_dim() == in, name + ": input dim " + std::to_string(mlp.input_dim()) +
                                     ", expected " + std::to_string(in));
  require(mlp.output_dim() == out, name + ": output dim " + std::to_string(mlp.output_dim()) +
                                       ", expected " + std::to_string(out));
}

}  // namespace

void validate_bundle(const ModelBundle& bundle) {
  require(bundle.latent_dim > 0 && bundle.visual_dim > 0 && bundle.spectrum_dim > 0,
          "model: dims must be positive");
  validate_mlp(bundle.decoder_a, "decoder_a");
  validate_mlp(bundle.decoder_av, "decoder_av");
  validate_mlp(bundle.prior_av, "prior_av");
  check_io(bundle.decoder_a, bundle.latent_dim, bundle.spectrum_dim, "decoder_a");
  check_io(bundle.decoder_av, bundle.latent_dim + bundle.visual_dim, bundle.spectrum_dim,
           "decoder_av");
  check_io(bundle.prior_av, bundle.visual_dim, 2 * bundle.latent_dim, "prior_av");
  if (bundle.encoder_a) {
    validate_mlp(*bundle.encoder_a, "encoder_a");
    check_io(*bundle.encoder_a, bundle.spectrum_dim, 2 * bundle.latent_dim, "encoder_a");
  }
  if (bundle.encoder_av) {
    validate_mlp(*bundle.encoder_av, "encoder_av");
    check_io(*bundle.encoder_av, bundle.spectrum_dim + bundle.visual_dim, 2 * bundle.latent_dim,
             "encoder_av");
  }
}

ModelBundle load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw IoError(path + ": model parse error: " + e.what());
  }
  try {
    ModelBundle bundle;
    const json& dims = j.at("dims");
    bundle.latent_dim = dims.at("latent").get<Eigen::Index>();
    bundle.visual_dim = dims.at("visual").get<Eigen::Index>();
    bundle.spectrum_dim = dims.at("bins").get<Eigen::Index>();
    bundle.decoder_a = mlp_from_json(j.at("decoder_a"), "decoder_a");
    bundle.decoder_av = mlp_from_json(j.at("decoder_av"), "decoder_av");
    bundle.prior_av = mlp_from_json(j.at("prior_av"), "prior_av");
    if (j.contains("encoder_a")) bundle.encoder_a = mlp_from_json(j.at("encoder_a"), "encoder_a");
    if (j.contains("encoder_av"))
      bundle.encoder_av = mlp_from_json(j.at("encoder_av"), "encoder_av");
    validate_bundle(bundle);
    return bundle;
  } catch (const json::exception& e) {
    throw ValidationError(path + ": bad model document: " + e.what());
  }
}

void save_model(const std::string& path, const ModelBundle& bundle) {
  validate_bundle(bundle);
  json j{{"format", "vaemm-model"},
         {"version", 1},
         {"dims",
          {{"latent", bundle.latent_dim}, {"visual", bundle.visual_dim}, {"bins", bundle.spectrum_dim}}},
         {"decoder_a", mlp_to_json(bundle.decoder_a)},
         {"decoder_av", mlp_to_json(bundle.decoder_av)},
         {"prior_av", mlp_to_json(bundle.prior_av)}};
  if (bundle.encoder_a) j["encoder_a"] = mlp_to_json(*bundle.encoder_a);
  if (bundle.encoder_av) j["encoder_av"] = mlp_to_json(*bundle.encoder_av);
  std::ofstream out(path);
  if (!out) throw IoError("cannot open model file for writing: " + path);
  out << j.dump(2) << "\n";
  if (!out) throw IoError("failed writing model file: " + path);
}

}  // namespace vaemm
