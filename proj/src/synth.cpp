// vaemm/synth.cpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#include "vaemm/synth.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "vaemm/wav.hpp"

namespace vaemm {

namespace {

MlpSpec random_mlp(Eigen::Index in, Eigen::Index hidden, Eigen::Index out, Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  auto fill = [&](Eigen::Index rows, Eigen::Index cols, Activation act) {
    DenseLayer layer;
    layer.weight.resize(rows, cols);
    layer.bias.resize(rows);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) layer.weight(r, c) = 0.5 * dist(rng);
    for (Eigen::Index r = 0; r < rows; ++r) layer.bias[r] = 0.5 * dist(rng);
    layer.activation = act;
    return layer;
  };
  MlpSpec mlp;
  mlp.layers.push_back(fill(hidden, in, Activation::kTanh));
  mlp.layers.push_back(fill(out, hidden, Activation::kIdentity));
  return mlp;
}

}  // namespace

ModelBundle make_toy_bundle(Eigen::Index latent_dim, Eigen::Index visual_dim,
                            Eigen::Index spectrum_dim, std::uint64_t seed,
                            Eigen::Index hidden_dim, bool with_encoders) {
  ModelBundle bundle;
  bundle.latent_dim = latent_dim;
  bundle.visual_dim = visual_dim;
  bundle.spectrum_dim = spectrum_dim;
  Rng rng(derive_seed(seed, 0x746f79ULL));
  bundle.decoder_a = random_mlp(latent_dim, hidden_dim, spectrum_dim, rng);
  bundle.decoder_av = random_mlp(latent_dim + visual_dim, hidden_dim, spectrum_dim, rng);
  bundle.prior_av = random_mlp(visual_dim, hidden_dim, 2 * latent_dim, rng);
  if (with_encoders) {
    bundle.encoder_a = random_mlp(spectrum_dim, hidden_dim, 2 * latent_dim, rng);
    bundle.encoder_av = random_mlp(spectrum_dim + visual_dim, hidden_dim, 2 * latent_dim, rng);
  }
  validate_bundle(bundle);
  return bundle;
}

SyntheticScene generate_scene(const ModelBundle& bundle, const NmfParams& nmf_true,
                              double pi_true, Eigen::Index n_frames, std::uint64_t seed,
                              const StftParams& params, int sample_rate) {
  validate_bundle(bundle);
  validate_params(params);
  require(n_frames >= 1, "scene: n_frames must be positive");
  require(pi_true >= 0.0 && pi_true <= 1.0, "scene: pi_true must be in [0, 1]");
  require(num_bins(params) == bundle.spectrum_dim,
          "scene: stft bins do not match the model spectrum dim");
  require(nmf_true.w.rows() == bundle.spectrum_dim && nmf_true.h.cols() == n_frames,
          "scene: NMF factor shapes do not match F x N");

  const Eigen::Index f_dim = bundle.spectrum_dim;
  const Eigen::Index l_dim = bundle.latent_dim;
  const Eigen::Index m_dim = bundle.visual_dim;

  SyntheticScene scene;
  scene.bundle = bundle;
  scene.nmf = nmf_true;
  scene.pi_true = pi_true;
  scene.seed = seed;

  Rng rng(derive_seed(seed, 0x7363656eULL));
  std::normal_distribution<double> normal(0.0, 1.0);

  scene.embeddings.resize(n_frames, m_dim);
  for (Eigen::Index n = 0; n < n_frames; ++n)
    for (Eigen::Index j = 0; j < m_dim; ++j) scene.embeddings(n, j) = normal(rng);
  scene.embeddings_corrupted = scene.embeddings;
  scene.corruption_mask = Eigen::VectorXi::Zero(n_frames);

  scene.alpha.resize(n_frames);
  scene.z.resize(l_dim, n_frames);
  Eigen::MatrixXcd s(f_dim, n_frames), b(f_dim, n_frames);

  for (Eigen::Index n = 0; n < n_frames; ++n) {
    const int alpha_n = uniform01(rng) < pi_true ? 1 : 0;
    scene.alpha[n] = alpha_n;

    Eigen::VectorXd z_n(l_dim);
    if (alpha_n == 1) {
      for (Eigen::Index l = 0; l < l_dim; ++l) z_n[l] = normal(rng);
    } else {
      const LatentPrior prior = prior_av(bundle, Eigen::VectorXd(scene.embeddings.row(n).transpose()));
      for (Eigen::Index l = 0; l < l_dim; ++l)
        z_n[l] = prior.mean[l] + std::sqrt(std::exp(prior.log_var[l])) * normal(rng);
    }
    scene.z.col(n) = z_n;

    const Eigen::VectorXd var =
        alpha_n == 1 ? decode_a(bundle, z_n)
                     : decode_av(bundle, z_n, Eigen::VectorXd(scene.embeddings.row(n).transpose()));
    for (Eigen::Index f = 0; f < f_dim; ++f) {
      const double sd = std::sqrt(0.5 * var[f]);
      s(f, n) = std::complex<double>(sd * normal(rng), sd * normal(rng));
    }
  }

  const Eigen::MatrixXd noise_var = noise_variance(nmf_true);
  for (Eigen::Index n = 0; n < n_frames; ++n)
    for (Eigen::Index f = 0; f < f_dim; ++f) {
      const double sd = std::sqrt(0.5 * noise_var(f, n));
      b(f, n) = std::complex<double>(sd * normal(rng), sd * normal(rng));
    }

  auto wrap = [&](Eigen::MatrixXcd values) {
    Spectrogram spec;
    spec.values = std::move(values);
    spec.params = params;
    spec.n_samples = detail::default_support(params, n_frames);
    spec.sample_rate = sample_rate;
    require(spec.n_samples >= 1, "scene: too few frames for this fft_size/hop");
    return spec;
  };
  scene.clean = wrap(std::move(s));
  scene.noise = wrap(std::move(b));
  scene.mixture = wrap(scene.clean.values + scene.noise.values);
  return scene;
}

std::pair<VisualEmbeddings, Eigen::VectorXi> corrupt_visuals(const VisualEmbeddings& embeddings,
                                                             double fraction,
                                                             Eigen::Index block_len,
                                                             std::uint64_t seed) {
  const Eigen::Index n = embeddings.rows();
  require(fraction > 0.0 && fraction < 1.0, "corrupt_visuals: fraction must lie in (0, 1)");
  require(block_len >= 1, "corrupt_visuals: block_len must be positive");
  require(n >= block_len, "corrupt_visuals: need at least block_len frames");

  Eigen::Index n_blocks = static_cast<Eigen::Index>(
      std::llround(fraction * static_cast<double>(n) / static_cast<double>(block_len)));
  n_blocks = std::clamp<Eigen::Index>(n_blocks, 1, n / block_len);
  const Eigen::Index slack = n - n_blocks * block_len;

  Rng rng(derive_seed(seed, 0x6d61736bULL));
  // Sorted draws with repetition over the slack turn into non-overlapping
  // block starts.
  std::vector<Eigen::Index> offsets(static_cast<size_t>(n_blocks));
  std::uniform_int_distribution<Eigen::Index> dist(0, slack);
  for (auto& o : offsets) o = dist(rng);
  std::sort(offsets.begin(), offsets.end());

  VisualEmbeddings corrupted = embeddings;
  Eigen::VectorXi mask = Eigen::VectorXi::Zero(n);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < n_blocks; ++i) {
    const Eigen::Index start = offsets[static_cast<size_t>(i)] + i * block_len;
    for (Eigen::Index r = start; r < start + block_len; ++r) {
      mask[r] = 1;
      for (Eigen::Index c = 0; c < corrupted.cols(); ++c) corrupted(r, c) = normal(rng);
    }
  }
  return {std::move(corrupted), std::move(mask)};
}

void write_spectrogram(const std::string& path, const Eigen::MatrixXcd& values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open spectrogram file for writing: " + path);
  const auto f = static_cast<std::uint32_t>(values.rows());
  const auto n = static_cast<std::uint32_t>(values.cols());
  out.write(reinterpret_cast<const char*>(&f), 4);
  out.write(reinterpret_cast<const char*>(&n), 4);
  for (Eigen::Index j = 0; j < values.cols(); ++j)
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
      const double re = values(i, j).real(), im = values(i, j).imag();
      out.write(reinterpret_cast<const char*>(&re), 8);
      out.write(reinterpret_cast<const char*>(&im), 8);
    }
  if (!out) throw IoError("failed writing spectrogram file: " + path);
}

Eigen::MatrixXcd read_spectrogram(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open spectrogram file: " + path);
  std::uint32_t f = 0, n = 0;
  in.read(reinterpret_cast<char*>(&f), 4);
  in.read(reinterpret_cast<char*>(&n), 4);
  if (!in || f == 0 || n == 0) throw IoError(path + ": bad spectrogram header");
  Eigen::MatrixXcd values(f, n);
  for (Eigen::Index j = 0; j < values.cols(); ++j)
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
      double re = 0, im = 0;
      in.read(reinterpret_cast<char*>(&re), 8);
      in.read(reinterpret_cast<char*>(&im), 8);
      values(i, j) = std::complex<double>(re, im);
    }
  if (!in) throw IoError(path + ": truncated spectrogram data");
  return values;
}

void save_scene(const std::string& dir, const SyntheticScene& scene) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create scene directory: " + dir + ": " + ec.message());

  write_spectrogram(dir + "/X.spec", scene.mixture.values);
  write_spectrogram(dir + "/S.spec", scene.clean.values);
  write_spectrogram(dir + "/B.spec", scene.noise.values);
  write_wav(dir + "/x.wav", istft(scene.mixture));
  write_wav(dir + "/s.wav", istft(scene.clean));
  write_wav(dir + "/b.wav", istft(scene.noise));
  save_embeddings_csv(dir + "/embeddings_clean.csv", scene.embeddings);
  save_embeddings_csv(dir + "/embeddings_corrupted.csv", scene.embeddings_corrupted);
  save_model(dir + "/model.vaemm.json", scene.bundle);

  {
    std::ofstream out(dir + "/mask.csv");
    if (!out) throw IoError("cannot write mask.csv in " + dir);
    out << "frame,corrupted\n";
    for (Eigen::Index i = 0; i < scene.corruption_mask.size(); ++i)
      out << i << "," << scene.corruption_mask[i] << "\n";
  }
  {
    std::ofstream out(dir + "/alpha.csv");
    if (!out) throw IoError("cannot write alpha.csv in " + dir);
    out << "frame,alpha\n";
    for (Eigen::Index i = 0; i < scene.alpha.size(); ++i)
      out << i << "," << scene.alpha[i] << "\n";
  }

  auto matrix_to_json = [](const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  nlohmann::json meta{{"format", "vaemm-scene"},
                      {"version", 1},
                      {"frames", scene.mixture.values.cols()},
                      {"fft_size", scene.mixture.params.fft_size},
                      {"hop", scene.mixture.params.hop},
                      {"window", to_string(scene.mixture.params.window)},
                      {"sample_rate", scene.mixture.sample_rate},
                      {"n_samples", scene.mixture.n_samples},
                      {"pi_true", scene.pi_true},
                      {"seed", scene.seed},
                      {"nmf_w", matrix_to_json(scene.nmf.w)},
                      {"nmf_h", matrix_to_json(scene.nmf.h)}};
  std::ofstream out(dir + "/scene.json");
  if (!out) throw IoError("cannot write scene.json in " + dir);
  out << meta.dump(2) << "\n";
}

namespace {

Eigen::VectorXi read_flag_csv(const std::string& path, const char* column) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  std::getline(in, line);  // header
  std::vector<int> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw IoError(path + ": bad " + column + " row");
    values.push_back(std::stoi(line.substr(comma + 1)));
  }
  Eigen::VectorXi out(static_cast<Eigen::Index>(values.size()));
  for (size_t i = 0; i < values.size(); ++i) out[static_cast<Eigen::Index>(i)] = values[i];
  return out;
}

}  // namespace

SyntheticScene load_scene(const std::string& dir) {
  std::ifstream meta_in(dir + "/scene.json");
  if (!meta_in) throw IoError("cannot open scene metadata: " + dir + "/scene.json");
  nlohmann::json meta;
  try {
    meta_in >> meta;
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(dir + "/scene.json: " + e.what());
  }

  SyntheticScene scene;
  StftParams params;
  params.fft_size = meta.at("fft_size").get<int>();
  params.hop = meta.at("hop").get<int>();
  params.window = window_from_string(meta.at("window").get<std::string>());
  const int sample_rate = meta.at("sample_rate").get<int>();
  const auto n_samples = meta.at("n_samples").get<Eigen::Index>();
  scene.pi_true = meta.at("pi_true").get<double>();
  scene.seed = meta.at("seed").get<std::uint64_t>();

  auto wrap = [&](Eigen::MatrixXcd values) {
    Spectrogram spec;
    spec.values = std::move(values);
    spec.params = params;
    spec.n_samples = n_samples;
    spec.sample_rate = sample_rate;
    return spec;
  };
  scene.mixture = wrap(read_spectrogram(dir + "/X.spec"));
  scene.clean = wrap(read_spectrogram(dir + "/S.spec"));
  scene.noise = wrap(read_spectrogram(dir + "/B.spec"));
  scene.embeddings = load_embeddings_csv(dir + "/embeddings_clean.csv");
  scene.embeddings_corrupted = load_embeddings_csv(dir + "/embeddings_corrupted.csv");
  scene.corruption_mask = read_flag_csv(dir + "/mask.csv", "mask");
  scene.alpha = read_flag_csv(dir + "/alpha.csv", "alpha");
  scene.bundle = load_model(dir + "/model.vaemm.json");

  auto matrix_from_json = [](const nlohmann::json& rows) {
    const auto r = static_cast<Eigen::Index>(rows.size());
    const auto c = r > 0 ? static_cast<Eigen::Index>(rows.at(0).size()) : 0;
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < c; ++j)
        m(i, j) = rows.at(static_cast<size_t>(i)).at(static_cast<size_t>(j)).get<double>();
    return m;
  };
  scene.nmf.w = matrix_from_json(meta.at("nmf_w"));
  scene.nmf.h = matrix_from_json(meta.at("nmf_h"));
  return scene;
}

}  // namespace vaemm
