// vaemm/synth.hpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Synthetic scenes drawn from the exact generative model, the
// visual-corruption protocol, and quadrature oracles for tests.

#ifndef VAEMM_SYNTH_HPP_
#define VAEMM_SYNTH_HPP_

#include <string>

#include <Eigen/Dense>

#include "vaemm/embeddings.hpp"
#include "vaemm/model.hpp"
#include "vaemm/nmf.hpp"
#include "vaemm/rng.hpp"
#include "vaemm/stft.hpp"

namespace vaemm {

struct SyntheticScene {
  Spectrogram clean;    // S
  Spectrogram noise;    // B
  Spectrogram mixture;  // X = S + B, exactly
  Eigen::VectorXi alpha;            // true branch per frame, 1 = audio-only
  Eigen::MatrixXd z;                // true latents, L x N
  VisualEmbeddings embeddings;      // clean rows, N x M
  VisualEmbeddings embeddings_corrupted;
  Eigen::VectorXi corruption_mask;  // 1 where the row was replaced
  ModelBundle bundle;
  NmfParams nmf;
  double pi_true = 0.0;
  std::uint64_t seed = 0;
};

/// Single-hidden-layer tanh networks with seeded Gaussian weights scaled
/// by 0.5; small enough for grid oracles, nonlinear enough that the two
/// decoders differ.
ModelBundle make_toy_bundle(Eigen::Index latent_dim, Eigen::Index visual_dim,
                            Eigen::Index spectrum_dim, std::uint64_t seed,
                            Eigen::Index hidden_dim = 16, bool with_encoders = false);

/// Draws a scene from the mixture generative model: per frame a branch
/// alpha_n ~ Bernoulli(pi_true), a latent from the branch prior, complex
/// Gaussian speech from the branch decoder variance, plus NMF-variance
/// noise. Embeddings are i.i.d. standard normal rows.
SyntheticScene generate_scene(const ModelBundle& bundle, const NmfParams& nmf_true,
                              double pi_true, Eigen::Index n_frames, std::uint64_t seed,
                              const StftParams& params, int sample_rate = 16000);

/// Replaces randomly placed non-overlapping blocks of `block_len` rows,
/// covering about `fraction` of all rows, with standard Gaussian rows.
/// At least one block is always placed.
std::pair<VisualEmbeddings, Eigen::VectorXi> corrupt_visuals(const VisualEmbeddings& embeddings,
                                                             double fraction,
                                                             Eigen::Index block_len,
                                                             std::uint64_t seed);

struct GridSpec {
  double lo = -10.0;
  double hi = 10.0;
  int points = 2001;
};

struct GridPosterior {
  Eigen::VectorXd grid;
  Eigen::VectorXd density;  // trapezoid-normalized
  double mean = 0.0;
  double variance = 0.0;
};

/// Trapezoid-quadrature normalization and moments of a 1-D unnormalized
/// log-density; errors out when boundary mass suggests the support is
/// too small.
template <typename LogDensity>
GridPosterior grid_posterior_oracle(LogDensity&& log_density, const GridSpec& spec) {
  require(spec.points >= 3, "grid oracle: needs at least 3 points");
  require(spec.hi > spec.lo, "grid oracle: empty support");
  const Eigen::Index n = spec.points;
  const double dx = (spec.hi - spec.lo) / static_cast<double>(n - 1);

  GridPosterior out;
  out.grid.resize(n);
  out.density.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.grid[i] = spec.lo + dx * static_cast<double>(i);
    out.density[i] = log_density(out.grid[i]);
  }
  out.density.array() -= out.density.maxCoeff();
  out.density = out.density.array().exp();

  auto trapezoid = [&](const Eigen::VectorXd& values) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i + 1 < n; ++i) acc += 0.5 * dx * (values[i] + values[i + 1]);
    return acc;
  };
  const double total = trapezoid(out.density);
  require(total > 0, "grid oracle: zero mass on the grid");
  out.density /= total;
  require((out.density[0] + out.density[n - 1]) * dx <= 1e-6,
          "grid oracle: density mass at the grid boundary; widen the support");

  out.mean = trapezoid(out.density.cwiseProduct(out.grid));
  out.variance =
      trapezoid(out.density.cwiseProduct((out.grid.array() - out.mean).square().matrix()));
  return out;
}

/// Scene directory: spectrogram triple, WAV realizations, embeddings and
/// mask CSVs, true branch CSV, generating model, and a metadata document.
void save_scene(const std::string& dir, const SyntheticScene& scene);
SyntheticScene load_scene(const std::string& dir);

/// Binary spectrogram file: uint32 F, uint32 N, then interleaved re/im
/// little-endian doubles, frame by frame (column-major).
void write_spectrogram(const std::string& path, const Eigen::MatrixXcd& values);
Eigen::MatrixXcd read_spectrogram(const std::string& path);

}  // namespace vaemm

#endif  // VAEMM_SYNTH_HPP_
