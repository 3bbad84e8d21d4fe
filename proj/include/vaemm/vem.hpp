// vaemm/vem.hpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Variational EM for the per-frame mixture of an audio-only and an
// audio-visual variance-decoder speech model over an NMF noise model.
// Each iteration runs, per frame: latent sampling (E-z), the Gaussian
// speech-posterior update (E-s), the branch-responsibility update
// (E-alpha), then a global multiplicative NMF update and mixture-prior
// update (M). Clean speech is the posterior mean under the final state.

#ifndef VAEMM_VEM_HPP_
#define VAEMM_VEM_HPP_

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vaemm/embeddings.hpp"
#include "vaemm/mh.hpp"
#include "vaemm/model.hpp"
#include "vaemm/nmf.hpp"
#include "vaemm/stft.hpp"

namespace vaemm {

enum class Mode { kMix, kAudioOnly, kAudioVisual };

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::kMix: return "mix";
    case Mode::kAudioOnly: return "a";
    case Mode::kAudioVisual: return "av";
  }
  return "mix";
}

Mode mode_from_string(const std::string& name);

/// Mixture prior clamp: keeps log(pi/(1-pi)) finite so a boundary prior
/// cannot freeze the responsibilities irreversibly.
inline constexpr double kPiPriorClamp = 1e-6;
/// Responsibility clamp after the sigmoid.
inline constexpr double kPiPosteriorClamp = 1e-12;
/// Sigmoid input clip; F*D-term sums can reach overflow range.
inline constexpr double kLogisticClip = 500.0;

struct VemConfig {
  int n_vem_iters = 200;
  MhConfig mh{};
  int nmf_rank = 8;
  std::uint64_t seed = 0;
  Mode mode = Mode::kMix;
  /// Optional early stop: relative Q change over 5 iterations below this.
  std::optional<double> stop_rel_q;
  /// Diagnostic: run the mixture path with every pi_n frozen at this value
  /// (E-alpha and the prior update are skipped). Not a user-facing mode.
  std::optional<double> pin_pi;
  int threads = 1;
};

void validate_config(const VemConfig& config);

struct MixtureParams {
  double pi = 0.5;
};

struct FramePosterior {
  Eigen::VectorXcd m;       // posterior mean of s_n
  Eigen::VectorXd nu;       // posterior variance of s_n
  Eigen::VectorXd gamma;    // effective speech variance, Eq. picture: 1 / E[1/sigma]
  Eigen::VectorXd eta_a;    // MC mean of 1/sigma_a over retained samples
  Eigen::VectorXd eta_av;   // MC mean of 1/sigma_av
  double pi_n = 0.5;        // responsibility of the audio-only branch
  LatentSamples z;          // retained samples of the latest chain
  Eigen::VectorXd z_last;   // warm start for the next chain
};

struct VemState {
  Eigen::MatrixXcd x;  // F x N observed mixture spectrogram
  VisualEmbeddings v;  // N x M, one row per frame (0 x 0 allowed audio-only)
  const ModelBundle* bundle = nullptr;
  NmfParams nmf;
  MixtureParams mixture;
  std::vector<FramePosterior> frames;
  std::vector<Rng> frame_rngs;
  VemConfig config;

  Eigen::Index n_frames() const { return x.cols(); }
  Eigen::Index n_bins() const { return x.rows(); }
};

struct IterationDiag {
  int iteration = 0;
  double q = 0;                // expected data log-likelihood after the M step
  double pi = 0;
  double mean_acceptance = 0;  // MH acceptance averaged over frames
};

struct VemResult {
  Eigen::MatrixXcd enhanced;
  Eigen::VectorXd pi_frames;
  std::vector<IterationDiag> trace;
  int iterations = 0;
};

// ---------------------------------------------------------------------------
// Per-equation operations. The engine routes through these same kernels, so
// tests against independent oracles cover the hot path too.

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double t = std::exp(x);
  return t / (1.0 + t);
}

/// Variance of the branch selected by alpha: 1 -> audio-only, 0 -> audio-visual.
template <typename DerivedZ, typename DerivedV>
Eigen::VectorXd mixture_variance(const ModelBundle& bundle, const Eigen::MatrixBase<DerivedZ>& z,
                                 const Eigen::MatrixBase<DerivedV>& v, int alpha) {
  require(alpha == 0 || alpha == 1, "mixture_variance: alpha must be 0 or 1");
  return alpha == 1 ? decode_a(bundle, z) : decode_av(bundle, z, v);
}

/// Monte-Carlo mean of reciprocal decoded variances over retained samples.
Eigen::VectorXd compute_eta(const ModelBundle& bundle, const LatentSamples& z_samples,
                            const Eigen::VectorXd& v, int alpha);

/// gamma = 1 / (pi_n * eta_a + (1 - pi_n) * eta_av). A zero mixture weight
/// leaves the other branch's reciprocal untouched bit-for-bit.
Eigen::VectorXd compute_gamma(const Eigen::VectorXd& eta_a, const Eigen::VectorXd& eta_av,
                              double pi_n);

/// Wiener-style posterior of s_n: m = gamma/(gamma+sigma_b) x, nu = gain*sigma_b.
void e_step_s(const Eigen::VectorXcd& x_col, const Eigen::VectorXd& gamma,
              const Eigen::VectorXd& noise_var, Eigen::VectorXcd* m, Eigen::VectorXd* nu);

/// Unnormalized log-density of the latent posterior r(z): the
/// responsibility-weighted sum of the two branch joint log-densities, with
/// exact Gaussian constants.
double log_rz(const ModelBundle& bundle, const Eigen::VectorXcd& m, const Eigen::VectorXd& nu,
              const Eigen::VectorXd& v, double pi_n, const Eigen::VectorXd& z);

/// Responsibility of the audio-only branch: sigmoid of the Monte-Carlo
/// averaged joint log-likelihood ratio plus the prior log-odds.
double e_step_alpha(const ModelBundle& bundle, const LatentSamples& z_samples,
                    const Eigen::VectorXd& v, const Eigen::VectorXcd& m,
                    const Eigen::VectorXd& nu, double pi);

/// V = [|x - m|^2 + nu], the target power for the NMF updates.
Eigen::MatrixXd posterior_power(const VemState& state);

/// Expected data log-likelihood (the monitored objective).
double q_objective(const VemState& state);

// ---------------------------------------------------------------------------
// Engine.

VemState init_state(const Eigen::MatrixXcd& x, const VisualEmbeddings& v,
                    const ModelBundle& bundle, const VemConfig& config);

/// MH pass for one frame: warm-started chain targeting log_rz, with the
/// frame's own generator. Stores the retained samples on the frame.
LatentSamples e_step_z(VemState& state, Eigen::Index n);

/// Full E pass (z, s, alpha) for one frame.
void e_step_frame(VemState& state, Eigen::Index n);

/// NMF multiplicative updates on posterior power, then the mixture prior.
void m_step(VemState& state);

/// One VEM iteration: all frames' E steps (possibly threaded), then M.
void vem_iteration(VemState& state);

/// Posterior-mean clean-speech spectrogram under the current state.
Eigen::MatrixXcd enhance(const VemState& state);

VemResult run(const Eigen::MatrixXcd& x, const VisualEmbeddings& v, const ModelBundle& bundle,
              const VemConfig& config);

/// Per-iteration trace (iteration, Q, pi, mean acceptance) as CSV.
void write_diagnostics_csv(const std::string& path, const std::vector<IterationDiag>& trace);
/// Final per-frame responsibilities as CSV.
void write_frames_csv(const std::string& path, const Eigen::VectorXd& pi_frames);

}  // namespace vaemm

#endif  // VAEMM_VEM_HPP_
