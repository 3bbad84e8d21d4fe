// vaemm/vem.cpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#include "vaemm/vem.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>

namespace vaemm {

namespace {

constexpr double kLogPi = 1.1447298858494001741;     // log(pi), complex Gaussian constant
constexpr double kLogTwoPi = 1.8378770664093454836;  // log(2 pi), real Gaussian constant
constexpr double kEtaFloor = 1e-300;                 // keeps gamma finite under decoder blowup

/// Joint log-density of the audio-only branch at z, with s marginalized
/// against its current posterior: E[log p(s|z, alpha=1)] + log p(z|alpha=1).
/// `power` holds |m_fn|^2 + nu_fn.
double branch_a_logdensity(const ModelBundle& bundle, const Eigen::VectorXd& power,
                           const Eigen::VectorXd& z) {
  const Eigen::VectorXd lv = forward(bundle.decoder_a, z);
  double acc = 0.0;
  for (Eigen::Index f = 0; f < lv.size(); ++f)
    acc += -kLogPi - lv[f] - power[f] * std::exp(-lv[f]);
  acc += -0.5 * static_cast<double>(z.size()) * kLogTwoPi - 0.5 * z.squaredNorm();
  return acc;
}

/// Audio-visual branch counterpart, with the latent prior conditioned on v.
double branch_av_logdensity(const ModelBundle& bundle, const Eigen::VectorXd& power,
                            const LatentPrior& prior, const Eigen::VectorXd& v,
                            const Eigen::VectorXd& z) {
  const Eigen::VectorXd lv = log_var_av(bundle, z, v);
  double acc = 0.0;
  for (Eigen::Index f = 0; f < lv.size(); ++f)
    acc += -kLogPi - lv[f] - power[f] * std::exp(-lv[f]);
  for (Eigen::Index l = 0; l < z.size(); ++l) {
    const double dz = z[l] - prior.mean[l];
    acc += -0.5 * kLogTwoPi - 0.5 * prior.log_var[l] - 0.5 * dz * dz * std::exp(-prior.log_var[l]);
  }
  return acc;
}

/// Monte-Carlo log-odds of alpha=1 vs alpha=0 from cached per-sample
/// log-variances, then sigmoid. `z` is L x D, `lva`/`lvav` are F x D.
double alpha_core(const Eigen::MatrixXd& lva, const Eigen::MatrixXd& lvav,
                  const LatentPrior& prior, const Eigen::MatrixXd& z,
                  const Eigen::VectorXd& power, double pi) {
  const Eigen::Index n_samples = z.cols();
  double acc = 0.0;
  for (Eigen::Index d = 0; d < n_samples; ++d) {
    for (Eigen::Index f = 0; f < lva.rows(); ++f)
      acc += (lvav(f, d) - lva(f, d)) +
             (std::exp(-lvav(f, d)) - std::exp(-lva(f, d))) * power[f];
    for (Eigen::Index l = 0; l < z.rows(); ++l) {
      const double dz = z(l, d) - prior.mean[l];
      acc += 0.5 * prior.log_var[l] + 0.5 * dz * dz * std::exp(-prior.log_var[l]) -
             0.5 * z(l, d) * z(l, d);
    }
  }
  double log_odds = acc / static_cast<double>(n_samples) + (std::log(pi) - std::log(1.0 - pi));
  log_odds = std::clamp(log_odds, -kLogisticClip, kLogisticClip);
  return std::clamp(sigmoid(log_odds), kPiPosteriorClamp, 1.0 - kPiPosteriorClamp);
}

/// Whether any audio-visual evaluation can happen during the run.
bool uses_visual(const VemConfig& config) {
  if (config.mode == Mode::kAudioOnly) return false;
  if (config.mode == Mode::kMix && config.pin_pi && *config.pin_pi == 1.0) return false;
  return true;
}

double pinned_pi(const VemConfig& config) {
  switch (config.mode) {
    case Mode::kAudioOnly: return 1.0;
    case Mode::kAudioVisual: return 0.0;
    case Mode::kMix: return config.pin_pi ? *config.pin_pi : 0.5;
  }
  return 0.5;
}

bool alpha_is_free(const VemConfig& config) {
  return config.mode == Mode::kMix && !config.pin_pi;
}

}  // namespace

Mode mode_from_string(const std::string& name) {
  if (name == "a" || name == "audio_only") return Mode::kAudioOnly;
  if (name == "av" || name == "audio_visual") return Mode::kAudioVisual;
  if (name == "mix") return Mode::kMix;
  throw ValidationError("unknown mode: " + name + " (expected a, av, or mix)");
}

void validate_config(const VemConfig& config) {
  require(config.n_vem_iters > 0, "vem: n_vem_iters must be positive");
  require(config.nmf_rank > 0, "vem: nmf_rank must be positive");
  require(config.threads >= 1, "vem: threads must be >= 1");
  validate_mh(config.mh);
  if (config.pin_pi) {
    require(config.mode == Mode::kMix, "vem: pin_pi applies to the mix mode only");
    require(*config.pin_pi >= 0.0 && *config.pin_pi <= 1.0, "vem: pin_pi must be in [0, 1]");
  }
  if (config.stop_rel_q) require(*config.stop_rel_q > 0, "vem: stop threshold must be positive");
}

Eigen::VectorXd compute_eta(const ModelBundle& bundle, const LatentSamples& z_samples,
                            const Eigen::VectorXd& v, int alpha) {
  require(alpha == 0 || alpha == 1, "compute_eta: alpha must be 0 or 1");
  const Eigen::Index n_samples = z_samples.count();
  require(n_samples >= 1, "compute_eta: needs at least one sample");
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(bundle.spectrum_dim);
  for (Eigen::Index d = 0; d < n_samples; ++d) {
    const Eigen::VectorXd lv = alpha == 1 ? log_var_a(bundle, z_samples.samples.col(d))
                                          : log_var_av(bundle, z_samples.samples.col(d), v);
    acc += (-lv.array()).exp().matrix();
  }
  return acc / static_cast<double>(n_samples);
}

Eigen::VectorXd compute_gamma(const Eigen::VectorXd& eta_a, const Eigen::VectorXd& eta_av,
                              double pi_n) {
  require(eta_a.size() == eta_av.size(), "compute_gamma: eta size mismatch");
  require(pi_n >= 0.0 && pi_n <= 1.0, "compute_gamma: pi_n must be in [0, 1]");
  Eigen::VectorXd gamma(eta_a.size());
  for (Eigen::Index f = 0; f < gamma.size(); ++f) {
    double denom = 0.0;
    if (pi_n != 0.0) denom += pi_n * eta_a[f];
    if (pi_n != 1.0) denom += (1.0 - pi_n) * eta_av[f];
    gamma[f] = 1.0 / std::max(denom, kEtaFloor);
  }
  return gamma;
}

void e_step_s(const Eigen::VectorXcd& x_col, const Eigen::VectorXd& gamma,
              const Eigen::VectorXd& noise_var, Eigen::VectorXcd* m, Eigen::VectorXd* nu) {
  require(x_col.size() == gamma.size() && x_col.size() == noise_var.size(),
          "e_step_s: size mismatch");
  m->resize(x_col.size());
  nu->resize(x_col.size());
  for (Eigen::Index f = 0; f < x_col.size(); ++f) {
    const double gain = gamma[f] / (gamma[f] + noise_var[f]);
    (*m)[f] = gain * x_col[f];
    (*nu)[f] = gain * noise_var[f];
  }
}

double log_rz(const ModelBundle& bundle, const Eigen::VectorXcd& m, const Eigen::VectorXd& nu,
              const Eigen::VectorXd& v, double pi_n, const Eigen::VectorXd& z) {
  require(pi_n >= 0.0 && pi_n <= 1.0, "log_rz: pi_n must be in [0, 1]");
  const Eigen::VectorXd power = m.cwiseAbs2() + nu;
  double acc = 0.0;
  if (pi_n != 0.0) acc += pi_n * branch_a_logdensity(bundle, power, z);
  if (pi_n != 1.0)
    acc += (1.0 - pi_n) * branch_av_logdensity(bundle, power, prior_av(bundle, v), v, z);
  return acc;
}

double e_step_alpha(const ModelBundle& bundle, const LatentSamples& z_samples,
                    const Eigen::VectorXd& v, const Eigen::VectorXcd& m,
                    const Eigen::VectorXd& nu, double pi) {
  require(pi > 0.0 && pi < 1.0, "e_step_alpha: prior pi must lie strictly inside (0, 1)");
  const Eigen::Index n_samples = z_samples.count();
  require(n_samples >= 1, "e_step_alpha: needs at least one sample");
  Eigen::MatrixXd lva(bundle.spectrum_dim, n_samples), lvav(bundle.spectrum_dim, n_samples);
  for (Eigen::Index d = 0; d < n_samples; ++d) {
    lva.col(d) = log_var_a(bundle, z_samples.samples.col(d));
    lvav.col(d) = log_var_av(bundle, z_samples.samples.col(d), v);
  }
  const Eigen::VectorXd power = m.cwiseAbs2() + nu;
  return alpha_core(lva, lvav, prior_av(bundle, v), z_samples.samples, power, pi);
}

Eigen::MatrixXd posterior_power(const VemState& state) {
  Eigen::MatrixXd v(state.n_bins(), state.n_frames());
  for (Eigen::Index n = 0; n < state.n_frames(); ++n)
    v.col(n) = (state.x.col(n) - state.frames[static_cast<size_t>(n)].m).cwiseAbs2() +
               state.frames[static_cast<size_t>(n)].nu;
  return v;
}

double q_objective(const VemState& state) {
  const Eigen::MatrixXd r = noise_variance(state.nmf);
  const Eigen::MatrixXd v = posterior_power(state);
  double q = 0.0;
  for (Eigen::Index n = 0; n < v.cols(); ++n)
    for (Eigen::Index f = 0; f < v.rows(); ++f) q += -v(f, n) / r(f, n) - std::log(r(f, n));
  const double pi = state.mixture.pi;
  for (const FramePosterior& fr : state.frames) {
    if (fr.pi_n > 0.0) q += fr.pi_n * std::log(pi);
    if (fr.pi_n < 1.0) q += (1.0 - fr.pi_n) * std::log(1.0 - pi);
  }
  return q;
}

VemState init_state(const Eigen::MatrixXcd& x, const VisualEmbeddings& v,
                    const ModelBundle& bundle, const VemConfig& config) {
  validate_config(config);
  validate_bundle(bundle);
  require(x.cols() >= 1, "vem: empty spectrogram");
  require(x.rows() == bundle.spectrum_dim,
          "vem: spectrogram has " + std::to_string(x.rows()) + " bins, model expects " +
              std::to_string(bundle.spectrum_dim));
  require(x.allFinite(), "vem: non-finite spectrogram");

  const Eigen::Index n_frames = x.cols();
  const bool visual = uses_visual(config);
  if (visual) {
    require(v.rows() == n_frames, "vem: embeddings rows (" + std::to_string(v.rows()) +
                                      ") do not match frame count (" + std::to_string(n_frames) +
                                      "); align them first");
    require(v.cols() == bundle.visual_dim, "vem: embedding dim mismatch");
    require(v.allFinite(), "vem: non-finite embeddings");
  }

  VemState state;
  state.x = x;
  state.v = visual ? v : VisualEmbeddings(0, 0);
  state.bundle = &bundle;
  state.config = config;

  Rng nmf_rng(derive_seed(config.seed, 0x8000000000000000ULL));
  state.nmf = random_nmf(x.rows(), config.nmf_rank, n_frames, nmf_rng);

  const double pi0 = pinned_pi(config);
  state.mixture.pi = pi0;

  state.frames.resize(static_cast<size_t>(n_frames));
  state.frame_rngs.reserve(static_cast<size_t>(n_frames));
  for (Eigen::Index n = 0; n < n_frames; ++n) {
    state.frame_rngs.emplace_back(derive_seed(config.seed, static_cast<std::uint64_t>(n)));
    FramePosterior& fr = state.frames[static_cast<size_t>(n)];
    fr.m = x.col(n);
    fr.nu = Eigen::VectorXd::Zero(x.rows());
    fr.gamma = Eigen::VectorXd::Zero(x.rows());
    fr.eta_a = Eigen::VectorXd::Zero(x.rows());
    fr.eta_av = Eigen::VectorXd::Zero(x.rows());
    fr.pi_n = pi0;

    // Latent start: pi-blend of the per-branch initial codes. Encoder means
    // when the bundle ships encoders, otherwise each branch's prior mean.
    Eigen::VectorXd z = Eigen::VectorXd::Zero(bundle.latent_dim);
    if (pi0 != 0.0 && bundle.encoder_a) {
      const Eigen::VectorXd power = x.col(n).cwiseAbs2();
      z += pi0 * encode_mean(*bundle.encoder_a, bundle.latent_dim, power);
    }
    if (pi0 != 1.0) {
      Eigen::VectorXd z_av;
      if (bundle.encoder_av) {
        Eigen::VectorXd input(bundle.spectrum_dim + bundle.visual_dim);
        input << x.col(n).cwiseAbs2(), v.row(n).transpose();
        z_av = encode_mean(*bundle.encoder_av, bundle.latent_dim, input);
      } else {
        z_av = prior_av(bundle, Eigen::VectorXd(v.row(n).transpose())).mean;
      }
      z += (1.0 - pi0) * z_av;
    }
    fr.z_last = z;
  }
  return state;
}

LatentSamples e_step_z(VemState& state, Eigen::Index n) {
  FramePosterior& fr = state.frames[static_cast<size_t>(n)];
  const ModelBundle& bundle = *state.bundle;
  const Eigen::VectorXd power = fr.m.cwiseAbs2() + fr.nu;
  const double pi_n = fr.pi_n;

  LatentSamples samples;
  if (pi_n == 1.0) {
    auto target = [&](const Eigen::VectorXd& z) { return branch_a_logdensity(bundle, power, z); };
    samples = mh_sample(target, fr.z_last, state.config.mh, state.frame_rngs[static_cast<size_t>(n)]);
  } else {
    const LatentPrior prior = prior_av(bundle, Eigen::VectorXd(state.v.row(n).transpose()));
    const Eigen::VectorXd v_row = state.v.row(n).transpose();
    if (pi_n == 0.0) {
      auto target = [&](const Eigen::VectorXd& z) {
        return branch_av_logdensity(bundle, power, prior, v_row, z);
      };
      samples =
          mh_sample(target, fr.z_last, state.config.mh, state.frame_rngs[static_cast<size_t>(n)]);
    } else {
      auto target = [&](const Eigen::VectorXd& z) {
        return pi_n * branch_a_logdensity(bundle, power, z) +
               (1.0 - pi_n) * branch_av_logdensity(bundle, power, prior, v_row, z);
      };
      samples =
          mh_sample(target, fr.z_last, state.config.mh, state.frame_rngs[static_cast<size_t>(n)]);
    }
  }
  fr.z = samples;
  fr.z_last = samples.last();
  return samples;
}

void e_step_frame(VemState& state, Eigen::Index n) {
  FramePosterior& fr = state.frames[static_cast<size_t>(n)];
  const ModelBundle& bundle = *state.bundle;
  const Eigen::Index n_bins = state.n_bins();

  e_step_z(state, n);
  const Eigen::Index n_samples = fr.z.count();

  const bool free_alpha = alpha_is_free(state.config);
  const bool need_a = free_alpha || fr.pi_n != 0.0;
  const bool need_av = free_alpha || fr.pi_n != 1.0;

  Eigen::MatrixXd lva, lvav;
  if (need_a) {
    lva.resize(n_bins, n_samples);
    for (Eigen::Index d = 0; d < n_samples; ++d)
      lva.col(d) = forward(bundle.decoder_a, fr.z.samples.col(d));
    fr.eta_a = (-lva.array()).exp().rowwise().mean();
  } else {
    fr.eta_a.setZero(n_bins);
  }
  Eigen::VectorXd v_row;
  if (need_av) {
    v_row = state.v.row(n).transpose();
    lvav.resize(n_bins, n_samples);
    Eigen::VectorXd zv(bundle.latent_dim + bundle.visual_dim);
    for (Eigen::Index d = 0; d < n_samples; ++d) {
      zv << fr.z.samples.col(d), v_row;
      lvav.col(d) = forward(bundle.decoder_av, zv);
    }
    fr.eta_av = (-lvav.array()).exp().rowwise().mean();
  } else {
    fr.eta_av.setZero(n_bins);
  }

  fr.gamma = compute_gamma(fr.eta_a, fr.eta_av, fr.pi_n);

  const Eigen::VectorXd noise_col = state.nmf.w * state.nmf.h.col(n);
  e_step_s(state.x.col(n), fr.gamma, noise_col, &fr.m, &fr.nu);

  if (free_alpha) {
    const Eigen::VectorXd power = fr.m.cwiseAbs2() + fr.nu;
    fr.pi_n = alpha_core(lva, lvav, prior_av(bundle, v_row), fr.z.samples, power,
                         state.mixture.pi);
    // gamma depends on pi_n; refresh it so downstream consumers see the
    // current responsibility.
    fr.gamma = compute_gamma(fr.eta_a, fr.eta_av, fr.pi_n);
  }
}

void m_step(VemState& state) {
  const Eigen::MatrixXd v_power = posterior_power(state);
  state.nmf = update_h(state.nmf, v_power);
  state.nmf = update_w(state.nmf, v_power);
  if (alpha_is_free(state.config)) {
    double sum = 0.0;
    for (const FramePosterior& fr : state.frames) sum += fr.pi_n;
    const double mean = sum / static_cast<double>(state.frames.size());
    state.mixture.pi = std::clamp(mean, kPiPriorClamp, 1.0 - kPiPriorClamp);
  }
}

void vem_iteration(VemState& state) {
  const Eigen::Index n_frames = state.n_frames();
  const int n_threads =
      std::max(1, std::min<int>(state.config.threads, static_cast<int>(n_frames)));
  if (n_threads == 1) {
    for (Eigen::Index n = 0; n < n_frames; ++n) e_step_frame(state, n);
  } else {
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(static_cast<size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) {
      workers.emplace_back([&state, &errors, t, n_threads, n_frames] {
        const Eigen::Index begin = n_frames * t / n_threads;
        const Eigen::Index end = n_frames * (t + 1) / n_threads;
        try {
          for (Eigen::Index n = begin; n < end; ++n) e_step_frame(state, n);
        } catch (...) {
          errors[static_cast<size_t>(t)] = std::current_exception();
        }
      });
    }
    for (std::thread& w : workers) w.join();
    for (const std::exception_ptr& e : errors)
      if (e) std::rethrow_exception(e);
  }
  m_step(state);
}

Eigen::MatrixXcd enhance(const VemState& state) {
  const Eigen::MatrixXd noise = noise_variance(state.nmf);
  Eigen::MatrixXcd out(state.n_bins(), state.n_frames());
  for (Eigen::Index n = 0; n < state.n_frames(); ++n) {
    const FramePosterior& fr = state.frames[static_cast<size_t>(n)];
    for (Eigen::Index f = 0; f < state.n_bins(); ++f) {
      const double gain = fr.gamma[f] / (fr.gamma[f] + noise(f, n));
      out(f, n) = gain * state.x(f, n);
    }
  }
  return out;
}

VemResult run(const Eigen::MatrixXcd& x, const VisualEmbeddings& v, const ModelBundle& bundle,
              const VemConfig& config) {
  VemState state = init_state(x, v, bundle, config);
  VemResult result;
  std::vector<double> q_history;
  for (int it = 1; it <= config.n_vem_iters; ++it) {
    vem_iteration(state);

    IterationDiag diag;
    diag.iteration = it;
    diag.q = q_objective(state);
    diag.pi = state.mixture.pi;
    double acc = 0.0;
    for (const FramePosterior& fr : state.frames) acc += fr.z.acceptance_rate();
    diag.mean_acceptance = acc / static_cast<double>(state.frames.size());
    result.trace.push_back(diag);
    result.iterations = it;

    if (config.stop_rel_q) {
      q_history.push_back(diag.q);
      const size_t span = 5;
      if (q_history.size() > span) {
        const double prev = q_history[q_history.size() - 1 - span];
        const double rel = std::abs(diag.q - prev) / std::max(std::abs(prev), 1e-30);
        if (rel < *config.stop_rel_q) break;
      }
    }
  }

  result.enhanced = enhance(state);
  if (!result.enhanced.allFinite()) throw NumericError("vem: non-finite enhanced spectrogram");
  result.pi_frames.resize(state.n_frames());
  for (Eigen::Index n = 0; n < state.n_frames(); ++n)
    result.pi_frames[n] = state.frames[static_cast<size_t>(n)].pi_n;
  return result;
}

void write_diagnostics_csv(const std::string& path, const std::vector<IterationDiag>& trace) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open diagnostics file for writing: " + path);
  out << "iteration,q,pi,mean_acceptance\n";
  char buf[128];
  for (const IterationDiag& d : trace) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g\n", d.iteration, d.q, d.pi,
                  d.mean_acceptance);
    out << buf;
  }
  if (!out) throw IoError("failed writing diagnostics file: " + path);
}

void write_frames_csv(const std::string& path, const Eigen::VectorXd& pi_frames) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open frame trace for writing: " + path);
  out << "frame,pi_n\n";
  char buf[64];
  for (Eigen::Index n = 0; n < pi_frames.size(); ++n) {
    std::snprintf(buf, sizeof(buf), "%lld,%.17g\n", static_cast<long long>(n), pi_frames[n]);
    out << buf;
  }
  if (!out) throw IoError("failed writing frame trace: " + path);
}

}  // namespace vaemm
