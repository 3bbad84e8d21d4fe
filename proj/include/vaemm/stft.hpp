// vaemm/stft.hpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef VAEMM_STFT_HPP_
#define VAEMM_STFT_HPP_

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "vaemm/common.hpp"

namespace vaemm {

struct AudioSignal {
  Eigen::VectorXd samples;
  int sample_rate = 16000;
};

enum class Window { kSqrtHann, kHann, kRect };

/// Analysis/synthesis parameters. The same window is used on both sides;
/// the pair must satisfy the constant-overlap-add identity for the hop.
struct StftParams {
  int fft_size = 1024;
  int hop = 256;
  Window window = Window::kSqrtHann;
};

/// F x N complex STFT coefficients, one column per frame, F = fft_size/2 + 1.
/// `n_samples` is the time support the matrix was analyzed from (0 means
/// "not from analysis": synthesis then uses the longest support that maps
/// back to exactly N frames).
struct Spectrogram {
  Eigen::MatrixXcd values;
  StftParams params;
  Eigen::Index n_samples = 0;
  int sample_rate = 16000;
};

inline Eigen::Index num_bins(const StftParams& p) { return p.fft_size / 2 + 1; }

inline const char* to_string(Window w) {
  switch (w) {
    case Window::kSqrtHann: return "sqrt_hann";
    case Window::kHann: return "hann";
    case Window::kRect: return "rect";
  }
  return "sqrt_hann";
}

inline Window window_from_string(const std::string& name) {
  if (name == "sqrt_hann") return Window::kSqrtHann;
  if (name == "hann") return Window::kHann;
  if (name == "rect") return Window::kRect;
  throw ValidationError("unknown window name: " + name);
}

inline Eigen::VectorXd make_window(Window kind, int length) {
  Eigen::VectorXd w(length);
  for (int n = 0; n < length; ++n) {
    switch (kind) {
      case Window::kRect:
        w[n] = 1.0;
        break;
      case Window::kHann:
        w[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / length);
        break;
      case Window::kSqrtHann:
        w[n] = std::sqrt(0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / length));
        break;
    }
  }
  return w;
}

/// Steady-state overlap-add profile of the analysis*synthesis window
/// product over one hop period.
inline Eigen::VectorXd cola_profile(const Eigen::VectorXd& window, int hop) {
  Eigen::VectorXd profile = Eigen::VectorXd::Zero(hop);
  for (int p = 0; p < hop; ++p)
    for (int t = p; t < window.size(); t += hop) profile[p] += window[t] * window[t];
  return profile;
}

inline void validate_params(const StftParams& p) {
  require(p.fft_size > 0, "stft: fft_size must be positive");
  require(p.hop > 0 && p.hop <= p.fft_size, "stft: hop must satisfy 0 < hop <= fft_size");
  const Eigen::VectorXd profile = cola_profile(make_window(p.window, p.fft_size), p.hop);
  const double lo = profile.minCoeff(), hi = profile.maxCoeff();
  require(lo > 0 && (hi - lo) <= 1e-8 * hi,
          "stft: window/hop pair violates the overlap-add reconstruction identity");
}

namespace detail {
// Leading zero padding; puts every original sample into the region where
// all of its covering frames exist, so synthesis normalization is exact.
inline Eigen::Index front_pad(const StftParams& p) { return p.fft_size - p.hop; }

inline Eigen::Index frame_count(const StftParams& p, Eigen::Index n_samples) {
  return (front_pad(p) + n_samples - 1) / p.hop + 1;
}

/// Longest support length whose analysis yields exactly n_frames frames.
inline Eigen::Index default_support(const StftParams& p, Eigen::Index n_frames) {
  return n_frames * p.hop - front_pad(p);
}
}  // namespace detail

inline Spectrogram stft(const AudioSignal& signal, const StftParams& params) {
  validate_params(params);
  const Eigen::Index n = signal.samples.size();
  require(n > 0, "stft: empty signal");
  require(signal.sample_rate > 0, "stft: sample_rate must be positive");
  require(signal.samples.allFinite(), "stft: non-finite sample values");

  const Eigen::Index pad = detail::front_pad(params);
  const Eigen::Index n_frames = detail::frame_count(params, n);
  const Eigen::Index padded_len = (n_frames - 1) * params.hop + params.fft_size;

  Eigen::VectorXd padded = Eigen::VectorXd::Zero(padded_len);
  padded.segment(pad, n) = signal.samples;

  const Eigen::VectorXd window = make_window(params.window, params.fft_size);

  Spectrogram spec;
  spec.params = params;
  spec.n_samples = n;
  spec.sample_rate = signal.sample_rate;
  spec.values.resize(num_bins(params), n_frames);

  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<double> frame(static_cast<size_t>(params.fft_size));
  std::vector<std::complex<double>> bins;
  for (Eigen::Index k = 0; k < n_frames; ++k) {
    for (int t = 0; t < params.fft_size; ++t)
      frame[static_cast<size_t>(t)] = padded[k * params.hop + t] * window[t];
    fft.fwd(bins, frame);
    for (Eigen::Index f = 0; f < spec.values.rows(); ++f)
      spec.values(f, k) = bins[static_cast<size_t>(f)];
  }
  return spec;
}

inline AudioSignal istft(const Spectrogram& spec) {
  const StftParams& params = spec.params;
  validate_params(params);
  require(spec.values.rows() == num_bins(params),
          "istft: bin count inconsistent with fft_size");
  const Eigen::Index n_frames = spec.values.cols();
  require(n_frames >= 1, "istft: empty spectrogram");

  const Eigen::Index n_out =
      spec.n_samples > 0 ? spec.n_samples : detail::default_support(params, n_frames);
  require(n_out >= 1, "istft: spectrogram too short for this fft_size/hop");
  require(detail::frame_count(params, n_out) == n_frames,
          "istft: frame count inconsistent with declared support length");

  const Eigen::Index pad = detail::front_pad(params);
  const Eigen::Index padded_len = (n_frames - 1) * params.hop + params.fft_size;
  const Eigen::VectorXd window = make_window(params.window, params.fft_size);

  Eigen::VectorXd acc = Eigen::VectorXd::Zero(padded_len);
  Eigen::VectorXd norm = Eigen::VectorXd::Zero(padded_len);

  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<std::complex<double>> bins(static_cast<size_t>(spec.values.rows()));
  std::vector<double> frame;
  for (Eigen::Index k = 0; k < n_frames; ++k) {
    for (Eigen::Index f = 0; f < spec.values.rows(); ++f)
      bins[static_cast<size_t>(f)] = spec.values(f, k);
    fft.inv(frame, bins, params.fft_size);
    for (int t = 0; t < params.fft_size; ++t) {
      acc[k * params.hop + t] += window[t] * frame[static_cast<size_t>(t)];
      norm[k * params.hop + t] += window[t] * window[t];
    }
  }

  AudioSignal out;
  out.sample_rate = spec.sample_rate;
  out.samples = acc.segment(pad, n_out).cwiseQuotient(norm.segment(pad, n_out));
  return out;
}

}  // namespace vaemm

#endif  // VAEMM_STFT_HPP_
