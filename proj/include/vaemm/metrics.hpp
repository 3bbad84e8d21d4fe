// vaemm/metrics.hpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef VAEMM_METRICS_HPP_
#define VAEMM_METRICS_HPP_

#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "vaemm/common.hpp"
#include "vaemm/stft.hpp"

namespace vaemm {

struct SdrReport {
  double sdr_in_db = 0;
  double sdr_out_db = 0;
  double delta_db = 0;
};

/// Scale-invariant signal-to-distortion ratio in dB: the estimate is
/// projected onto the reference, and the ratio of projected to residual
/// energy is reported. +inf when the residual is zero, -inf for a zero
/// estimate. Inputs are trimmed to the shorter length.
template <typename DerivedR, typename DerivedE>
double sdr(const Eigen::MatrixBase<DerivedR>& reference, const Eigen::MatrixBase<DerivedE>& estimate) {
  const Eigen::Index n = std::min(reference.size(), estimate.size());
  require(n > 0, "sdr: empty input");
  const auto ref = reference.derived().head(n);
  const auto est = estimate.derived().head(n);

  const double ref_energy = ref.squaredNorm();
  require(ref_energy > 0, "sdr: zero reference");
  if (est.squaredNorm() == 0) return -std::numeric_limits<double>::infinity();

  const double gain = ref.dot(est) / ref_energy;
  const double target_energy = gain * gain * ref_energy;
  const double residual_energy = (est - gain * ref).squaredNorm();
  if (residual_energy == 0) return std::numeric_limits<double>::infinity();
  if (target_energy == 0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(target_energy / residual_energy);
}

inline double sdr(const AudioSignal& reference, const AudioSignal& estimate) {
  return sdr(reference.samples, estimate.samples);
}

inline SdrReport make_sdr_report(const AudioSignal& reference, const AudioSignal& noisy,
                                 const AudioSignal& enhanced) {
  SdrReport report;
  report.sdr_in_db = sdr(reference, noisy);
  report.sdr_out_db = sdr(reference, enhanced);
  report.delta_db = report.sdr_out_db - report.sdr_in_db;
  return report;
}

}  // namespace vaemm

#endif  // VAEMM_METRICS_HPP_
