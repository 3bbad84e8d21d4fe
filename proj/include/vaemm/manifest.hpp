// vaemm/manifest.hpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef VAEMM_MANIFEST_HPP_
#define VAEMM_MANIFEST_HPP_

#include <string>

#include "vaemm/stft.hpp"
#include "vaemm/vem.hpp"

namespace vaemm {

/// Resolved configuration of an enhancement run, written next to its
/// outputs. Rerunning with the same settings and seed reproduces the
/// outputs byte for byte; the timestamp is informational only.
struct RunManifest {
  std::string tool_version = kVersion;
  std::string created_utc;
  std::string input_path;
  std::string visual_path;
  std::string model_path;
  std::string output_path;
  std::string trace_dir;
  VemConfig config;
  StftParams stft;
  int sample_rate = 0;
};

/// Current time as an ISO-8601 UTC string.
std::string utc_now();

void save_manifest(const std::string& path, const RunManifest& manifest);

}  // namespace vaemm

#endif  // VAEMM_MANIFEST_HPP_
