// vaemm/manifest.cpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#include "vaemm/manifest.hpp"

#include <ctime>
#include <fstream>

#include <json.hpp>

namespace vaemm {

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void save_manifest(const std::string& path, const RunManifest& manifest) {
  nlohmann::json j{
      {"tool_version", manifest.tool_version},
      {"created_utc", manifest.created_utc},
      {"input", manifest.input_path},
      {"visual", manifest.visual_path},
      {"model", manifest.model_path},
      {"output", manifest.output_path},
      {"trace_dir", manifest.trace_dir},
      {"mode", to_string(manifest.config.mode)},
      {"iters", manifest.config.n_vem_iters},
      {"mh_iters", manifest.config.mh.n_iters},
      {"mh_burnin", manifest.config.mh.burn_in},
      {"epsilon", manifest.config.mh.epsilon},
      {"nmf_rank", manifest.config.nmf_rank},
      {"seed", manifest.config.seed},
      {"threads", manifest.config.threads},
      {"fft_size", manifest.stft.fft_size},
      {"hop", manifest.stft.hop},
      {"window", to_string(manifest.stft.window)},
      {"sample_rate", manifest.sample_rate},
  };
  std::ofstream out(path);
  if (!out) throw IoError("cannot open manifest for writing: " + path);
  out << j.dump(2) << "\n";
  if (!out) throw IoError("failed writing manifest: " + path);
}

}  // namespace vaemm
