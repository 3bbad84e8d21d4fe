// tests/test_wav.cpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#include "vaemm/wav.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

using namespace vaemm;

namespace {

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("wav: 16-bit round trip is exact on the quantization grid") {
  const std::string path = temp_path("vaemm_roundtrip.wav");
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> dist(-32768, 32767);
  AudioSignal s;
  s.sample_rate = 16000;
  s.samples.resize(777);
  for (Eigen::Index i = 0; i < s.samples.size(); ++i) s.samples[i] = dist(rng) / 32768.0;

  write_wav(path, s);
  const AudioSignal back = read_wav(path);
  CHECK(back.sample_rate == 16000);
  REQUIRE(back.samples.size() == s.samples.size());
  CHECK((back.samples - s.samples).cwiseAbs().maxCoeff() == 0.0);
  std::remove(path.c_str());
}

TEST_CASE("wav: out-of-range samples are clamped, not wrapped") {
  const std::string path = temp_path("vaemm_clamp.wav");
  AudioSignal s;
  s.samples.resize(3);
  s.samples << 2.0, -2.0, 0.0;
  write_wav(path, s);
  const AudioSignal back = read_wav(path);
  CHECK(back.samples[0] == doctest::Approx(32767.0 / 32768.0));
  CHECK(back.samples[1] == doctest::Approx(-1.0));
  CHECK(back.samples[2] == 0.0);
  std::remove(path.c_str());
}

TEST_CASE("wav: multichannel input is rejected with a clear error") {
  const std::string path = temp_path("vaemm_stereo.wav");
  {
    // Minimal stereo header with an empty data chunk.
    std::ofstream out(path, std::ios::binary);
    auto u32 = [&](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
    auto u16 = [&](std::uint16_t v) { out.write(reinterpret_cast<const char*>(&v), 2); };
    out.write("RIFF", 4);
    u32(36);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    u32(16);
    u16(1);
    u16(2);  // stereo
    u32(16000);
    u32(64000);
    u16(4);
    u16(16);
    out.write("data", 4);
    u32(4);
    u32(0);
  }
  CHECK_THROWS_WITH_AS(read_wav(path), doctest::Contains("mono"), IoError);
  std::remove(path.c_str());
}

TEST_CASE("wav: missing file raises an I/O error") {
  CHECK_THROWS_AS(read_wav("/nonexistent/vaemm.wav"), IoError);
}
