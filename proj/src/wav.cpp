// vaemm/wav.cpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#include "vaemm/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace vaemm {

namespace {

constexpr double kPcmScale = 32768.0;

std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint16_t read_u16(std::istream& in) {
  unsigned char b[2];
  in.read(reinterpret_cast<char*>(b), 2);
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

void write_u32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

void write_u16(std::ostream& out, std::uint16_t v) {
  const char b[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
  out.write(b, 2);
}

}  // namespace

AudioSignal read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open WAV file: " + path);

  char tag[4];
  in.read(tag, 4);
  if (!in || std::memcmp(tag, "RIFF", 4) != 0) throw IoError(path + ": not a RIFF file");
  read_u32(in);  // riff size
  in.read(tag, 4);
  if (!in || std::memcmp(tag, "WAVE", 4) != 0) throw IoError(path + ": not a WAVE file");

  bool have_fmt = false;
  std::uint16_t channels = 0, bits = 0;
  std::uint32_t sample_rate = 0;
  std::vector<char> data;

  while (in.read(tag, 4)) {
    const std::uint32_t chunk_size = read_u32(in);
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      const std::uint16_t format = read_u16(in);
      channels = read_u16(in);
      sample_rate = read_u32(in);
      read_u32(in);  // byte rate
      read_u16(in);  // block align
      bits = read_u16(in);
      if (chunk_size > 16) in.ignore(chunk_size - 16);
      if (format != 1) throw IoError(path + ": only PCM WAV is supported");
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      data.resize(chunk_size);
      in.read(data.data(), chunk_size);
      if (!in) throw IoError(path + ": truncated data chunk");
      break;
    } else {
      in.ignore(chunk_size + (chunk_size & 1));  // chunks are word-aligned
    }
  }

  if (!have_fmt || data.empty()) throw IoError(path + ": missing fmt or data chunk");
  if (channels != 1)
    throw IoError(path + ": expected mono input, got " + std::to_string(channels) + " channels");
  if (bits != 16) throw IoError(path + ": expected 16-bit PCM, got " + std::to_string(bits) + "-bit");

  const Eigen::Index n = static_cast<Eigen::Index>(data.size() / 2);
  AudioSignal signal;
  signal.sample_rate = static_cast<int>(sample_rate);
  signal.samples.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    std::int16_t s;
    std::memcpy(&s, data.data() + 2 * i, 2);
    signal.samples[i] = static_cast<double>(s) / kPcmScale;
  }
  return signal;
}

void write_wav(const std::string& path, const AudioSignal& signal) {
  if (signal.sample_rate <= 0) throw ValidationError("write_wav: sample_rate must be positive");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open WAV file for writing: " + path);

  const std::uint32_t n = static_cast<std::uint32_t>(signal.samples.size());
  const std::uint32_t data_bytes = 2 * n;

  out.write("RIFF", 4);
  write_u32(out, 36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  write_u32(out, 16);
  write_u16(out, 1);  // PCM
  write_u16(out, 1);  // mono
  write_u32(out, static_cast<std::uint32_t>(signal.sample_rate));
  write_u32(out, static_cast<std::uint32_t>(signal.sample_rate) * 2);
  write_u16(out, 2);
  write_u16(out, 16);
  out.write("data", 4);
  write_u32(out, data_bytes);

  for (Eigen::Index i = 0; i < signal.samples.size(); ++i) {
    const double clamped = std::clamp(signal.samples[i], -1.0, 32767.0 / kPcmScale);
    const auto s = static_cast<std::int16_t>(std::lrint(clamped * kPcmScale));
    write_u16(out, static_cast<std::uint16_t>(s));
  }
  if (!out) throw IoError("failed writing WAV file: " + path);
}

}  // namespace vaemm
