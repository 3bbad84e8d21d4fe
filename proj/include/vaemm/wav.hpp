// vaemm/wav.hpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef VAEMM_WAV_HPP_
#define VAEMM_WAV_HPP_

#include <string>

#include "vaemm/stft.hpp"

namespace vaemm {

/// Reads a mono 16-bit PCM little-endian RIFF/WAVE file. Multichannel or
/// non-PCM input is rejected. Samples are scaled to [-1, 1) doubles.
AudioSignal read_wav(const std::string& path);

/// Writes mono 16-bit PCM; samples are clamped to [-1, 1] before quantizing.
void write_wav(const std::string& path, const AudioSignal& signal);

}  // namespace vaemm

#endif  // VAEMM_WAV_HPP_
