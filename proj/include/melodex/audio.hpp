// Copyright 2026 The Melodex Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MELODEX_AUDIO_HPP_
#define MELODEX_AUDIO_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "melodex/core.hpp"

namespace melodex {

// Decodes a RIFF/WAVE container holding integer PCM (8/16/24/32-bit) or
// 32-bit IEEE float, mono or stereo. Stereo is averaged down to mono and
// integer samples are divided by 2^(bits-1), so -32768 maps to exactly -1.
//
// Throws kUnsupportedFormat for anything else (compressed formats, more than
// two channels) and kCorruptData when the container is truncated.
PcmAudio decode_wav(std::span<const uint8_t> bytes);
PcmAudio read_wav_file(const std::string &path);

// 16-bit mono PCM writer. Samples are clipped to [-1, 1] and rounded.
std::vector<uint8_t> encode_wav16(const PcmAudio &audio);
void write_wav_file(const std::string &path, const PcmAudio &audio);

// Linear-interpolation resampler. Output sample j sits at source position
// j * source_rate / target_rate; positions past the last sample hold it.
// Output length is floor(len * target / source). Identity when rates match.
PcmAudio resample(const PcmAudio &audio, uint32_t target_rate);

}  // namespace melodex

#endif  // MELODEX_AUDIO_HPP_
