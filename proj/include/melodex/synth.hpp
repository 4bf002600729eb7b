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

#ifndef MELODEX_SYNTH_HPP_
#define MELODEX_SYNTH_HPP_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "melodex/core.hpp"

namespace melodex {

// Portable seeded generator: mt19937_64 output mapped by hand, so streams
// do not depend on the standard library's distribution implementations.
class SeededRng {
 public:
  explicit SeededRng(uint64_t seed) : engine_(seed) {}
  // Mixes several integers into one seed (splitmix64 finalizer).
  static uint64_t mix(std::initializer_list<uint64_t> parts);

  uint64_t next() { return engine_(); }
  // Uniform in [0, 1).
  double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n).
  uint64_t below(uint64_t n);

 private:
  std::mt19937_64 engine_;
};

struct SynthOptions {
  uint32_t songs = 50;
  double seconds = 12.0;
  uint32_t sample_rate = 5512;
  uint64_t seed = 1;
};

struct SynthSong {
  SongRecord record;  // audio_path unset
  PcmAudio audio;
};

// Song `index` of a synthetic corpus: metadata and lyrics drawn from fixed
// word pools, audio a mixture of log-frequency sweeps and note sequences
// between 300 and 2000 Hz. Pure function of (options, index).
SynthSong synth_song(const SynthOptions &options, uint32_t index);

// Writes <dir>/corpus.jsonl and <dir>/audio/song-NNNN.wav; returns the
// corpus file path.
std::string write_synthetic_corpus(const std::string &directory, const SynthOptions &options);

}  // namespace melodex

#endif  // MELODEX_SYNTH_HPP_
