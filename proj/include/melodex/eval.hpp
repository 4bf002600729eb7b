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

#ifndef MELODEX_EVAL_HPP_
#define MELODEX_EVAL_HPP_

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "melodex/core.hpp"
#include "melodex/engine.hpp"

namespace melodex {

inline constexpr double kNoNoise = std::numeric_limits<double>::infinity();

struct NoiseSpec {
  double snr_db = kNoNoise;  // +inf leaves the audio untouched
  uint64_t seed = 0;
};

// Mean of x^2.
double signal_power(std::span<const float> samples);

// n samples of zero-mean uniform noise scaled to exactly `power`.
std::vector<double> white_noise(size_t n, double power, uint64_t seed);

// Adds white_noise() at the requested SNR and clips to [-1, 1]. Throws
// kZeroPower for a silent input (unless snr_db is +inf).
PcmAudio add_white_noise(const PcmAudio &audio, const NoiseSpec &spec);

struct EvalRow {
  std::string experiment;  // "noise" or "sweep"
  std::string parameter;   // snr_db, ngram_N, toggle_bits, ...
  std::string value;
  uint64_t queries = 0;
  uint64_t hits_at_1 = 0;
  uint64_t hits_at_5 = 0;
  uint64_t errors = 0;  // failed queries; counted as misses
  double recall_at_1 = 0.0;
  double recall_at_5 = 0.0;
  double mean_latency_ms = 0.0;
  std::string error;  // whole-row failure, e.g. an invalid sweep value
};

struct EvalReport {
  std::vector<EvalRow> rows;

  // Deterministic table; latency lives in timing_csv() so reruns with the
  // same seed reproduce this byte for byte.
  std::string to_csv() const;
  std::string timing_csv() const;
  std::string to_json(bool include_latency = false) const;
  // report.csv, timing.csv and summary.json under `directory`.
  void write(const std::string &directory) const;
};

// Loads a song's audio for clip cutting. Default: read the WAV at
// record.audio_path.
using AudioLoader = std::function<PcmAudio(const SongRecord &)>;
PcmAudio load_record_audio(const SongRecord &record);

struct NoiseExperiment {
  std::vector<double> snr_db = {kNoNoise, 30.0, 20.0, 10.0, 0.0};
  double clip_seconds = 3.0;
  uint32_t queries_per_song = 1;
  uint64_t seed = 1;
  AudioLoader loader = load_record_audio;
};

// For each song with audio and each trial: cut a hop-aligned clip at a
// seeded position, add noise at every SNR level (same clip and noise
// pattern across levels), fingerprint it and run the audio search.
EvalReport noise_recall_experiment(const IndexSet &indexes, const NoiseExperiment &experiment);

enum class SweepParameter { kNgramN, kToggleBits, kCoarseMinMatches, kBerThreshold };
std::string_view sweep_parameter_name(SweepParameter p);
SweepParameter parse_sweep_parameter(std::string_view name);

struct PhraseQuery {
  std::string text;
  SongId expected;
};

struct SweepExperiment {
  SweepParameter parameter = SweepParameter::kBerThreshold;
  std::vector<double> values;
  // Audio suites (every parameter except ngram_N).
  double snr_db = kNoNoise;
  // Bits flipped at random positions in every query sub-fingerprint.
  uint32_t bit_flips = 0;
  double clip_seconds = 3.0;
  uint32_t queries_per_song = 1;
  // ngram_N suite. Empty: one phrase of two adjacent lyric tokens per song.
  std::vector<PhraseQuery> phrases;
  uint64_t seed = 1;
  AudioLoader loader = load_record_audio;
};

// One row per value. The lyrics index is rebuilt for ngram_N and the
// fingerprint index for toggle_bits; thresholds only change the query
// config.
EvalReport sweep(const IndexSet &indexes, const SweepExperiment &experiment);

}  // namespace melodex

#endif  // MELODEX_EVAL_HPP_
