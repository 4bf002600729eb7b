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

#include "melodex/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "melodex/audio.hpp"
#include "melodex/corpus.hpp"

namespace melodex {

namespace fs = std::filesystem;

namespace {

constexpr std::array<std::string_view, 24> kSyllables = {
    "ka", "lo", "mi", "ran", "su", "te", "vo", "zel", "bri", "dan", "fe", "gul",
    "ho", "jin", "ku", "lar", "mo", "nes", "pi", "qua", "ros", "sha", "tu", "wen"};

constexpr std::array<std::string_view, 8> kGenres = {
    "pop", "rock", "jazz", "folk", "soul", "electronic", "hip hop", "country"};

constexpr std::array<std::string_view, 6> kFillers = {"the", "and", "you", "my", "in", "of"};

std::string pseudo_word(uint64_t n) {
  std::string w(kSyllables[n % kSyllables.size()]);
  n /= kSyllables.size();
  w += kSyllables[n % kSyllables.size()];
  return w;
}

std::string word_from(SeededRng &rng, uint64_t vocabulary) {
  // Vocabulary entries are spread over the syllable space by a fixed stride.
  return pseudo_word((rng.below(vocabulary) * 37 + 11) % (kSyllables.size() * kSyllables.size()));
}

std::string phrase(SeededRng &rng, size_t words, uint64_t vocabulary, bool fillers) {
  std::string out;
  for (size_t i = 0; i < words; ++i) {
    if (!out.empty()) out += ' ';
    if (fillers && rng.uniform() < 0.25) {
      out += kFillers[rng.below(kFillers.size())];
      out += ' ';
    }
    out += word_from(rng, vocabulary);
  }
  return out;
}

std::string capitalize(std::string s) {
  bool start = true;
  for (char &c : s) {
    if (start && c >= 'a' && c <= 'z') c = char(c - 32);
    start = c == ' ';
  }
  return s;
}

PcmAudio synth_audio(const SynthOptions &options, SeededRng &rng) {
  const double rate = options.sample_rate;
  const size_t n = size_t(options.seconds * rate);
  std::vector<double> x(n, 0.0);
  const double lo = std::log(320.0);
  const double hi = std::log(1900.0);
  constexpr double kTwoPi = 2.0 * std::numbers::pi;

  // Sweeps: log-frequency triangle waves between two random endpoints.
  for (int s = 0; s < 3; ++s) {
    const double a = rng.uniform(lo, hi);
    const double b = rng.uniform(lo, hi);
    const double period = rng.uniform(1.5, 5.0);
    const double amp = rng.uniform(0.5, 1.0);
    const double offset = rng.uniform();
    double phase = rng.uniform(0.0, kTwoPi);
    for (size_t i = 0; i < n; ++i) {
      const double u = std::fmod(double(i) / rate / period + offset, 1.0);
      const double tri = u < 0.5 ? 2.0 * u : 2.0 - 2.0 * u;
      const double f = std::exp(a + (b - a) * tri);
      phase += kTwoPi * f / rate;
      x[i] += amp * std::sin(phase);
    }
  }

  // Note sequences: plucked tones with a second harmonic.
  for (int v = 0; v < 6; ++v) {
    size_t start = 0;
    while (start < n) {
      const size_t len = size_t(rng.uniform(0.12, 0.45) * rate);
      const double f = std::exp(rng.uniform(lo, hi));
      const double amp = rng.uniform(0.3, 0.9);
      const double tau = rng.uniform(0.1, 0.4) * rate;
      const double attack = 0.01 * rate;
      const double phase0 = rng.uniform(0.0, kTwoPi);
      for (size_t i = 0; i < len && start + i < n; ++i) {
        const double env = std::min(1.0, double(i) / attack) * std::exp(-double(i) / tau);
        const double t = double(i) / rate;
        double s = std::sin(kTwoPi * f * t + phase0);
        if (2.0 * f < 2700.0) s += 0.4 * std::sin(2.0 * kTwoPi * f * t + phase0);
        x[start + i] += amp * env * s;
      }
      start += len;
    }
  }

  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::fabs(v));
  PcmAudio audio;
  audio.sample_rate = options.sample_rate;
  audio.samples.resize(n);
  const double gain = peak > 0.0 ? 0.8 / peak : 0.0;
  for (size_t i = 0; i < n; ++i) audio.samples[i] = float(x[i] * gain);
  return audio;
}

}  // namespace

uint64_t SeededRng::mix(std::initializer_list<uint64_t> parts) {
  uint64_t h = 0x9e3779b97f4a7c15ULL;
  for (uint64_t p : parts) {
    uint64_t z = h ^ (p + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    h = z ^ (z >> 31);
  }
  return h;
}

uint64_t SeededRng::below(uint64_t n) {
  if (n == 0) return 0;
  // Rejection sampling keeps the result unbiased.
  const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t v;
  do {
    v = engine_();
  } while (v >= limit);
  return v % n;
}

SynthSong synth_song(const SynthOptions &options, uint32_t index) {
  SeededRng rng(SeededRng::mix({options.seed, index, 0x5eed}));
  constexpr uint64_t kVocabulary = 300;

  SynthSong song;
  SongRecord &r = song.record;
  r.id = SongId(index);
  r.title = capitalize(phrase(rng, 2 + rng.below(2), kVocabulary, false));
  SeededRng artist_rng(SeededRng::mix({options.seed, index % 12, 0xa57}));
  r.artist = capitalize(phrase(artist_rng, 2, kVocabulary, false));
  r.album = capitalize(phrase(rng, 2, kVocabulary, false));
  r.genre = std::string(kGenres[rng.below(kGenres.size())]);
  r.release_date = Date{int(1960 + rng.below(64)), int(1 + rng.below(12)), int(1 + rng.below(28))};

  const std::string chorus = phrase(rng, 6, kVocabulary, true);
  std::string lyrics;
  for (int verse = 0; verse < 3; ++verse) {
    for (int line = 0; line < 2; ++line) lyrics += phrase(rng, 6, kVocabulary, true) + "\n";
    lyrics += chorus + "\n";
  }
  r.lyrics = lyrics;
  song.audio = synth_audio(options, rng);
  return song;
}

std::string write_synthetic_corpus(const std::string &directory, const SynthOptions &options) {
  const fs::path dir(directory);
  std::error_code ec;
  fs::create_directories(dir / "audio", ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + directory + ": " + ec.message());
  const fs::path corpus = dir / "corpus.jsonl";
  std::ofstream out(corpus, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + corpus.string());
  for (uint32_t i = 0; i < options.songs; ++i) {
    SynthSong song = synth_song(options, i);
    char name[32];
    std::snprintf(name, sizeof(name), "song-%04u.wav", i);
    write_wav_file((dir / "audio" / name).string(), song.audio);
    song.record.audio_path = std::string("audio/") + name;
    out << to_corpus_line(song.record) << "\n";
  }
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "short write: " + corpus.string());
  return corpus.string();
}

}  // namespace melodex
