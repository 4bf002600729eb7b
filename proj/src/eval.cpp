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

#include "melodex/eval.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "melodex/audio.hpp"
#include "melodex/synth.hpp"

namespace melodex {

namespace fs = std::filesystem;
using json = nlohmann::json;

double signal_power(std::span<const float> samples) {
  if (samples.empty()) return 0.0;
  double sum = 0.0;
  for (float s : samples) sum += double(s) * double(s);
  return sum / double(samples.size());
}

std::vector<double> white_noise(size_t n, double power, uint64_t seed) {
  std::vector<double> noise(n);
  if (n == 0) return noise;
  SeededRng rng(seed);
  double mean = 0.0;
  for (double &v : noise) {
    v = rng.uniform(-1.0, 1.0);
    mean += v;
  }
  mean /= double(n);
  double raw = 0.0;
  for (double &v : noise) {
    v -= mean;
    raw += v * v;
  }
  raw /= double(n);
  const double gain = raw > 0.0 ? std::sqrt(power / raw) : 0.0;
  for (double &v : noise) v *= gain;
  return noise;
}

PcmAudio add_white_noise(const PcmAudio &audio, const NoiseSpec &spec) {
  if (std::isinf(spec.snr_db) && spec.snr_db > 0) return audio;
  if (std::isnan(spec.snr_db)) throw Error(ErrorCode::kInvalidArgument, "snr_db is NaN");
  const double power = signal_power(audio.samples);
  if (power <= 0.0) throw Error(ErrorCode::kZeroPower, "signal has zero power; SNR undefined");
  const double noise_power = power / std::pow(10.0, spec.snr_db / 10.0);
  const std::vector<double> noise = white_noise(audio.samples.size(), noise_power, spec.seed);
  PcmAudio out = audio;
  for (size_t i = 0; i < out.samples.size(); ++i) {
    out.samples[i] = float(std::clamp(double(out.samples[i]) + noise[i], -1.0, 1.0));
  }
  return out;
}

PcmAudio load_record_audio(const SongRecord &record) {
  if (!record.audio_path) throw Error(ErrorCode::kNotFound, "song " + std::to_string(record.id.value) + " has no audio");
  return read_wav_file(*record.audio_path);
}

namespace {

std::string format_value(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string format_ratio(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

void finish(EvalRow &row, double total_latency_ms) {
  if (row.queries > 0) {
    row.recall_at_1 = double(row.hits_at_1) / double(row.queries);
    row.recall_at_5 = double(row.hits_at_5) / double(row.queries);
    row.mean_latency_ms = total_latency_ms / double(row.queries);
  }
}

struct Trial {
  SongId song;
  PcmAudio clip;
  uint64_t noise_seed = 0;
  uint64_t flip_seed = 0;
};

std::vector<Trial> cut_trials(const IndexSet &indexes, double clip_seconds, uint32_t per_song, uint64_t seed,
                              const AudioLoader &loader) {
  const ExtractorConfig &ex = indexes.config.extractor;
  if (!(clip_seconds > 0.0)) throw Error(ErrorCode::kInvalidArgument, "clip_seconds must be positive");
  const size_t clip_len = size_t(clip_seconds * ex.target_rate);
  std::vector<Trial> trials;
  for (const SongRecord &r : indexes.records) {
    if (!r.audio_path || !indexes.audio.fingerprint(r.id)) continue;
    const PcmAudio full = resample(loader(r), ex.target_rate);
    for (uint32_t t = 0; t < per_song; ++t) {
      SeededRng rng(SeededRng::mix({seed, r.id.value, t}));
      Trial trial;
      trial.song = r.id;
      trial.clip.sample_rate = ex.target_rate;
      size_t start = 0;
      size_t len = full.samples.size();
      if (len > clip_len) {
        // Hop-aligned start: clip frames coincide with indexed frames.
        start = size_t(rng.below((len - clip_len) / ex.hop + 1)) * ex.hop;
        len = clip_len;
      }
      trial.clip.samples.assign(full.samples.begin() + std::ptrdiff_t(start),
                                full.samples.begin() + std::ptrdiff_t(start + len));
      trial.noise_seed = rng.next();
      trial.flip_seed = rng.next();
      trials.push_back(std::move(trial));
    }
  }
  return trials;
}

void flip_bits(std::vector<SubFingerprint> &words, uint32_t flips, uint64_t seed) {
  if (flips == 0) return;
  SeededRng rng(seed);
  flips = std::min<uint32_t>(flips, 32);
  for (SubFingerprint &w : words) {
    SubFingerprint mask = 0;
    while (uint32_t(std::popcount(mask)) < flips) mask |= SubFingerprint(1) << rng.below(32);
    w ^= mask;
  }
}

EvalRow run_audio(const std::vector<Trial> &trials, const FpIndex &index, const FpIndexConfig &config,
                  const ExtractorConfig &extractor, double snr_db, uint32_t bit_flips) {
  EvalRow row;
  double total_ms = 0.0;
  for (const Trial &trial : trials) {
    ++row.queries;
    try {
      const PcmAudio noisy = add_white_noise(trial.clip, {snr_db, trial.noise_seed});
      const auto t0 = std::chrono::steady_clock::now();
      FingerprintSequence seq = extract(noisy, extractor);
      flip_bits(seq.subfps, bit_flips, trial.flip_seed);
      const AudioSearchResult result = index.search(seq, config, 5);
      total_ms += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      if (result.too_short) {
        ++row.errors;
        continue;
      }
      if (!result.hits.empty() && result.hits.front().song == trial.song) ++row.hits_at_1;
      for (const ScoredSong &h : result.hits) {
        if (h.song == trial.song) {
          ++row.hits_at_5;
          break;
        }
      }
    } catch (const Error &) {
      ++row.errors;
    }
  }
  finish(row, total_ms);
  return row;
}

uint32_t integer_value(double v, std::string_view parameter) {
  if (!(v >= 0.0) || v != std::floor(v) || v > 1e9) {
    throw Error(ErrorCode::kInvalidArgument, std::string(parameter) + " must be a non-negative integer, got " +
                                                 format_value(v));
  }
  return uint32_t(v);
}

std::vector<PhraseQuery> default_phrases(const IndexSet &indexes, uint64_t seed) {
  const FieldProfile &profile = indexes.config.profiles.at(FieldKind::kLyrics);
  std::vector<PhraseQuery> phrases;
  for (const SongRecord &r : indexes.records) {
    const std::vector<std::string> tokens = tokenize(r.lyrics, profile);
    if (tokens.size() < 2) continue;
    SeededRng rng(SeededRng::mix({seed, r.id.value, 0x7e47}));
    const size_t pos = rng.below(tokens.size() - 1);
    phrases.push_back({tokens[pos] + " " + tokens[pos + 1], r.id});
  }
  return phrases;
}

EvalRow run_phrases(const IndexSet &indexes, const std::vector<PhraseQuery> &phrases, uint32_t n) {
  EngineConfig cfg = indexes.config;
  FieldProfile &profile = cfg.profiles.at(FieldKind::kLyrics);
  profile.ngram_max = n;
  cfg.validate();
  TextIndex index(profile);
  for (const SongRecord &r : indexes.records) index.index_document(r.id, r.lyrics);

  EvalRow row;
  double total_ms = 0.0;
  for (const PhraseQuery &q : phrases) {
    ++row.queries;
    const auto t0 = std::chrono::steady_clock::now();
    const TextSearchResult result = index.search(q.text, 5);
    total_ms += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    if (result.empty_query) {
      ++row.errors;
      continue;
    }
    if (!result.hits.empty() && result.hits.front().song == q.expected) ++row.hits_at_1;
    for (const ScoredSong &h : result.hits) {
      if (h.song == q.expected) {
        ++row.hits_at_5;
        break;
      }
    }
  }
  finish(row, total_ms);
  return row;
}

}  // namespace

std::string EvalReport::to_csv() const {
  std::string out = "experiment,parameter,value,queries,hits_at_1,hits_at_5,errors,recall_at_1,recall_at_5,error\n";
  for (const EvalRow &r : rows) {
    std::string error = r.error;
    for (char &c : error) {
      if (c == ',' || c == '\n' || c == '"') c = ' ';
    }
    out += r.experiment + "," + r.parameter + "," + r.value + "," + std::to_string(r.queries) + "," +
           std::to_string(r.hits_at_1) + "," + std::to_string(r.hits_at_5) + "," + std::to_string(r.errors) + "," +
           format_ratio(r.recall_at_1) + "," + format_ratio(r.recall_at_5) + "," + error + "\n";
  }
  return out;
}

std::string EvalReport::timing_csv() const {
  std::string out = "experiment,parameter,value,mean_latency_ms\n";
  for (const EvalRow &r : rows) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", r.mean_latency_ms);
    out += r.experiment + "," + r.parameter + "," + r.value + "," + buf + "\n";
  }
  return out;
}

std::string EvalReport::to_json(bool include_latency) const {
  json rows_json = json::array();
  for (const EvalRow &r : rows) {
    json j = {{"experiment", r.experiment}, {"parameter", r.parameter}, {"value", r.value},
              {"queries", r.queries},       {"hits_at_1", r.hits_at_1}, {"hits_at_5", r.hits_at_5},
              {"errors", r.errors},         {"recall_at_1", r.recall_at_1}, {"recall_at_5", r.recall_at_5}};
    if (include_latency) j["mean_latency_ms"] = r.mean_latency_ms;
    if (!r.error.empty()) j["error"] = r.error;
    rows_json.push_back(std::move(j));
  }
  return json{{"rows", rows_json}}.dump(2) + "\n";
}

void EvalReport::write(const std::string &directory) const {
  const fs::path dir(directory);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + directory + ": " + ec.message());
  const auto put = [&](const char *name, const std::string &text) {
    std::ofstream out(dir / name, std::ios::trunc);
    out << text;
    out.flush();
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + (dir / name).string());
  };
  put("report.csv", to_csv());
  put("timing.csv", timing_csv());
  put("summary.json", to_json(false));
}

EvalReport noise_recall_experiment(const IndexSet &indexes, const NoiseExperiment &experiment) {
  const std::vector<Trial> trials =
      cut_trials(indexes, experiment.clip_seconds, experiment.queries_per_song, experiment.seed, experiment.loader);
  EvalReport report;
  for (double snr : experiment.snr_db) {
    EvalRow row = run_audio(trials, indexes.audio, indexes.config.fingerprint, indexes.config.extractor, snr, 0);
    row.experiment = "noise";
    row.parameter = "snr_db";
    row.value = format_value(snr);
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::string_view sweep_parameter_name(SweepParameter p) {
  switch (p) {
    case SweepParameter::kNgramN: return "ngram_N";
    case SweepParameter::kToggleBits: return "toggle_bits";
    case SweepParameter::kCoarseMinMatches: return "coarse_min_matches";
    case SweepParameter::kBerThreshold: return "ber_threshold";
  }
  return "?";
}

SweepParameter parse_sweep_parameter(std::string_view name) {
  for (SweepParameter p : {SweepParameter::kNgramN, SweepParameter::kToggleBits, SweepParameter::kCoarseMinMatches,
                           SweepParameter::kBerThreshold}) {
    if (sweep_parameter_name(p) == name) return p;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown sweep parameter: " + std::string(name));
}

EvalReport sweep(const IndexSet &indexes, const SweepExperiment &experiment) {
  const std::string name(sweep_parameter_name(experiment.parameter));
  EvalReport report;

  std::vector<PhraseQuery> phrases;
  std::vector<Trial> trials;
  if (experiment.parameter == SweepParameter::kNgramN) {
    phrases = experiment.phrases.empty() ? default_phrases(indexes, experiment.seed) : experiment.phrases;
  } else {
    trials = cut_trials(indexes, experiment.clip_seconds, experiment.queries_per_song, experiment.seed,
                        experiment.loader);
  }

  for (double v : experiment.values) {
    EvalRow row;
    try {
      FpIndexConfig cfg = indexes.config.fingerprint;
      switch (experiment.parameter) {
        case SweepParameter::kNgramN:
          row = run_phrases(indexes, phrases, integer_value(v, name));
          break;
        case SweepParameter::kToggleBits: {
          cfg.toggle_bits = integer_value(v, name);
          cfg.validate();
          FpIndex rebuilt(cfg);
          for (const auto &[song, words] : indexes.audio.fingerprint_store()) {
            rebuilt.insert_song(song, FingerprintSequence{song, words, false});
          }
          row = run_audio(trials, rebuilt, cfg, indexes.config.extractor, experiment.snr_db, experiment.bit_flips);
          break;
        }
        case SweepParameter::kCoarseMinMatches:
          cfg.coarse_min_matches = integer_value(v, name);
          cfg.validate();
          row = run_audio(trials, indexes.audio, cfg, indexes.config.extractor, experiment.snr_db,
                          experiment.bit_flips);
          break;
        case SweepParameter::kBerThreshold:
          cfg.ber_threshold = v;
          cfg.validate();
          row = run_audio(trials, indexes.audio, cfg, indexes.config.extractor, experiment.snr_db,
                          experiment.bit_flips);
          break;
      }
    } catch (const Error &e) {
      row = EvalRow{};
      row.error = e.what();
    }
    row.experiment = "sweep";
    row.parameter = name;
    row.value = format_value(v);
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace melodex
