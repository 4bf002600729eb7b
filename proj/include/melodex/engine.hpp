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

#ifndef MELODEX_ENGINE_HPP_
#define MELODEX_ENGINE_HPP_

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "melodex/core.hpp"
#include "melodex/fingerprint.hpp"
#include "melodex/fp_index.hpp"
#include "melodex/rank_merge.hpp"
#include "melodex/text_index.hpp"

namespace melodex {

struct EngineConfig {
  std::map<FieldKind, FieldProfile> profiles;  // one per text field
  ExtractorConfig extractor;
  FpIndexConfig fingerprint;

  static EngineConfig defaults();

  // Accepts a (possibly partial) JSON object and overlays it on defaults():
  //   {"text": {"lyrics": {"remove_stopwords": true, "ngram_max": 2}, ...},
  //    "extractor": {"relative_tolerance": 1e-6, ...},
  //    "fingerprint": {"toggle_bits": 1, "ber_threshold": 0.35,
  //                    "coarse_min_matches": null, "min_overlap_fraction": 0.8,
  //                    "expansion": "index" | "query"}}
  static EngineConfig from_json(std::string_view text);
  std::string to_json() const;

  void validate() const;
  // Index-shaping parameters only; query-time thresholds are excluded.
  std::string canonical_structure() const;
  std::string digest() const;

  bool operator==(const EngineConfig &) const = default;
};

// Everything a search needs, immutable once built.
struct IndexSet {
  EngineConfig config;
  std::vector<SongRecord> records;
  std::map<FieldKind, TextIndex> text;
  FpIndex audio;

  const SongRecord &record(SongId id) const { return records.at(id.value); }
  bool operator==(const IndexSet &) const = default;
};

struct BuildOptions {
  // 0 means std::thread::hardware_concurrency().
  unsigned threads = 0;
};

// Indexes every text field and fingerprints every record with an audio
// path. Records must carry ids 0..K-1 in order.
IndexSet build_indexes(std::vector<SongRecord> records, const EngineConfig &config,
                       const BuildOptions &options = {});
IndexSet build_from_corpus(const std::string &corpus_path, const EngineConfig &config,
                           const BuildOptions &options = {});

struct ResultRow {
  SongId song;
  std::string title;
  std::string artist;
  std::optional<std::string> album;
  std::optional<std::string> genre;
  Date release_date;
  double final_score = 0.0;
  std::map<FieldKind, double> breakdown;

  bool operator==(const ResultRow &) const = default;
};

struct SearchResponse {
  std::vector<ResultRow> results;
  MergeWeights applied_weights;
  // Per-field and "total" wall time in milliseconds.
  std::map<std::string, double> timing_ms;
};

struct ExecuteOptions {
  bool parallel = true;
  size_t limit = 20;
};

inline constexpr size_t kDefaultLimit = 20;

// Per-field search results before normalization.
struct FieldSearch {
  FieldKind field;
  FieldResult raw;
  double elapsed_ms = 0.0;
};

class Engine {
 public:
  explicit Engine(std::shared_ptr<const IndexSet> indexes);

  // validate -> per-field searches (concurrent unless options.parallel is
  // false) -> normalize -> merge -> date filter -> rank.
  SearchResponse execute(const Query &query, const ExecuteOptions &options = {}) const;

  // One field's raw search, as execute() runs it.
  FieldSearch search_field(const Query &query, FieldKind field) const;

  const IndexSet &indexes() const { return *indexes_; }
  const SongRecord *song(SongId id) const;

 private:
  std::shared_ptr<const IndexSet> indexes_;
  SpectralDifferenceExtractor extractor_;
};

// JSON wire forms shared by the CLI, the HTTP service and the C API.
//
// Query: {"lyrics", "title", "artist", "album", "genre": string,
//         "before", "after": "YYYY-MM-DD" | "YYYY", "limit": int,
//         "weights": {"title": 3, ...}}
// Unknown keys are rejected. `limit` is returned separately.
struct ParsedQuery {
  Query query;
  size_t limit = kDefaultLimit;
};
ParsedQuery parse_query_json(std::string_view text);

std::string response_to_json(const SearchResponse &response, bool include_timing = true);
std::string song_to_json(const SongRecord &record);

}  // namespace melodex

#endif  // MELODEX_ENGINE_HPP_
