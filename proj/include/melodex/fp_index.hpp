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

#ifndef MELODEX_FP_INDEX_HPP_
#define MELODEX_FP_INDEX_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "melodex/binary_io.hpp"
#include "melodex/core.hpp"
#include "melodex/fingerprint.hpp"
#include "melodex/text_index.hpp"

namespace melodex {

enum class ExpansionMode : uint8_t {
  // Every stored word is indexed under all variants within toggle_bits bit
  // flips; queries do one exact lookup per word.
  kIndexTime = 0,
  // Only original words are indexed; each query word is expanded instead.
  kQueryTime = 1,
};

struct FpIndexConfig {
  uint32_t toggle_bits = 1;
  // Minimum coarse hits for a song to reach fine search. Unset means
  // max(3, ceil(0.02 * query length)).
  std::optional<uint32_t> coarse_min_matches;
  double ber_threshold = 0.35;
  double min_overlap_fraction = 0.8;
  ExpansionMode expansion = ExpansionMode::kIndexTime;
  // Fine search starts at the most frequent coarse shift. When set, it then
  // scans every shift with enough overlap and keeps the lowest BER; when
  // clear, the most frequent shift is final. Consecutive words are highly
  // correlated, so under heavy corruption the vote can land a frame off.
  bool exhaustive_alignment = true;

  static constexpr uint32_t kMaxToggleBits = 3;

  bool operator==(const FpIndexConfig &) const = default;

  uint32_t min_matches_for(size_t query_length) const;
  void validate() const;
  // Only the parameters that shape the index; thresholds are query-time.
  std::string canonical_structure() const;
};

// 1 + sum_{i=1..n} C(32, i).
uint64_t keys_per_subfp(uint32_t n);

// The word itself plus every word reachable by flipping 1..n of its bits,
// sorted ascending.
std::vector<uint32_t> expand_keys(SubFingerprint subfp, uint32_t n);

struct FpPosting {
  SongId song;
  uint32_t offset = 0;  // position within the song's FingerprintSequence

  friend auto operator<=>(const FpPosting &, const FpPosting &) = default;
};

// Coarse-search evidence for one song.
struct Candidate {
  SongId song;
  uint32_t match_count = 0;
  // alignment shift (posting offset - query position) -> hits
  std::map<int64_t, uint32_t> shifts;

  // Most frequent shift; ties go to the smallest.
  int64_t best_shift() const;
};

enum class FineStatus { kAccepted, kBelowThreshold, kInsufficientOverlap };

struct FineResult {
  FineStatus status = FineStatus::kInsufficientOverlap;
  int64_t shift = 0;
  size_t overlap = 0;
  uint64_t bit_errors = 0;
  double ber = 1.0;
  double similarity = 0.0;
};

// Bit error rate of `query` against `stored` aligned at `shift`
// (query[i] vs stored[i + shift]) over the overlapping region.
FineResult align_and_score(std::span<const SubFingerprint> stored, std::span<const SubFingerprint> query,
                           int64_t shift, const FpIndexConfig &config);

struct AudioSearchResult {
  std::vector<ScoredSong> hits;  // score = similarity in [0, 1]
  bool too_short = false;
};

class FpIndex {
 public:
  explicit FpIndex(const FpIndexConfig &config = {});

  // Throws kDuplicateSong if the song is already stored.
  void insert_song(SongId song, const FingerprintSequence &seq);

  std::vector<Candidate> coarse_search(std::span<const SubFingerprint> query,
                                       const FpIndexConfig &config) const;
  FineResult fine_search(const Candidate &candidate, std::span<const SubFingerprint> query,
                         const FpIndexConfig &config) const;
  AudioSearchResult search(const FingerprintSequence &query, const FpIndexConfig &config,
                           size_t limit) const;

  uint32_t toggle_bits() const { return toggle_bits_; }
  ExpansionMode expansion() const { return expansion_; }

  // Canonical posting-list ids the key resolves to through the key map.
  std::vector<uint32_t> resolve(uint32_t key) const;
  std::optional<uint32_t> list_for(SubFingerprint original) const;
  const std::vector<FpPosting> &posting_list(uint32_t list_id) const { return lists_.at(list_id); }
  SubFingerprint list_key(uint32_t list_id) const { return list_keys_.at(list_id); }
  size_t list_count() const { return lists_.size(); }
  size_t distinct_keys() const;
  size_t key_entries() const { return key_map_.size(); }

  const std::map<SongId, std::vector<SubFingerprint>> &fingerprint_store() const { return store_; }
  const std::vector<SubFingerprint> *fingerprint(SongId song) const;

  void serialize(BinaryWriter &out) const;
  static FpIndex deserialize(BinaryReader &in);

  bool operator==(const FpIndex &) const = default;

 private:
  void check_config(const FpIndexConfig &config) const;
  void add_keys(SubFingerprint original, uint32_t list_id, std::vector<std::pair<uint32_t, uint32_t>> &out) const;

  uint32_t toggle_bits_;
  ExpansionMode expansion_;
  std::vector<SubFingerprint> list_keys_;
  std::vector<std::vector<FpPosting>> lists_;
  std::unordered_map<SubFingerprint, uint32_t> list_by_original_;
  // Sorted (key, list id) pairs: the key map.
  std::vector<std::pair<uint32_t, uint32_t>> key_map_;
  std::map<SongId, std::vector<SubFingerprint>> store_;
};

}  // namespace melodex

#endif  // MELODEX_FP_INDEX_HPP_
