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

#include "melodex/fp_index.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>

namespace melodex {

namespace {

void flip_combinations(uint32_t word, int first_bit, uint32_t remaining, std::vector<uint32_t> &out) {
  if (remaining == 0) return;
  for (int b = first_bit; b < 32; ++b) {
    const uint32_t flipped = word ^ (uint32_t(1) << b);
    out.push_back(flipped);
    flip_combinations(flipped, b + 1, remaining - 1, out);
  }
}

}  // namespace

uint32_t FpIndexConfig::min_matches_for(size_t query_length) const {
  if (coarse_min_matches) return *coarse_min_matches;
  const auto adaptive = uint32_t(std::ceil(0.02 * double(query_length)));
  return std::max<uint32_t>(3, adaptive);
}

void FpIndexConfig::validate() const {
  if (toggle_bits > kMaxToggleBits) {
    throw Error(ErrorCode::kInvalidArgument,
                "toggle_bits must be <= " + std::to_string(kMaxToggleBits));
  }
  if (coarse_min_matches && *coarse_min_matches == 0) {
    throw Error(ErrorCode::kInvalidArgument, "coarse_min_matches must be positive");
  }
  if (!(ber_threshold >= 0.0 && ber_threshold < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "ber_threshold must be in [0, 1)");
  }
  if (!(min_overlap_fraction > 0.0 && min_overlap_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "min_overlap_fraction must be in (0, 1]");
  }
}

std::string FpIndexConfig::canonical_structure() const {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "fp-index/v1 toggle_bits=%u expansion=%s", toggle_bits,
                expansion == ExpansionMode::kIndexTime ? "index" : "query");
  return buf;
}

uint64_t keys_per_subfp(uint32_t n) {
  uint64_t total = 1;
  uint64_t c = 1;
  for (uint32_t i = 1; i <= n && i <= 32; ++i) {
    c = c * (32 - i + 1) / i;
    total += c;
  }
  return total;
}

std::vector<uint32_t> expand_keys(SubFingerprint subfp, uint32_t n) {
  if (n > 32) throw Error(ErrorCode::kInvalidArgument, "expand_keys: n must be <= 32");
  std::vector<uint32_t> keys;
  keys.reserve(keys_per_subfp(n));
  keys.push_back(subfp);
  flip_combinations(subfp, 0, n, keys);
  std::sort(keys.begin(), keys.end());
  return keys;
}

int64_t Candidate::best_shift() const {
  int64_t best = 0;
  uint32_t best_count = 0;
  for (const auto &[shift, count] : shifts) {
    if (count > best_count) {
      best = shift;
      best_count = count;
    }
  }
  return best;
}

FineResult align_and_score(std::span<const SubFingerprint> stored, std::span<const SubFingerprint> query,
                           int64_t shift, const FpIndexConfig &config) {
  FineResult r;
  r.shift = shift;
  const int64_t lo = std::max<int64_t>(0, -shift);
  const int64_t hi = std::min<int64_t>(int64_t(query.size()), int64_t(stored.size()) - shift);
  r.overlap = hi > lo ? size_t(hi - lo) : 0;
  if (r.overlap == 0 || double(r.overlap) < config.min_overlap_fraction * double(query.size())) {
    r.status = FineStatus::kInsufficientOverlap;
    return r;
  }
  for (int64_t i = lo; i < hi; ++i) {
    r.bit_errors += uint64_t(std::popcount(query[size_t(i)] ^ stored[size_t(i + shift)]));
  }
  r.ber = double(r.bit_errors) / (32.0 * double(r.overlap));
  r.similarity = 1.0 - r.ber;
  r.status = r.ber <= config.ber_threshold ? FineStatus::kAccepted : FineStatus::kBelowThreshold;
  return r;
}

FpIndex::FpIndex(const FpIndexConfig &config)
    : toggle_bits_(config.toggle_bits), expansion_(config.expansion) {
  config.validate();
}

void FpIndex::check_config(const FpIndexConfig &config) const {
  config.validate();
  if (config.toggle_bits != toggle_bits_ || config.expansion != expansion_) {
    throw Error(ErrorCode::kConfigMismatch,
                "fingerprint index was built with " +
                    FpIndexConfig{toggle_bits_, {}, 0.35, 0.8, expansion_, true}.canonical_structure() +
                    ", query uses " + config.canonical_structure());
  }
}

void FpIndex::add_keys(SubFingerprint original, uint32_t list_id,
                       std::vector<std::pair<uint32_t, uint32_t>> &out) const {
  if (expansion_ == ExpansionMode::kQueryTime) {
    out.emplace_back(original, list_id);
    return;
  }
  for (uint32_t key : expand_keys(original, toggle_bits_)) out.emplace_back(key, list_id);
}

void FpIndex::insert_song(SongId song, const FingerprintSequence &seq) {
  if (store_.count(song)) {
    throw Error(ErrorCode::kDuplicateSong, "fingerprint index: song " + std::to_string(song.value) +
                                               " already stored");
  }
  std::vector<std::pair<uint32_t, uint32_t>> fresh;
  for (size_t offset = 0; offset < seq.subfps.size(); ++offset) {
    const SubFingerprint word = seq.subfps[offset];
    auto [it, inserted] = list_by_original_.try_emplace(word, uint32_t(lists_.size()));
    if (inserted) {
      list_keys_.push_back(word);
      lists_.emplace_back();
      add_keys(word, it->second, fresh);
    }
    auto &list = lists_[it->second];
    const FpPosting posting{song, uint32_t(offset)};
    if (list.empty() || list.back() < posting) {
      list.push_back(posting);
    } else {
      list.insert(std::upper_bound(list.begin(), list.end(), posting), posting);
    }
  }
  store_.emplace(song, seq.subfps);

  if (!fresh.empty()) {
    std::sort(fresh.begin(), fresh.end());
    const auto mid = key_map_.size();
    key_map_.insert(key_map_.end(), fresh.begin(), fresh.end());
    std::inplace_merge(key_map_.begin(), key_map_.begin() + std::ptrdiff_t(mid), key_map_.end());
  }
}

std::vector<uint32_t> FpIndex::resolve(uint32_t key) const {
  std::vector<uint32_t> out;
  auto lo = std::lower_bound(key_map_.begin(), key_map_.end(), std::make_pair(key, uint32_t(0)));
  for (; lo != key_map_.end() && lo->first == key; ++lo) out.push_back(lo->second);
  return out;
}

std::optional<uint32_t> FpIndex::list_for(SubFingerprint original) const {
  auto it = list_by_original_.find(original);
  if (it == list_by_original_.end()) return std::nullopt;
  return it->second;
}

size_t FpIndex::distinct_keys() const {
  size_t n = 0;
  for (size_t i = 0; i < key_map_.size(); ++i) {
    if (i == 0 || key_map_[i].first != key_map_[i - 1].first) ++n;
  }
  return n;
}

const std::vector<SubFingerprint> *FpIndex::fingerprint(SongId song) const {
  auto it = store_.find(song);
  return it == store_.end() ? nullptr : &it->second;
}

std::vector<Candidate> FpIndex::coarse_search(std::span<const SubFingerprint> query,
                                              const FpIndexConfig &config) const {
  check_config(config);
  std::map<SongId, Candidate> by_song;
  auto visit = [&](uint32_t key, int64_t position) {
    auto lo = std::lower_bound(key_map_.begin(), key_map_.end(), std::make_pair(key, uint32_t(0)));
    for (; lo != key_map_.end() && lo->first == key; ++lo) {
      for (const FpPosting &p : lists_[lo->second]) {
        Candidate &c = by_song[p.song];
        c.song = p.song;
        ++c.match_count;
        ++c.shifts[int64_t(p.offset) - position];
      }
    }
  };
  for (size_t i = 0; i < query.size(); ++i) {
    if (expansion_ == ExpansionMode::kIndexTime) {
      visit(query[i], int64_t(i));
    } else {
      for (uint32_t key : expand_keys(query[i], toggle_bits_)) visit(key, int64_t(i));
    }
  }

  const uint32_t min_matches = config.min_matches_for(query.size());
  std::vector<Candidate> out;
  for (auto &[song, c] : by_song) {
    if (c.match_count >= min_matches) out.push_back(std::move(c));
  }
  return out;
}

FineResult FpIndex::fine_search(const Candidate &candidate, std::span<const SubFingerprint> query,
                                const FpIndexConfig &config) const {
  const auto *stored = fingerprint(candidate.song);
  if (stored == nullptr) {
    throw Error(ErrorCode::kNotFound, "fine search: unknown song " + std::to_string(candidate.song.value));
  }
  const int64_t mode = candidate.best_shift();
  FineResult best = align_and_score(*stored, query, mode, config);
  if (!config.exhaustive_alignment) return best;
  // Lowest BER wins; ties go to the shift nearest the mode, then the smaller.
  const auto better = [mode](const FineResult &a, const FineResult &b) {
    const uint64_t lhs = a.bit_errors * b.overlap;
    const uint64_t rhs = b.bit_errors * a.overlap;
    if (lhs != rhs) return lhs < rhs;
    const int64_t da = a.shift > mode ? a.shift - mode : mode - a.shift;
    const int64_t db = b.shift > mode ? b.shift - mode : mode - b.shift;
    if (da != db) return da < db;
    return a.shift < b.shift;
  };
  for (int64_t shift = -int64_t(query.size()); shift <= int64_t(stored->size()); ++shift) {
    if (shift == mode) continue;
    FineResult r = align_and_score(*stored, query, shift, config);
    if (r.status == FineStatus::kInsufficientOverlap) continue;
    if (best.status == FineStatus::kInsufficientOverlap || better(r, best)) best = r;
  }
  return best;
}

AudioSearchResult FpIndex::search(const FingerprintSequence &query, const FpIndexConfig &config,
                                  size_t limit) const {
  AudioSearchResult result;
  if (query.subfps.empty()) {
    check_config(config);
    result.too_short = true;
    return result;
  }
  for (const Candidate &c : coarse_search(query.subfps, config)) {
    const FineResult fine = fine_search(c, query.subfps, config);
    if (fine.status == FineStatus::kAccepted) result.hits.push_back({c.song, fine.similarity});
  }
  std::sort(result.hits.begin(), result.hits.end(), [](const ScoredSong &a, const ScoredSong &b) {
    if (a.score != b.score) return a.score > b.score;
    return a.song < b.song;
  });
  if (result.hits.size() > limit) result.hits.resize(limit);
  return result;
}

void FpIndex::serialize(BinaryWriter &out) const {
  out.u32(toggle_bits_);
  out.u8(uint8_t(expansion_));
  out.u64(store_.size());
  for (const auto &[song, words] : store_) {
    out.u32(song.value);
    out.u64(words.size());
    for (SubFingerprint w : words) out.u32(w);
  }
  out.u64(lists_.size());
  for (size_t id = 0; id < lists_.size(); ++id) {
    out.u32(list_keys_[id]);
    out.u64(lists_[id].size());
    for (const FpPosting &p : lists_[id]) {
      out.u32(p.song.value);
      out.u32(p.offset);
    }
  }
}

FpIndex FpIndex::deserialize(BinaryReader &in) {
  FpIndexConfig config;
  config.toggle_bits = in.u32();
  const uint8_t mode = in.u8();
  if (mode > 1) throw Error(ErrorCode::kCorruptData, "fingerprint index: bad expansion mode");
  config.expansion = ExpansionMode(mode);
  if (config.toggle_bits > FpIndexConfig::kMaxToggleBits) {
    throw Error(ErrorCode::kCorruptData, "fingerprint index: bad toggle_bits");
  }
  FpIndex index(config);

  for (uint64_t n = in.count(12); n > 0; --n) {
    const SongId song(in.u32());
    std::vector<SubFingerprint> words(in.count(4));
    for (auto &w : words) w = in.u32();
    index.store_.emplace(song, std::move(words));
  }
  const uint64_t lists = in.count(12);
  index.lists_.resize(lists);
  index.list_keys_.resize(lists);
  for (uint32_t id = 0; id < lists; ++id) {
    const SubFingerprint key = in.u32();
    index.list_keys_[id] = key;
    if (!index.list_by_original_.emplace(key, id).second) {
      throw Error(ErrorCode::kCorruptData, "fingerprint index: duplicate canonical key");
    }
    auto &list = index.lists_[id];
    list.resize(in.count(8));
    for (auto &p : list) {
      p.song = SongId(in.u32());
      p.offset = in.u32();
      const auto *words = index.fingerprint(p.song);
      if (words == nullptr || p.offset >= words->size() || (*words)[p.offset] != key) {
        throw Error(ErrorCode::kCorruptData, "fingerprint index: posting disagrees with store");
      }
    }
    if (!std::is_sorted(list.begin(), list.end())) {
      throw Error(ErrorCode::kCorruptData, "fingerprint index: posting list out of order");
    }
    index.add_keys(key, id, index.key_map_);
  }
  std::sort(index.key_map_.begin(), index.key_map_.end());
  return index;
}

}  // namespace melodex
