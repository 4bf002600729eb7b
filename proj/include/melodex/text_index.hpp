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

#ifndef MELODEX_TEXT_INDEX_HPP_
#define MELODEX_TEXT_INDEX_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "melodex/binary_io.hpp"
#include "melodex/core.hpp"

namespace melodex {

// Tokenization and indexing parameters of one textual field.
struct FieldProfile {
  FieldKind field = FieldKind::kLyrics;
  bool remove_stopwords = false;
  uint32_t ngram_max = 1;

  bool operator==(const FieldProfile &) const = default;

  // Lyrics drop stop words; metadata keeps them. Lyrics and titles index
  // bigrams, the shorter name fields unigrams only.
  static FieldProfile default_for(FieldKind field);
};

// The pinned stop-word list, sorted. Bump kStopwordListVersion on any edit;
// it feeds the snapshot config digest.
inline constexpr uint32_t kStopwordListVersion = 1;
std::span<const std::string_view> stopwords();
bool is_stopword(std::string_view token);

// Lowercases and splits on maximal runs of non-word characters. Word
// characters are ASCII letters and digits plus non-ASCII letters; common
// Unicode punctuation and spaces separate tokens.
std::vector<std::string> tokenize(std::string_view text, const FieldProfile &profile);

// Contiguous k-grams for k = 1..min(n, tokens.size()), joined by one space,
// ordered by k then start position.
std::vector<std::string> ngrams(std::span<const std::string> tokens, uint32_t n);

struct Posting {
  SongId song;
  uint32_t term_frequency = 0;

  bool operator==(const Posting &) const = default;
};

struct PostingList {
  std::vector<Posting> entries;  // sorted by song, unique

  bool operator==(const PostingList &) const = default;
};

struct ScoredSong {
  SongId song;
  double score = 0.0;

  bool operator==(const ScoredSong &) const = default;
};

struct TextSearchResult {
  std::vector<ScoredSong> hits;
  // The query tokenized to nothing, as opposed to matching nothing.
  bool empty_query = false;
};

// Inverted index over the tokens and n-grams of one field, ranked with
// log-tf * smoothed idf:
//
//   score(d) = sum_t (1 + ln tf(t,d)) * (ln((N + 1) / (df(t) + 1)) + 1)
//
// over the distinct query terms t present in d. No length normalization, so
// a repeated chorus line raises a song's score.
class TextIndex {
 public:
  using PostingMap = std::map<std::string, PostingList, std::less<>>;

  explicit TextIndex(FieldProfile profile = {});

  // Throws kDuplicateSong if `song` was indexed before (even with empty text).
  void index_document(SongId song, std::string_view text);

  TextSearchResult search(std::string_view query_text, size_t limit) const;

  const FieldProfile &profile() const { return profile_; }
  // Documents with non-empty token sequences.
  size_t doc_count() const { return doc_lengths_.size(); }
  const std::map<SongId, uint32_t> &doc_lengths() const { return doc_lengths_; }
  const PostingMap &postings() const { return postings_; }
  const std::map<std::string, uint32_t, std::less<>> &document_frequencies() const { return df_; }
  uint32_t document_frequency(std::string_view term) const;
  const PostingList *find(std::string_view term) const;
  bool contains(SongId song) const { return seen_.count(song) != 0; }

  double idf(std::string_view term) const;

  void serialize(BinaryWriter &out) const;
  static TextIndex deserialize(BinaryReader &in);

  bool operator==(const TextIndex &) const = default;

 private:
  FieldProfile profile_;
  std::set<SongId> seen_;
  std::map<SongId, uint32_t> doc_lengths_;
  PostingMap postings_;
  std::map<std::string, uint32_t, std::less<>> df_;
};

}  // namespace melodex

#endif  // MELODEX_TEXT_INDEX_HPP_
