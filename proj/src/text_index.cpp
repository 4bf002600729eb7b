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

#include "melodex/text_index.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <unordered_map>

namespace melodex {

namespace {

// Sorted; binary-searched by is_stopword().
constexpr auto kStopwords = std::to_array<std::string_view>({
    "a",       "about",   "above",     "after",      "again",    "against", "all",
    "am",      "an",      "and",       "any",        "are",      "as",      "at",
    "be",      "because", "been",      "before",     "being",    "below",   "between",
    "both",    "but",     "by",        "can",        "could",    "did",     "do",
    "does",    "doing",   "down",      "during",     "each",     "few",     "for",
    "from",    "further", "had",       "has",        "have",     "having",  "he",
    "her",     "here",    "hers",      "herself",    "him",      "himself", "his",
    "how",     "i",       "if",        "in",         "into",     "is",      "it",
    "its",     "itself",  "just",      "me",         "more",     "most",    "my",
    "myself",  "no",      "nor",       "not",        "now",      "of",      "off",
    "on",      "once",    "only",      "or",         "other",    "ought",   "our",
    "ours",    "ourselves", "out",     "over",       "own",      "same",    "she",
    "should",  "so",      "some",      "stop",       "such",     "than",    "that",
    "the",     "their",   "theirs",    "them",       "themselves", "then",  "there",
    "these",   "they",    "this",      "those",      "through",  "to",      "too",
    "under",   "until",   "up",        "upon",       "very",     "was",     "we",
    "were",    "what",    "when",      "where",      "which",    "while",   "who",
    "whom",    "why",     "will",      "with",       "would",    "you",     "your",
    "yours",   "yourself",
});
static_assert(std::is_sorted(kStopwords.begin(), kStopwords.end()));

constexpr char32_t kReplacement = 0xFFFD;

// Decodes one UTF-8 sequence starting at text[i]; advances i. Malformed
// input yields U+FFFD and consumes one byte.
char32_t next_codepoint(std::string_view text, size_t &i) {
  const auto b0 = uint8_t(text[i]);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  int len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++i;
    return kReplacement;
  }
  if (i + len > text.size()) {
    ++i;
    return kReplacement;
  }
  for (int k = 1; k < len; ++k) {
    const auto b = uint8_t(text[i + k]);
    if ((b & 0xC0) != 0x80) {
      ++i;
      return kReplacement;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  i += len;
  return cp;
}

void append_utf8(std::string &out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(char(cp));
  } else if (cp < 0x800) {
    out.push_back(char(0xC0 | (cp >> 6)));
    out.push_back(char(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(char(0xE0 | (cp >> 12)));
    out.push_back(char(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(char(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(char(0xF0 | (cp >> 18)));
    out.push_back(char(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(char(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(char(0x80 | (cp & 0x3F)));
  }
}

bool is_word_char(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
  }
  if (cp == kReplacement) return false;
  if (cp <= 0xBF) return false;                      // Latin-1 controls, punctuation, NBSP
  if (cp == 0xD7 || cp == 0xF7) return false;        // multiplication / division signs
  if (cp >= 0x2000 && cp <= 0x206F) return false;    // general punctuation
  if (cp >= 0x20A0 && cp <= 0x20CF) return false;    // currency
  if (cp >= 0x2190 && cp <= 0x2BFF) return false;    // arrows, math, symbols
  if (cp >= 0x2E00 && cp <= 0x2E7F) return false;    // supplemental punctuation
  if (cp >= 0x3000 && cp <= 0x303F) return false;    // CJK punctuation
  if (cp >= 0xFE30 && cp <= 0xFE4F) return false;
  if (cp >= 0xFF00 && cp <= 0xFF0F) return false;    // fullwidth punctuation
  if (cp >= 0xFF1A && cp <= 0xFF20) return false;
  if (cp >= 0x1F000 && cp <= 0x1FAFF) return false;  // emoji and pictographs
  return true;
}

// Lowercase mapping for ASCII, Latin-1, Latin Extended-A, Greek and
// Cyrillic; everything else is returned unchanged.
char32_t fold_case(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 32;
  if (cp < 0xC0) return cp;
  if (cp <= 0xDE) return cp == 0xD7 ? cp : cp + 32;
  if (cp >= 0x100 && cp <= 0x17F) {
    if (cp == 0x130) return 'i';
    if (cp == 0x178) return 0xFF;
    if ((cp >= 0x139 && cp <= 0x148) || (cp >= 0x179 && cp <= 0x17E)) {
      return (cp & 1) ? cp + 1 : cp;
    }
    if (cp == 0x138 || cp == 0x149 || cp == 0x17F) return cp;
    return (cp & 1) ? cp : cp + 1;
  }
  if (cp >= 0x391 && cp <= 0x3AB && cp != 0x3A2) return cp + 32;
  if (cp == 0x386) return 0x3AC;
  if (cp >= 0x388 && cp <= 0x38A) return cp + 37;
  if (cp == 0x38C) return 0x3CC;
  if (cp == 0x38E || cp == 0x38F) return cp + 63;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 32;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 80;
  return cp;
}

}  // namespace

FieldProfile FieldProfile::default_for(FieldKind field) {
  switch (field) {
    case FieldKind::kLyrics: return {field, true, 2};
    case FieldKind::kTitle: return {field, false, 2};
    case FieldKind::kArtist:
    case FieldKind::kAlbum:
    case FieldKind::kGenre: return {field, false, 1};
    case FieldKind::kAudio: break;
  }
  throw Error(ErrorCode::kInvalidArgument, "audio has no text profile");
}

std::span<const std::string_view> stopwords() { return kStopwords; }

bool is_stopword(std::string_view token) {
  return std::binary_search(kStopwords.begin(), kStopwords.end(), token);
}

std::vector<std::string> tokenize(std::string_view text, const FieldProfile &profile) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (current.empty()) return;
    if (!(profile.remove_stopwords && is_stopword(current))) tokens.push_back(current);
    current.clear();
  };
  size_t i = 0;
  while (i < text.size()) {
    const char32_t cp = next_codepoint(text, i);
    if (is_word_char(cp)) {
      append_utf8(current, fold_case(cp));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

std::vector<std::string> ngrams(std::span<const std::string> tokens, uint32_t n) {
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "ngrams: n must be >= 1");
  std::vector<std::string> out;
  const size_t kmax = std::min<size_t>(n, tokens.size());
  for (size_t k = 1; k <= kmax; ++k) {
    for (size_t start = 0; start + k <= tokens.size(); ++start) {
      std::string gram = tokens[start];
      for (size_t j = 1; j < k; ++j) {
        gram += ' ';
        gram += tokens[start + j];
      }
      out.push_back(std::move(gram));
    }
  }
  return out;
}

TextIndex::TextIndex(FieldProfile profile) : profile_(profile) {
  if (profile_.ngram_max == 0) throw Error(ErrorCode::kInvalidArgument, "ngram_max must be >= 1");
  if (!is_text_field(profile_.field)) throw Error(ErrorCode::kInvalidArgument, "text index over audio field");
}

void TextIndex::index_document(SongId song, std::string_view text) {
  if (!seen_.insert(song).second) {
    throw Error(ErrorCode::kDuplicateSong,
                std::string(field_name(profile_.field)) + " index: song " + std::to_string(song.value) +
                    " already indexed");
  }
  const auto tokens = tokenize(text, profile_);
  if (tokens.empty()) return;
  doc_lengths_[song] = uint32_t(tokens.size());

  std::map<std::string, uint32_t, std::less<>> tf;
  for (auto &term : ngrams(tokens, profile_.ngram_max)) ++tf[std::move(term)];

  for (auto &[term, count] : tf) {
    auto &entries = postings_[term].entries;
    auto pos = std::lower_bound(entries.begin(), entries.end(), song,
                                [](const Posting &p, SongId s) { return p.song < s; });
    entries.insert(pos, Posting{song, count});
    ++df_[term];
  }
}

uint32_t TextIndex::document_frequency(std::string_view term) const {
  auto it = df_.find(term);
  return it == df_.end() ? 0 : it->second;
}

const PostingList *TextIndex::find(std::string_view term) const {
  auto it = postings_.find(term);
  return it == postings_.end() ? nullptr : &it->second;
}

double TextIndex::idf(std::string_view term) const {
  const double n = double(doc_count());
  const double df = double(document_frequency(term));
  return std::log((n + 1.0) / (df + 1.0)) + 1.0;
}

TextSearchResult TextIndex::search(std::string_view query_text, size_t limit) const {
  TextSearchResult result;
  const auto tokens = tokenize(query_text, profile_);
  if (tokens.empty()) {
    result.empty_query = true;
    return result;
  }
  auto terms = ngrams(tokens, profile_.ngram_max);
  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());

  // Terms are visited in sorted order so every song's sum has a fixed order.
  std::unordered_map<uint32_t, double> acc;
  for (const auto &term : terms) {
    const PostingList *list = find(term);
    if (list == nullptr) continue;
    const double w = idf(term);
    for (const Posting &p : list->entries) {
      acc[p.song.value] += (1.0 + std::log(double(p.term_frequency))) * w;
    }
  }

  result.hits.reserve(acc.size());
  for (const auto &[song, score] : acc) {
    if (score > 0.0) result.hits.push_back({SongId(song), score});
  }
  std::sort(result.hits.begin(), result.hits.end(), [](const ScoredSong &a, const ScoredSong &b) {
    if (a.score != b.score) return a.score > b.score;
    return a.song < b.song;
  });
  if (result.hits.size() > limit) result.hits.resize(limit);
  return result;
}

void TextIndex::serialize(BinaryWriter &out) const {
  out.u8(uint8_t(profile_.field));
  out.boolean(profile_.remove_stopwords);
  out.u32(profile_.ngram_max);
  out.u64(seen_.size());
  for (SongId s : seen_) out.u32(s.value);
  out.u64(doc_lengths_.size());
  for (const auto &[s, len] : doc_lengths_) {
    out.u32(s.value);
    out.u32(len);
  }
  out.u64(postings_.size());
  for (const auto &[term, list] : postings_) {
    out.str(term);
    out.u32(document_frequency(term));
    out.u64(list.entries.size());
    for (const Posting &p : list.entries) {
      out.u32(p.song.value);
      out.u32(p.term_frequency);
    }
  }
}

TextIndex TextIndex::deserialize(BinaryReader &in) {
  FieldProfile profile;
  const uint8_t field = in.u8();
  if (field > uint8_t(FieldKind::kGenre)) throw Error(ErrorCode::kCorruptData, "text index: bad field kind");
  profile.field = FieldKind(field);
  profile.remove_stopwords = in.boolean();
  profile.ngram_max = in.u32();
  if (profile.ngram_max == 0) throw Error(ErrorCode::kCorruptData, "text index: ngram_max 0");
  TextIndex index(profile);

  for (uint64_t n = in.count(4); n > 0; --n) index.seen_.insert(SongId(in.u32()));
  for (uint64_t n = in.count(8); n > 0; --n) {
    const SongId s(in.u32());
    index.doc_lengths_[s] = in.u32();
  }
  for (uint64_t n = in.count(8 + 4 + 8); n > 0; --n) {
    std::string term = in.str();
    const uint32_t df = in.u32();
    PostingList list;
    const uint64_t entries = in.count(8);
    list.entries.reserve(entries);
    for (uint64_t k = 0; k < entries; ++k) {
      const SongId s(in.u32());
      const uint32_t tf = in.u32();
      if (tf == 0 || (!list.entries.empty() && !(list.entries.back().song < s))) {
        throw Error(ErrorCode::kCorruptData, "text index: posting list out of order");
      }
      list.entries.push_back({s, tf});
    }
    if (df != list.entries.size()) throw Error(ErrorCode::kCorruptData, "text index: df mismatch");
    index.df_.emplace(term, df);
    index.postings_.emplace(std::move(term), std::move(list));
  }
  return index;
}

}  // namespace melodex
