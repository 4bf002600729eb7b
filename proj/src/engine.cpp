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

#include "melodex/engine.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <future>
#include <limits>
#include <thread>

#include "json.hpp"
#include "melodex/audio.hpp"
#include "melodex/binary_io.hpp"
#include "melodex/corpus.hpp"

namespace melodex {

using json = nlohmann::json;

namespace {

constexpr size_t kUnlimited = std::numeric_limits<size_t>::max();

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

template <typename T>
void read_if(const json &obj, const char *key, T &out) {
  auto it = obj.find(key);
  if (it != obj.end() && !it->is_null()) out = it->get<T>();
}

const json &object_at(const json &obj, const char *key) {
  static const json kEmpty = json::object();
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return kEmpty;
  if (!it->is_object()) throw Error(ErrorCode::kInvalidArgument, std::string("config: '") + key + "' must be an object");
  return *it;
}

void reject_unknown(const json &obj, std::initializer_list<std::string_view> known, const std::string &where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
      throw Error(ErrorCode::kInvalidArgument, "config: unknown key '" + it.key() + "' in " + where);
    }
  }
}

}  // namespace

EngineConfig EngineConfig::defaults() {
  EngineConfig c;
  for (FieldKind f : kTextFields) c.profiles[f] = FieldProfile::default_for(f);
  return c;
}

EngineConfig EngineConfig::from_json(std::string_view text) {
  EngineConfig c = defaults();
  if (trim(text).empty()) return c;
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "config must be a JSON object");
    reject_unknown(j, {"text", "extractor", "fingerprint"}, "config");
    const json &tj = object_at(j, "text");
    for (auto it = tj.begin(); it != tj.end(); ++it) {
      auto field = parse_field(it.key());
      if (!field || !is_text_field(*field)) throw Error(ErrorCode::kInvalidArgument, "config: unknown text field " + it.key());
      if (!it->is_object()) throw Error(ErrorCode::kInvalidArgument, "config: text." + it.key() + " must be an object");
      reject_unknown(*it, {"remove_stopwords", "ngram_max"}, "text." + it.key());
      FieldProfile &p = c.profiles[*field];
      read_if(*it, "remove_stopwords", p.remove_stopwords);
      read_if(*it, "ngram_max", p.ngram_max);
    }
    const json &ej = object_at(j, "extractor");
    reject_unknown(ej,
                   {"target_rate", "frame_length", "hop", "band_count", "min_freq", "max_freq", "relative_tolerance"},
                   "extractor");
    read_if(ej, "target_rate", c.extractor.target_rate);
    read_if(ej, "frame_length", c.extractor.frame_length);
    read_if(ej, "hop", c.extractor.hop);
    read_if(ej, "band_count", c.extractor.band_count);
    read_if(ej, "min_freq", c.extractor.min_freq);
    read_if(ej, "max_freq", c.extractor.max_freq);
    read_if(ej, "relative_tolerance", c.extractor.relative_tolerance);
    const json &fj = object_at(j, "fingerprint");
    reject_unknown(fj,
                   {"toggle_bits", "ber_threshold", "min_overlap_fraction", "exhaustive_alignment",
                    "coarse_min_matches", "expansion"},
                   "fingerprint");
    read_if(fj, "toggle_bits", c.fingerprint.toggle_bits);
    read_if(fj, "ber_threshold", c.fingerprint.ber_threshold);
    read_if(fj, "min_overlap_fraction", c.fingerprint.min_overlap_fraction);
    read_if(fj, "exhaustive_alignment", c.fingerprint.exhaustive_alignment);
    if (auto it = fj.find("coarse_min_matches"); it != fj.end() && !it->is_null()) {
      c.fingerprint.coarse_min_matches = it->get<uint32_t>();
    }
    if (auto it = fj.find("expansion"); it != fj.end()) {
      const auto mode = it->get<std::string>();
      if (mode == "index") {
        c.fingerprint.expansion = ExpansionMode::kIndexTime;
      } else if (mode == "query") {
        c.fingerprint.expansion = ExpansionMode::kQueryTime;
      } else {
        throw Error(ErrorCode::kInvalidArgument, "config: expansion must be 'index' or 'query'");
      }
    }
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string EngineConfig::to_json() const {
  json j;
  for (const auto &[f, p] : profiles) {
    j["text"][std::string(field_name(f))] = {{"remove_stopwords", p.remove_stopwords}, {"ngram_max", p.ngram_max}};
  }
  j["extractor"] = {{"target_rate", extractor.target_rate}, {"frame_length", extractor.frame_length},
                    {"hop", extractor.hop},                 {"band_count", extractor.band_count},
                    {"min_freq", extractor.min_freq},       {"max_freq", extractor.max_freq},
                    {"relative_tolerance", extractor.relative_tolerance}};
  j["fingerprint"] = {{"toggle_bits", fingerprint.toggle_bits},
                      {"ber_threshold", fingerprint.ber_threshold},
                      {"min_overlap_fraction", fingerprint.min_overlap_fraction},
                      {"exhaustive_alignment", fingerprint.exhaustive_alignment},
                      {"expansion", fingerprint.expansion == ExpansionMode::kIndexTime ? "index" : "query"}};
  j["fingerprint"]["coarse_min_matches"] =
      fingerprint.coarse_min_matches ? json(*fingerprint.coarse_min_matches) : json(nullptr);
  return j.dump();
}

void EngineConfig::validate() const {
  for (FieldKind f : kTextFields) {
    auto it = profiles.find(f);
    if (it == profiles.end()) throw Error(ErrorCode::kInvalidArgument, "config: missing profile for " + std::string(field_name(f)));
    if (it->second.field != f) throw Error(ErrorCode::kInvalidArgument, "config: profile field mismatch");
    if (it->second.ngram_max == 0) throw Error(ErrorCode::kInvalidArgument, "config: ngram_max must be >= 1");
    if (it->second.remove_stopwords != (f == FieldKind::kLyrics)) {
      throw Error(ErrorCode::kInvalidArgument, "config: only the lyrics profile removes stop words");
    }
  }
  extractor.validate();
  fingerprint.validate();
}

std::string EngineConfig::canonical_structure() const {
  std::string out;
  for (const auto &[f, p] : profiles) {
    out += "text/" + std::string(field_name(f)) + " stopwords=" + (p.remove_stopwords ? "1" : "0") +
           " n=" + std::to_string(p.ngram_max) + " stoplist=v" + std::to_string(kStopwordListVersion) + "\n";
  }
  out += extractor.canonical() + "\n";
  out += fingerprint.canonical_structure() + "\n";
  return out;
}

std::string EngineConfig::digest() const {
  Fnv1a64 h;
  h.update(canonical_structure());
  return hex64(h.digest());
}

IndexSet build_indexes(std::vector<SongRecord> records, const EngineConfig &config, const BuildOptions &options) {
  config.validate();
  IndexSet set{config, std::move(records), {}, FpIndex(config.fingerprint)};
  for (size_t i = 0; i < set.records.size(); ++i) {
    if (set.records[i].id.value != i) {
      throw Error(ErrorCode::kInvalidArgument, "records must carry dense ids in order");
    }
  }

  for (FieldKind f : kTextFields) {
    TextIndex index(config.profiles.at(f));
    for (const SongRecord &r : set.records) {
      switch (f) {
        case FieldKind::kLyrics: index.index_document(r.id, r.lyrics); break;
        case FieldKind::kTitle: index.index_document(r.id, r.title); break;
        case FieldKind::kArtist: index.index_document(r.id, r.artist); break;
        case FieldKind::kAlbum: index.index_document(r.id, r.album.value_or("")); break;
        case FieldKind::kGenre: index.index_document(r.id, r.genre.value_or("")); break;
        case FieldKind::kAudio: break;
      }
    }
    set.text.emplace(f, std::move(index));
  }

  // Fingerprints are extracted in parallel and inserted in id order.
  std::vector<size_t> with_audio;
  for (size_t i = 0; i < set.records.size(); ++i) {
    if (set.records[i].audio_path) with_audio.push_back(i);
  }
  std::vector<FingerprintSequence> seqs(with_audio.size());
  std::vector<std::exception_ptr> errors(with_audio.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t k = next++; k < with_audio.size(); k = next++) {
      try {
        const SongRecord &r = set.records[with_audio[k]];
        seqs[k] = extract(read_wav_file(*r.audio_path), config.extractor);
        seqs[k].song = r.id;
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = unsigned(std::min<size_t>(threads, std::max<size_t>(1, with_audio.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  for (size_t k = 0; k < with_audio.size(); ++k) {
    if (errors[k]) {
      try {
        std::rethrow_exception(errors[k]);
      } catch (const Error &e) {
        throw Error(e.code(), "record " + std::to_string(with_audio[k]) + ": " + e.what());
      }
    }
    set.audio.insert_song(set.records[with_audio[k]].id, seqs[k]);
  }
  return set;
}

IndexSet build_from_corpus(const std::string &corpus_path, const EngineConfig &config, const BuildOptions &options) {
  return build_indexes(load_corpus(corpus_path), config, options);
}

Engine::Engine(std::shared_ptr<const IndexSet> indexes)
    : indexes_(std::move(indexes)), extractor_(indexes_ ? indexes_->config.extractor : ExtractorConfig{}) {
  if (!indexes_) throw Error(ErrorCode::kInternal, "engine: index set missing");
}

const SongRecord *Engine::song(SongId id) const {
  if (id.value >= indexes_->records.size()) return nullptr;
  return &indexes_->records[id.value];
}

FieldSearch Engine::search_field(const Query &query, FieldKind field) const {
  const auto start = std::chrono::steady_clock::now();
  FieldSearch out{field, FieldResult{field, {}}, 0.0};
  if (field == FieldKind::kAudio) {
    if (!query.audio) throw Error(ErrorCode::kInvalidArgument, "audio: no clip in query");
    const FingerprintSequence seq = extractor_.extract(*query.audio);
    if (seq.too_short) {
      throw Error(ErrorCode::kTooShort, "audio: clip too short to fingerprint (need at least two analysis frames)");
    }
    const auto result = indexes_->audio.search(seq, indexes_->config.fingerprint, kUnlimited);
    for (const ScoredSong &s : result.hits) out.raw.scores[s.song] = s.score;
  } else {
    const auto &text = query.text(field);
    if (!text) throw Error(ErrorCode::kInvalidArgument, std::string(field_name(field)) + ": not in query");
    auto it = indexes_->text.find(field);
    if (it == indexes_->text.end()) throw Error(ErrorCode::kInternal, "index missing for " + std::string(field_name(field)));
    const auto result = it->second.search(*text, kUnlimited);
    for (const ScoredSong &s : result.hits) out.raw.scores[s.song] = s.score;
  }
  out.elapsed_ms = elapsed_ms(start);
  return out;
}

SearchResponse Engine::execute(const Query &query, const ExecuteOptions &options) const {
  const auto start = std::chrono::steady_clock::now();
  const auto validation = validate_query(query);
  if (!validation.ok()) throw Error(ErrorCode::kInvalidArgument, "invalid query: " + validation.joined());
  if (options.limit == 0) throw Error(ErrorCode::kInvalidArgument, "limit must be positive");

  const std::vector<FieldKind> fields = query.present_fields();
  std::vector<FieldSearch> searches;
  searches.reserve(fields.size());
  if (options.parallel && fields.size() > 1) {
    std::vector<std::future<FieldSearch>> tasks;
    for (FieldKind f : fields) {
      tasks.push_back(std::async(std::launch::async, [this, &query, f] { return search_field(query, f); }));
    }
    // Join every task before surfacing the first failure.
    std::exception_ptr failure;
    for (auto &t : tasks) {
      try {
        searches.push_back(t.get());
      } catch (...) {
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  } else {
    for (FieldKind f : fields) searches.push_back(search_field(query, f));
  }

  SearchResponse response;
  std::vector<FieldResult> normalized;
  std::set<FieldKind> present;
  for (const FieldSearch &s : searches) {
    normalized.push_back(normalize(s.raw));
    present.insert(s.field);
    response.timing_ms[std::string(field_name(s.field))] = s.elapsed_ms;
  }
  response.applied_weights = resolve_weights(present, query.weight_overrides);
  auto merged = merge(normalized, response.applied_weights);
  merged = apply_filters(std::move(merged), query,
                         [this](SongId id) { return indexes_->record(id).release_date; });
  for (RankedResult &r : rank(std::move(merged), options.limit)) {
    const SongRecord &rec = indexes_->record(r.song);
    response.results.push_back(ResultRow{r.song, rec.title, rec.artist, rec.album, rec.genre, rec.release_date,
                                         r.final_score, std::move(r.breakdown)});
  }
  response.timing_ms["total"] = elapsed_ms(start);
  return response;
}

ParsedQuery parse_query_json(std::string_view text) {
  ParsedQuery out;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error &e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("query: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "query must be a JSON object");
  auto date_of = [](const json &v, const char *key) {
    if (!v.is_string()) throw Error(ErrorCode::kInvalidArgument, std::string("query: '") + key + "' must be a string");
    auto d = Date::parse(v.get<std::string>());
    if (!d || !d->valid()) {
      throw Error(ErrorCode::kInvalidArgument, std::string("query: '") + key + "' is not a valid date");
    }
    return *d;
  };
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string &key = it.key();
    const json &v = *it;
    if (v.is_null()) continue;
    if (auto field = parse_field(key); field && is_text_field(*field)) {
      if (!v.is_string()) throw Error(ErrorCode::kInvalidArgument, "query: '" + key + "' must be a string");
      // Blank form fields are absent, not empty searches.
      if (!trim(v.get_ref<const std::string &>()).empty()) out.query.text(*field) = v.get<std::string>();
    } else if (key == "before") {
      out.query.released_before = date_of(v, "before");
    } else if (key == "after") {
      out.query.released_after = date_of(v, "after");
    } else if (key == "limit") {
      if (!v.is_number_integer() || v.get<int64_t>() <= 0) {
        throw Error(ErrorCode::kInvalidArgument, "query: 'limit' must be a positive integer");
      }
      out.limit = size_t(v.get<int64_t>());
    } else if (key == "weights") {
      if (!v.is_object()) throw Error(ErrorCode::kInvalidArgument, "query: 'weights' must be an object");
      for (auto w = v.begin(); w != v.end(); ++w) {
        auto field = parse_field(w.key());
        if (!field) throw Error(ErrorCode::kInvalidArgument, "query: unknown weight field '" + w.key() + "'");
        if (!w->is_number()) throw Error(ErrorCode::kInvalidArgument, "query: weight must be a number");
        out.query.weight_overrides[*field] = w->get<double>();
      }
    } else {
      throw Error(ErrorCode::kInvalidArgument, "query: unknown key '" + key + "'");
    }
  }
  return out;
}

namespace {

json optional_json(const std::optional<std::string> &s) { return s ? json(*s) : json(nullptr); }

}  // namespace

std::string response_to_json(const SearchResponse &response, bool include_timing) {
  json j;
  j["results"] = json::array();
  for (const ResultRow &r : response.results) {
    json row = {{"id", r.song.value},
                {"title", r.title},
                {"artist", r.artist},
                {"album", optional_json(r.album)},
                {"genre", optional_json(r.genre)},
                {"release_date", r.release_date.to_string()},
                {"final_score", r.final_score}};
    row["breakdown"] = json::object();
    for (const auto &[f, s] : r.breakdown) row["breakdown"][std::string(field_name(f))] = s;
    j["results"].push_back(std::move(row));
  }
  j["applied_weights"] = json::object();
  for (const auto &[f, w] : response.applied_weights.weights) j["applied_weights"][std::string(field_name(f))] = w;
  if (include_timing) j["timing_ms"] = response.timing_ms;
  return j.dump();
}

std::string song_to_json(const SongRecord &record) {
  json j = {{"id", record.id.value},
            {"title", record.title},
            {"artist", record.artist},
            {"album", optional_json(record.album)},
            {"genre", optional_json(record.genre)},
            {"release_date", record.release_date.to_string()},
            {"lyrics", record.lyrics},
            {"has_audio", record.audio_path.has_value()}};
  return j.dump();
}

}  // namespace melodex
