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

#include "melodex/corpus.hpp"

#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace melodex {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string required_string(const json &j, const char *key) {
  auto it = j.find(key);
  if (it == j.end()) throw Error(ErrorCode::kParse, std::string("missing key '") + key + "'");
  if (!it->is_string()) throw Error(ErrorCode::kParse, std::string("key '") + key + "' must be a string");
  return it->get<std::string>();
}

std::optional<std::string> optional_string(const json &j, const char *key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw Error(ErrorCode::kParse, std::string("key '") + key + "' must be a string");
  return it->get<std::string>();
}

}  // namespace

SongRecord parse_corpus_line(const std::string &line, const std::string &base_dir) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error &e) {
    throw Error(ErrorCode::kParse, e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::kParse, "record must be an object");

  SongRecord r;
  r.title = required_string(j, "title");
  r.artist = required_string(j, "artist");
  r.album = optional_string(j, "album");
  r.genre = optional_string(j, "genre");
  r.lyrics = optional_string(j, "lyrics").value_or("");
  const std::string date = required_string(j, "release_date");
  auto parsed = Date::parse(date);
  if (!parsed) throw Error(ErrorCode::kParse, "release_date is not ISO-8601: '" + date + "'");
  r.release_date = *parsed;
  if (auto audio = optional_string(j, "audio_path")) {
    fs::path p(*audio);
    if (p.is_relative() && !base_dir.empty()) p = fs::path(base_dir) / p;
    r.audio_path = p.lexically_normal().string();
  }
  return r;
}

std::vector<SongRecord> load_corpus(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kNotFound, "corpus file not found: " + path);
  const std::string base_dir = fs::absolute(fs::path(path)).parent_path().string();

  std::vector<SongRecord> records;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    SongRecord r;
    try {
      r = parse_corpus_line(line, base_dir);
    } catch (const Error &e) {
      throw Error(ErrorCode::kParse, path + ": line " + std::to_string(line_no) + ": " + e.what());
    }
    r.id = SongId(uint32_t(records.size()));
    auto v = validate_record(r);
    if (!v.ok()) {
      throw Error(ErrorCode::kValidation, path + ": record " + std::to_string(records.size()) +
                                              " (line " + std::to_string(line_no) + "): " + v.joined());
    }
    records.push_back(std::move(r));
  }
  return records;
}

std::string to_corpus_line(const SongRecord &record) {
  json j;
  j["title"] = record.title;
  j["artist"] = record.artist;
  if (record.album) j["album"] = *record.album;
  if (record.genre) j["genre"] = *record.genre;
  j["release_date"] = record.release_date.to_string();
  j["lyrics"] = record.lyrics;
  if (record.audio_path) j["audio_path"] = *record.audio_path;
  return j.dump();
}

}  // namespace melodex
