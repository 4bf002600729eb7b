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

#ifndef MELODEX_CORPUS_HPP_
#define MELODEX_CORPUS_HPP_

#include <string>
#include <vector>

#include "melodex/core.hpp"

namespace melodex {

// Corpus files are UTF-8 JSON lines, one song per line:
//
//   {"title": "...", "artist": "...", "album": "...", "genre": "...",
//    "release_date": "YYYY-MM-DD", "lyrics": "...", "audio_path": "a.wav"}
//
// album, genre and audio_path are optional. audio_path is relative to the
// corpus file's directory. Blank lines are skipped. Records receive dense ids
// in file order.
std::vector<SongRecord> load_corpus(const std::string &path);

// Parses one corpus line. `base_dir` resolves relative audio paths.
SongRecord parse_corpus_line(const std::string &line, const std::string &base_dir);

// Serializes a record back to a corpus line. Audio paths are written as-is.
std::string to_corpus_line(const SongRecord &record);

}  // namespace melodex

#endif  // MELODEX_CORPUS_HPP_
