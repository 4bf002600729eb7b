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

#ifndef MELODEX_SNAPSHOT_HPP_
#define MELODEX_SNAPSHOT_HPP_

#include <cstdint>
#include <string>

#include "melodex/engine.hpp"

namespace melodex {

inline constexpr uint32_t kSnapshotFormatVersion = 1;
inline constexpr const char *kManifestFile = "manifest.json";

struct CorpusManifest {
  uint32_t version = kSnapshotFormatVersion;
  uint64_t song_count = 0;
  std::string index_config_digest;
  // The EngineConfig the snapshot was built with, as JSON.
  std::string config_json;
};

// Snapshot layout:
//
//   songs.bin, text-<field>.idx (x5), audio.idx, manifest.json
//
// Every data file starts with "MDX1", the format version (u32) and the
// config digest (u64), and ends with an FNV-1a checksum of the preceding
// bytes. The fingerprint file holds the store and canonical posting lists;
// the expanded key map is rebuilt on load. The manifest is removed first
// and written last, so an interrupted persist leaves no manifest.
void persist_indexes(const IndexSet &indexes, const std::string &directory);

// Throws kMissingManifest, kVersionMismatch, kConfigMismatch (digest differs
// from `expected`), or kCorruptData. Query-time thresholds of the returned
// set come from `expected`.
IndexSet load_indexes(const std::string &directory, const EngineConfig &expected);

CorpusManifest read_manifest(const std::string &directory);

}  // namespace melodex

#endif  // MELODEX_SNAPSHOT_HPP_
