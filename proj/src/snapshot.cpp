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

#include "melodex/snapshot.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "json.hpp"
#include "melodex/binary_io.hpp"

namespace melodex {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr char kMagic[4] = {'M', 'D', 'X', '1'};
constexpr const char *kSongsFile = "songs.bin";
constexpr const char *kAudioFile = "audio.idx";

std::string text_file(FieldKind f) { return "text-" + std::string(field_name(f)) + ".idx"; }

uint64_t digest_value(const std::string &hex) { return std::stoull(hex, nullptr, 16); }

void write_file(const fs::path &path, const std::vector<uint8_t> &bytes) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out.write(reinterpret_cast<const char *>(bytes.data()), std::streamsize(bytes.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::kIo, "short write: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot rename " + tmp.string() + ": " + ec.message());
}

std::vector<uint8_t> read_file(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kCorruptData, "snapshot file missing: " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Frames a payload with magic, version, digest and a trailing checksum.
template <typename Fill>
std::vector<uint8_t> framed(uint64_t digest, Fill fill) {
  BinaryWriter w;
  for (char c : kMagic) w.u8(uint8_t(c));
  w.u32(kSnapshotFormatVersion);
  w.u64(digest);
  fill(w);
  Fnv1a64 h;
  h.update(w.bytes().data(), w.bytes().size());
  w.u64(h.digest());
  return w.take();
}

// Validates the frame and returns a reader over the payload.
BinaryReader unframe(const std::vector<uint8_t> &bytes, uint64_t digest, const std::string &name) {
  constexpr size_t kHeader = 4 + 4 + 8;
  if (bytes.size() < kHeader + 8) throw Error(ErrorCode::kCorruptData, name + ": truncated");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw Error(ErrorCode::kCorruptData, name + ": bad magic");
  Fnv1a64 h;
  h.update(bytes.data(), bytes.size() - 8);
  BinaryReader trailer(bytes.data() + bytes.size() - 8, 8);
  if (trailer.u64() != h.digest()) throw Error(ErrorCode::kCorruptData, name + ": checksum mismatch");
  BinaryReader header(bytes.data() + 4, 12);
  const uint32_t version = header.u32();
  if (version != kSnapshotFormatVersion) {
    throw Error(ErrorCode::kVersionMismatch, name + ": format version " + std::to_string(version));
  }
  if (header.u64() != digest) throw Error(ErrorCode::kConfigMismatch, name + ": config digest differs from manifest");
  return BinaryReader(bytes.data() + kHeader, bytes.size() - kHeader - 8);
}

void write_record(BinaryWriter &w, const SongRecord &r) {
  w.u32(r.id.value);
  w.str(r.title);
  w.str(r.artist);
  w.boolean(r.album.has_value());
  if (r.album) w.str(*r.album);
  w.boolean(r.genre.has_value());
  if (r.genre) w.str(*r.genre);
  w.u32(uint32_t(r.release_date.year));
  w.u8(uint8_t(r.release_date.month));
  w.u8(uint8_t(r.release_date.day));
  w.str(r.lyrics);
  w.boolean(r.audio_path.has_value());
  if (r.audio_path) w.str(*r.audio_path);
}

SongRecord read_record(BinaryReader &in) {
  SongRecord r;
  r.id = SongId(in.u32());
  r.title = in.str();
  r.artist = in.str();
  if (in.boolean()) r.album = in.str();
  if (in.boolean()) r.genre = in.str();
  r.release_date.year = int(in.u32());
  r.release_date.month = in.u8();
  r.release_date.day = in.u8();
  r.lyrics = in.str();
  if (in.boolean()) r.audio_path = in.str();
  return r;
}

void expect_done(const BinaryReader &in, const std::string &name) {
  if (!in.done()) throw Error(ErrorCode::kCorruptData, name + ": trailing bytes");
}

}  // namespace

void persist_indexes(const IndexSet &indexes, const std::string &directory) {
  const fs::path dir(directory);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + directory + ": " + ec.message());
  fs::remove(dir / kManifestFile, ec);

  const std::string digest_hex = indexes.config.digest();
  const uint64_t digest = digest_value(digest_hex);

  write_file(dir / kSongsFile, framed(digest, [&](BinaryWriter &w) {
               w.u64(indexes.records.size());
               for (const SongRecord &r : indexes.records) write_record(w, r);
             }));
  for (FieldKind f : kTextFields) {
    write_file(dir / text_file(f), framed(digest, [&](BinaryWriter &w) { indexes.text.at(f).serialize(w); }));
  }
  write_file(dir / kAudioFile, framed(digest, [&](BinaryWriter &w) { indexes.audio.serialize(w); }));

  json manifest = {{"format_version", kSnapshotFormatVersion},
                   {"song_count", indexes.records.size()},
                   {"index_config_digest", digest_hex},
                   {"config", json::parse(indexes.config.to_json())}};
  const std::string text = manifest.dump(2) + "\n";
  write_file(dir / kManifestFile, std::vector<uint8_t>(text.begin(), text.end()));
}

CorpusManifest read_manifest(const std::string &directory) {
  const fs::path path = fs::path(directory) / kManifestFile;
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingManifest, "no snapshot manifest in " + directory);
  CorpusManifest m;
  try {
    const json j = json::parse(in);
    m.version = j.at("format_version").get<uint32_t>();
    m.song_count = j.at("song_count").get<uint64_t>();
    m.index_config_digest = j.at("index_config_digest").get<std::string>();
    m.config_json = j.at("config").dump();
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kCorruptData, std::string("manifest: ") + e.what());
  }
  return m;
}

IndexSet load_indexes(const std::string &directory, const EngineConfig &expected) {
  const CorpusManifest m = read_manifest(directory);
  if (m.version != kSnapshotFormatVersion) {
    throw Error(ErrorCode::kVersionMismatch, "snapshot format version " + std::to_string(m.version) +
                                                 ", this build reads " + std::to_string(kSnapshotFormatVersion));
  }
  expected.validate();
  const std::string want = expected.digest();
  if (m.index_config_digest != want) {
    throw Error(ErrorCode::kConfigMismatch,
                "snapshot config digest " + m.index_config_digest + " does not match expected " + want);
  }
  const uint64_t digest = digest_value(want);
  const fs::path dir(directory);

  IndexSet set{expected, {}, {}, FpIndex(expected.fingerprint)};
  {
    const auto bytes = read_file(dir / kSongsFile);
    BinaryReader in = unframe(bytes, digest, kSongsFile);
    const uint64_t n = in.count(4);
    for (uint64_t i = 0; i < n; ++i) {
      SongRecord r = read_record(in);
      if (r.id.value != i) throw Error(ErrorCode::kCorruptData, "songs.bin: ids not dense");
      set.records.push_back(std::move(r));
    }
    expect_done(in, kSongsFile);
  }
  if (set.records.size() != m.song_count) {
    throw Error(ErrorCode::kCorruptData, "manifest song_count disagrees with songs.bin");
  }
  for (FieldKind f : kTextFields) {
    const std::string name = text_file(f);
    const auto bytes = read_file(dir / name);
    BinaryReader in = unframe(bytes, digest, name);
    TextIndex index = TextIndex::deserialize(in);
    expect_done(in, name);
    if (!(index.profile() == expected.profiles.at(f))) throw Error(ErrorCode::kConfigMismatch, name + ": profile differs");
    set.text.emplace(f, std::move(index));
  }
  {
    const auto bytes = read_file(dir / kAudioFile);
    BinaryReader in = unframe(bytes, digest, kAudioFile);
    set.audio = FpIndex::deserialize(in);
    expect_done(in, kAudioFile);
    if (set.audio.toggle_bits() != expected.fingerprint.toggle_bits ||
        set.audio.expansion() != expected.fingerprint.expansion) {
      throw Error(ErrorCode::kConfigMismatch, "audio.idx: structure differs from expected config");
    }
  }
  return set;
}

}  // namespace melodex
