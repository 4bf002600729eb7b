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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <iterator>

#include "json.hpp"
#include "melodex/snapshot.hpp"
#include "melodex/synth.hpp"
#include "test_support.hpp"

namespace melodex {
namespace {

namespace fs = std::filesystem;
using testing::error_code_of;
using testing::TempDir;

std::vector<uint8_t> read_bytes(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const fs::path &p, const std::vector<uint8_t> &bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char *>(bytes.data()), std::streamsize(bytes.size()));
}

class SnapshotTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    corpus_dir_ = new TempDir();
    SynthOptions o;
    o.songs = 6;
    o.seconds = 5.0;
    o.seed = 33;
    const std::string corpus = write_synthetic_corpus(corpus_dir_->str(), o);
    built_ = new IndexSet(build_from_corpus(corpus, EngineConfig::defaults()));
  }
  static void TearDownTestSuite() {
    delete built_;
    delete corpus_dir_;
  }

  TempDir out_;
  static TempDir *corpus_dir_;
  static IndexSet *built_;
};

TempDir *SnapshotTest::corpus_dir_ = nullptr;
IndexSet *SnapshotTest::built_ = nullptr;

TEST_F(SnapshotTest, RoundTripIsExact) {
  persist_indexes(*built_, out_.str());
  const IndexSet loaded = load_indexes(out_.str(), built_->config);
  EXPECT_EQ(loaded, *built_);
}

TEST_F(SnapshotTest, LoadedEngineAnswersIdentically) {
  persist_indexes(*built_, out_.str());
  const Engine a(std::make_shared<const IndexSet>(*built_));
  const Engine b(std::make_shared<const IndexSet>(load_indexes(out_.str(), built_->config)));
  for (uint32_t s = 0; s < 6; ++s) {
    Query q;
    q.lyrics = a.song(SongId(s))->lyrics.substr(0, 30);
    q.artist = a.song(SongId((s + 1) % 6))->artist;
    EXPECT_EQ(response_to_json(a.execute(q), false), response_to_json(b.execute(q), false));
  }
}

TEST_F(SnapshotTest, ManifestRecordsCountDigestAndConfig) {
  persist_indexes(*built_, out_.str());
  const CorpusManifest m = read_manifest(out_.str());
  EXPECT_EQ(m.version, kSnapshotFormatVersion);
  EXPECT_EQ(m.song_count, 6u);
  EXPECT_EQ(m.index_config_digest, built_->config.digest());
  EXPECT_EQ(EngineConfig::from_json(m.config_json), built_->config);
}

TEST_F(SnapshotTest, PersistIsByteStable) {
  TempDir other;
  persist_indexes(*built_, out_.str());
  persist_indexes(*built_, other.str());
  for (const auto &entry : fs::directory_iterator(out_.path())) {
    EXPECT_EQ(read_bytes(entry.path()), read_bytes(other.path() / entry.path().filename())) << entry.path();
  }
}

TEST_F(SnapshotTest, QueryTimeThresholdsComeFromExpectedConfig) {
  persist_indexes(*built_, out_.str());
  EngineConfig looser = built_->config;
  looser.fingerprint.ber_threshold = 0.2;
  const IndexSet loaded = load_indexes(out_.str(), looser);
  EXPECT_EQ(loaded.config.fingerprint.ber_threshold, 0.2);
}

TEST_F(SnapshotTest, MissingManifest) {
  EXPECT_EQ(error_code_of([&] { load_indexes(out_.str(), built_->config); }), ErrorCode::kMissingManifest);
  persist_indexes(*built_, out_.str());
  fs::remove(out_.path() / kManifestFile);
  EXPECT_EQ(error_code_of([&] { load_indexes(out_.str(), built_->config); }), ErrorCode::kMissingManifest);
}

TEST_F(SnapshotTest, ConfigMismatch) {
  persist_indexes(*built_, out_.str());
  EngineConfig other = built_->config;
  other.fingerprint.toggle_bits = 2;
  EXPECT_EQ(error_code_of([&] { load_indexes(out_.str(), other); }), ErrorCode::kConfigMismatch);
  other = built_->config;
  other.profiles[FieldKind::kLyrics].ngram_max = 3;
  EXPECT_EQ(error_code_of([&] { load_indexes(out_.str(), other); }), ErrorCode::kConfigMismatch);
}

TEST_F(SnapshotTest, VersionMismatch) {
  persist_indexes(*built_, out_.str());
  const fs::path manifest = out_.path() / kManifestFile;
  nlohmann::json j = nlohmann::json::parse(std::ifstream(manifest));
  j["format_version"] = kSnapshotFormatVersion + 1;
  std::ofstream(manifest, std::ios::trunc) << j.dump();
  EXPECT_EQ(error_code_of([&] { load_indexes(out_.str(), built_->config); }), ErrorCode::kVersionMismatch);
}

TEST_F(SnapshotTest, DataFileVersionMismatch) {
  persist_indexes(*built_, out_.str());
  const fs::path songs = out_.path() / "songs.bin";
  auto bytes = read_bytes(songs);
  bytes[4] = uint8_t(kSnapshotFormatVersion + 1);
  Fnv1a64 h;
  h.update(bytes.data(), bytes.size() - 8);
  uint64_t sum = h.digest();
  for (int i = 0; i < 8; ++i) bytes[bytes.size() - 8 + i] = uint8_t(sum >> (8 * i));
  write_bytes(songs, bytes);
  EXPECT_EQ(error_code_of([&] { load_indexes(out_.str(), built_->config); }), ErrorCode::kVersionMismatch);
}

TEST_F(SnapshotTest, EveryFlippedByteIsDetected) {
  persist_indexes(*built_, out_.str());
  for (const char *name : {"songs.bin", "text-lyrics.idx", "text-title.idx", "audio.idx"}) {
    const fs::path file = out_.path() / name;
    const auto original = read_bytes(file);
    ASSERT_GT(original.size(), 24u) << name;
    for (size_t pos : {size_t(0), size_t(5), size_t(12), original.size() / 2, original.size() - 1}) {
      auto bytes = original;
      bytes[pos] ^= 0x5a;
      write_bytes(file, bytes);
      EXPECT_EQ(error_code_of([&] { load_indexes(out_.str(), built_->config); }), ErrorCode::kCorruptData)
          << name << " @" << pos;
    }
    write_bytes(file, original);
  }
  EXPECT_NO_THROW(load_indexes(out_.str(), built_->config));
}

TEST_F(SnapshotTest, TruncatedAndMissingFiles) {
  persist_indexes(*built_, out_.str());
  const fs::path audio = out_.path() / "audio.idx";
  auto bytes = read_bytes(audio);
  bytes.resize(10);
  write_bytes(audio, bytes);
  EXPECT_EQ(error_code_of([&] { load_indexes(out_.str(), built_->config); }), ErrorCode::kCorruptData);
  fs::remove(audio);
  EXPECT_EQ(error_code_of([&] { load_indexes(out_.str(), built_->config); }), ErrorCode::kCorruptData);
}

TEST_F(SnapshotTest, MalformedManifest) {
  persist_indexes(*built_, out_.str());
  std::ofstream(out_.path() / kManifestFile, std::ios::trunc) << "{\"format_version\": 1}";
  EXPECT_EQ(error_code_of([&] { load_indexes(out_.str(), built_->config); }), ErrorCode::kCorruptData);
}

TEST_F(SnapshotTest, SongCountDisagreement) {
  persist_indexes(*built_, out_.str());
  const fs::path manifest = out_.path() / kManifestFile;
  nlohmann::json j = nlohmann::json::parse(std::ifstream(manifest));
  j["song_count"] = 7;
  std::ofstream(manifest, std::ios::trunc) << j.dump();
  EXPECT_EQ(error_code_of([&] { load_indexes(out_.str(), built_->config); }), ErrorCode::kCorruptData);
}

TEST(SnapshotQueryExpansionTest, RoundTrip) {
  EngineConfig c = EngineConfig::defaults();
  c.fingerprint.expansion = ExpansionMode::kQueryTime;
  std::vector<SongRecord> records = {testing::make_record(0, "A", "B", Date{2000, 1, 1}, "la la")};
  const IndexSet built = build_indexes(records, c);
  TempDir dir;
  persist_indexes(built, dir.str());
  EXPECT_EQ(load_indexes(dir.str(), c), built);
  EXPECT_EQ(error_code_of([&] { load_indexes(dir.str(), EngineConfig::defaults()); }), ErrorCode::kConfigMismatch);
}

}  // namespace
}  // namespace melodex
