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
#include <stdlib.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include "httplib.h"
#include "json.hpp"
#include "melodex/melodex.h"

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

class ScratchDir {
 public:
  ScratchDir() {
    std::string tmpl = (fs::temp_directory_path() / "melodex-capi-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  std::string str(const std::string &child = "") const { return (path_ / child).string(); }

 private:
  fs::path path_;
};

// Takes ownership of a library-allocated string.
std::string take(char *s) {
  std::string out = s ? s : "";
  mdx_string_free(s);
  return out;
}

class CapiTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new ScratchDir();
    char *path = nullptr;
    ASSERT_EQ(mdx_synth(dir_->str("corpus").c_str(), 6, 6.0, 77, &path), MDX_OK) << mdx_last_error();
    corpus_ = take(path);
    ASSERT_EQ(mdx_engine_build(corpus_.c_str(), nullptr, 1, &engine_), MDX_OK) << mdx_last_error();
  }
  static void TearDownTestSuite() {
    mdx_engine_free(engine_);
    delete dir_;
  }

  static std::string search(const mdx_engine *engine, const std::string &query, const std::string &wav = "",
                            int sequential = 0) {
    char *out = nullptr;
    const auto *bytes = reinterpret_cast<const uint8_t *>(wav.data());
    EXPECT_EQ(mdx_engine_search(engine, query.c_str(), wav.empty() ? nullptr : bytes, wav.size(), sequential, 0, &out),
              MDX_OK)
        << mdx_last_error();
    return take(out);
  }

  static std::string song_wav(int id) {
    std::ifstream in(dir_->str("corpus/audio/song-000" + std::to_string(id) + ".wav"), std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }

  static ScratchDir *dir_;
  static std::string corpus_;
  static mdx_engine *engine_;
};

ScratchDir *CapiTest::dir_ = nullptr;
std::string CapiTest::corpus_;
mdx_engine *CapiTest::engine_ = nullptr;

TEST(CapiBasicsTest, VersionAndStatusNames) {
  EXPECT_STREQ(mdx_version(), "0.1.0");
  EXPECT_STREQ(mdx_status_name(MDX_OK), "ok");
  EXPECT_STRNE(mdx_status_name(MDX_ERR_TOO_SHORT), "");
  EXPECT_STRNE(mdx_status_name(MDX_ERR_INTERNAL), mdx_status_name(MDX_ERR_IO));
  mdx_string_free(nullptr);
}

TEST(CapiBasicsTest, NullArgumentsAreRejected) {
  mdx_engine *engine = nullptr;
  EXPECT_EQ(mdx_engine_build(nullptr, nullptr, 1, &engine), MDX_ERR_INVALID_ARGUMENT);
  EXPECT_STRNE(mdx_last_error(), "");
  EXPECT_EQ(mdx_engine_build("x", nullptr, 1, nullptr), MDX_ERR_INVALID_ARGUMENT);
  uint64_t n = 0;
  EXPECT_EQ(mdx_engine_song_count(nullptr, &n), MDX_ERR_INVALID_ARGUMENT);
  char *out = nullptr;
  EXPECT_EQ(mdx_engine_search(nullptr, "{}", nullptr, 0, 0, 0, &out), MDX_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(out, nullptr);
  mdx_engine_free(nullptr);
  mdx_server_free(nullptr);
}

TEST(CapiBasicsTest, MissingCorpusAndSnapshot) {
  mdx_engine *engine = nullptr;
  EXPECT_NE(mdx_engine_build("/nonexistent/corpus.jsonl", nullptr, 1, &engine), MDX_OK);
  EXPECT_EQ(engine, nullptr);
  EXPECT_EQ(mdx_engine_load("/nonexistent-index", nullptr, &engine), MDX_ERR_MISSING_MANIFEST);
  EXPECT_EQ(engine, nullptr);
}

TEST_F(CapiTest, SongCountAndSong) {
  uint64_t n = 0;
  ASSERT_EQ(mdx_engine_song_count(engine_, &n), MDX_OK);
  EXPECT_EQ(n, 6u);
  char *out = nullptr;
  ASSERT_EQ(mdx_engine_song(engine_, 4, &out), MDX_OK);
  const json song = json::parse(take(out));
  EXPECT_EQ(song["id"], 4);
  EXPECT_EQ(song["has_audio"], true);
  EXPECT_EQ(mdx_engine_song(engine_, 99, &out), MDX_ERR_NOT_FOUND);
}

TEST_F(CapiTest, TextSearch) {
  char *out = nullptr;
  ASSERT_EQ(mdx_engine_song(engine_, 2, &out), MDX_OK);
  const json song = json::parse(take(out));
  const json response = json::parse(search(engine_, json{{"title", song["title"]}}.dump()));
  EXPECT_EQ(response["results"][0]["id"], 2);
  EXPECT_FALSE(response.contains("timing_ms"));
  EXPECT_EQ(response["applied_weights"]["title"], 1.0);
}

TEST_F(CapiTest, AudioSearchWithWholeSongWav) {
  const json response = json::parse(search(engine_, "{}", song_wav(3)));
  EXPECT_EQ(response["results"][0]["id"], 3);
  EXPECT_EQ(response["results"][0]["breakdown"]["audio"], 1.0);
}

TEST_F(CapiTest, SequentialMatchesParallel) {
  char *out = nullptr;
  ASSERT_EQ(mdx_engine_song(engine_, 1, &out), MDX_OK);
  const json song = json::parse(take(out));
  const std::string q = json{{"artist", song["artist"]}, {"lyrics", "la"}, {"genre", song["genre"]}}.dump();
  EXPECT_EQ(search(engine_, q, song_wav(5), 0), search(engine_, q, song_wav(5), 1));
}

TEST_F(CapiTest, SearchErrors) {
  char *out = nullptr;
  EXPECT_EQ(mdx_engine_search(engine_, "{}", nullptr, 0, 0, 0, &out), MDX_ERR_INVALID_ARGUMENT);
  EXPECT_NE(std::string(mdx_last_error()).find("query"), std::string::npos);
  EXPECT_EQ(mdx_engine_search(engine_, "{", nullptr, 0, 0, 0, &out), MDX_ERR_INVALID_ARGUMENT);
  const uint8_t junk[] = {'R', 'I', 'F', 'F', 0, 0, 0, 0, 'W', 'A', 'V', 'E'};
  EXPECT_NE(mdx_engine_search(engine_, "{}", junk, sizeof(junk), 0, 0, &out), MDX_OK);
  EXPECT_EQ(out, nullptr);
}

TEST_F(CapiTest, PersistAndLoadAnswerIdentically) {
  const std::string index_dir = dir_->str("index");
  ASSERT_EQ(mdx_engine_persist(engine_, index_dir.c_str()), MDX_OK) << mdx_last_error();
  mdx_engine *loaded = nullptr;
  ASSERT_EQ(mdx_engine_load(index_dir.c_str(), nullptr, &loaded), MDX_OK) << mdx_last_error();
  for (const std::string &q : {std::string(R"({"lyrics":"ka lo mi"})"), std::string(R"({"genre":"pop","limit":3})")}) {
    EXPECT_EQ(search(engine_, q), search(loaded, q));
  }
  EXPECT_EQ(search(engine_, "{}", song_wav(0)), search(loaded, "{}", song_wav(0)));
  char *a = nullptr;
  char *b = nullptr;
  ASSERT_EQ(mdx_engine_config(engine_, &a), MDX_OK);
  ASSERT_EQ(mdx_engine_config(loaded, &b), MDX_OK);
  EXPECT_EQ(take(a), take(b));
  mdx_engine_free(loaded);

  EXPECT_EQ(mdx_engine_load(index_dir.c_str(), R"({"fingerprint":{"toggle_bits":2}})", &loaded),
            MDX_ERR_CONFIG_MISMATCH);
  EXPECT_EQ(mdx_engine_load(index_dir.c_str(), R"({"fingerprint":{"ber_threshold":0.3}})", &loaded), MDX_OK);
  mdx_engine_free(loaded);
}

TEST_F(CapiTest, BuildWithConfigOverlay) {
  mdx_engine *engine = nullptr;
  ASSERT_EQ(mdx_engine_build(corpus_.c_str(), R"({"fingerprint":{"toggle_bits":0}})", 2, &engine), MDX_OK);
  char *config = nullptr;
  ASSERT_EQ(mdx_engine_config(engine, &config), MDX_OK);
  EXPECT_EQ(json::parse(take(config))["fingerprint"]["toggle_bits"], 0);
  mdx_engine_free(engine);
  EXPECT_EQ(mdx_engine_build(corpus_.c_str(), R"({"fingerprint":{"toggle_bits":"x"}})", 1, &engine),
            MDX_ERR_INVALID_ARGUMENT);
}

TEST_F(CapiTest, EvalNoiseAndSweep) {
  char *out = nullptr;
  const std::string report_dir = dir_->str("report");
  ASSERT_EQ(mdx_eval(engine_, R"({"suite":"noise","snr_db":["inf",20],"clip_seconds":2})", report_dir.c_str(), &out),
            MDX_OK)
      << mdx_last_error();
  const json noise = json::parse(take(out));
  ASSERT_EQ(noise["rows"].size(), 2u);
  EXPECT_EQ(noise["rows"][0]["recall_at_1"], 1.0);
  EXPECT_TRUE(fs::exists(report_dir + "/report.csv"));
  std::ifstream csv(report_dir + "/report.csv");
  EXPECT_EQ(std::string(std::istreambuf_iterator<char>(csv), {}), noise["csv"].get<std::string>());

  ASSERT_EQ(mdx_eval(engine_, R"({"suite":"sweep","parameter":"toggle_bits","values":[0,1],"bit_flips":1})", nullptr,
                     &out),
            MDX_OK)
      << mdx_last_error();
  const json sw = json::parse(take(out));
  ASSERT_EQ(sw["rows"].size(), 2u);
  EXPECT_GE(sw["rows"][1]["recall_at_1"].get<double>(), sw["rows"][0]["recall_at_1"].get<double>());

  EXPECT_EQ(mdx_eval(engine_, R"({"suite":"karaoke"})", nullptr, &out), MDX_ERR_INVALID_ARGUMENT);
}

TEST_F(CapiTest, ServerRoundTrip) {
  mdx_server *server = nullptr;
  ASSERT_EQ(mdx_server_start(engine_, "127.0.0.1", 0, &server), MDX_OK) << mdx_last_error();
  const int port = mdx_server_port(server);
  ASSERT_GT(port, 0);
  httplib::Client client("127.0.0.1", port);
  auto health = client.Get("/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);

  const std::string q = R"({"lyrics":"ka lo mi","limit":4})";
  auto res = client.Post("/search", q, "application/json");
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200);
  json got = json::parse(res->body);
  got.erase("timing_ms");
  EXPECT_EQ(got, json::parse(search(engine_, q)));

  mdx_server_stop(server);
  mdx_server_free(server);
}

}  // namespace
