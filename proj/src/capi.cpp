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

#include "melodex/melodex.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include "json.hpp"
#include "melodex/audio.hpp"
#include "melodex/engine.hpp"
#include "melodex/eval.hpp"
#include "melodex/http_service.hpp"
#include "melodex/snapshot.hpp"
#include "melodex/synth.hpp"

using json = nlohmann::json;

struct mdx_engine {
  std::shared_ptr<const melodex::Engine> engine;
};

struct mdx_server {
  std::unique_ptr<melodex::SearchServer> server;
};

namespace {

thread_local std::string last_error;

static_assert(int(melodex::ErrorCode::kInternal) == MDX_ERR_INTERNAL);
static_assert(int(melodex::ErrorCode::kZeroPower) == MDX_ERR_ZERO_POWER);

mdx_status fail(mdx_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

// Runs fn, translating exceptions into status codes.
template <typename Fn>
mdx_status guarded(Fn &&fn) {
  try {
    fn();
    last_error.clear();
    return MDX_OK;
  } catch (const melodex::Error &e) {
    return fail(mdx_status(int(e.code())), e.what());
  } catch (const json::exception &e) {
    return fail(MDX_ERR_PARSE, e.what());
  } catch (const std::bad_alloc &) {
    return fail(MDX_ERR_INTERNAL, "out of memory");
  } catch (const std::exception &e) {
    return fail(MDX_ERR_INTERNAL, e.what());
  }
}

char *dup_string(const std::string &s) {
  char *out = static_cast<char *>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

void require(bool ok, const char *what) {
  if (!ok) throw melodex::Error(melodex::ErrorCode::kInvalidArgument, std::string(what) + " must not be NULL");
}

mdx_engine *wrap(melodex::IndexSet set) {
  auto shared = std::make_shared<const melodex::IndexSet>(std::move(set));
  return new mdx_engine{std::make_shared<const melodex::Engine>(std::move(shared))};
}

double snr_from_json(const json &j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf" || s == "none") return melodex::kNoNoise;
    throw melodex::Error(melodex::ErrorCode::kInvalidArgument, "snr_db: expected a number or \"inf\", got " + s);
  }
  return j.get<double>();
}

template <typename T>
void take(const json &j, const char *key, T &into) {
  if (j.contains(key)) into = j.at(key).get<T>();
}

}  // namespace

extern "C" {

const char *mdx_version(void) { return "0.1.0"; }

const char *mdx_status_name(mdx_status status) {
  if (status == MDX_OK) return "ok";
  if (status < MDX_ERR_INVALID_ARGUMENT || status > MDX_ERR_INTERNAL) return "unknown";
  // error_code_name returns views of string literals.
  return melodex::error_code_name(melodex::ErrorCode(int(status))).data();
}

const char *mdx_last_error(void) { return last_error.c_str(); }

void mdx_string_free(char *s) { std::free(s); }

mdx_status mdx_engine_build(const char *corpus_path, const char *config_json, unsigned threads, mdx_engine **out) {
  return guarded([&] {
    require(corpus_path && out, "corpus_path and out");
    const auto config = config_json ? melodex::EngineConfig::from_json(config_json) : melodex::EngineConfig::defaults();
    *out = wrap(melodex::build_from_corpus(corpus_path, config, {threads}));
  });
}

mdx_status mdx_engine_load(const char *index_dir, const char *config_json, mdx_engine **out) {
  return guarded([&] {
    require(index_dir && out, "index_dir and out");
    melodex::EngineConfig config;
    if (config_json) {
      config = melodex::EngineConfig::from_json(config_json);
    } else {
      config = melodex::EngineConfig::from_json(melodex::read_manifest(index_dir).config_json);
    }
    *out = wrap(melodex::load_indexes(index_dir, config));
  });
}

mdx_status mdx_engine_persist(const mdx_engine *engine, const char *index_dir) {
  return guarded([&] {
    require(engine && index_dir, "engine and index_dir");
    melodex::persist_indexes(engine->engine->indexes(), index_dir);
  });
}

void mdx_engine_free(mdx_engine *engine) { delete engine; }

mdx_status mdx_engine_song_count(const mdx_engine *engine, uint64_t *out) {
  return guarded([&] {
    require(engine && out, "engine and out");
    *out = engine->engine->indexes().records.size();
  });
}

mdx_status mdx_engine_config(const mdx_engine *engine, char **out_json) {
  return guarded([&] {
    require(engine && out_json, "engine and out_json");
    *out_json = dup_string(engine->engine->indexes().config.to_json());
  });
}

mdx_status mdx_engine_search(const mdx_engine *engine, const char *query_json, const uint8_t *wav, size_t wav_len,
                             int sequential, int include_timing, char **out_json) {
  return guarded([&] {
    require(engine && query_json && out_json, "engine, query_json and out_json");
    melodex::ParsedQuery parsed = melodex::parse_query_json(query_json);
    if (wav) {
      try {
        parsed.query.audio = melodex::decode_wav(std::span<const uint8_t>(wav, wav_len));
      } catch (const melodex::Error &e) {
        throw melodex::Error(e.code(), std::string("audio: ") + e.what());
      }
    }
    const auto response = engine->engine->execute(parsed.query, {.parallel = sequential == 0, .limit = parsed.limit});
    *out_json = dup_string(melodex::response_to_json(response, include_timing != 0));
  });
}

mdx_status mdx_engine_song(const mdx_engine *engine, uint32_t id, char **out_json) {
  return guarded([&] {
    require(engine && out_json, "engine and out_json");
    const melodex::SongRecord *record = engine->engine->song(melodex::SongId(id));
    if (!record) throw melodex::Error(melodex::ErrorCode::kNotFound, "no song " + std::to_string(id));
    *out_json = dup_string(melodex::song_to_json(*record));
  });
}

mdx_status mdx_server_start(const mdx_engine *engine, const char *host, int port, mdx_server **out) {
  return guarded([&] {
    require(engine && out, "engine and out");
    auto server = std::make_unique<mdx_server>();
    server->server = std::make_unique<melodex::SearchServer>(engine->engine);
    server->server->start(host ? host : "127.0.0.1", port);
    *out = server.release();
  });
}

int mdx_server_port(const mdx_server *server) { return server ? server->server->port() : -1; }

void mdx_server_wait(mdx_server *server) {
  if (server) server->server->wait();
}

void mdx_server_stop(mdx_server *server) {
  if (server) server->server->stop();
}

void mdx_server_free(mdx_server *server) { delete server; }

mdx_status mdx_eval(const mdx_engine *engine, const char *experiment_json, const char *out_dir, char **out_json) {
  return guarded([&] {
    require(engine && experiment_json && out_json, "engine, experiment_json and out_json");
    const json experiment = json::parse(experiment_json);
    const std::string suite = experiment.value("suite", std::string("noise"));
    const melodex::IndexSet &indexes = engine->engine->indexes();
    melodex::EvalReport report;
    if (suite == "noise") {
      melodex::NoiseExperiment ex;
      if (experiment.contains("snr_db")) {
        ex.snr_db.clear();
        for (const json &v : experiment.at("snr_db")) ex.snr_db.push_back(snr_from_json(v));
      }
      take(experiment, "clip_seconds", ex.clip_seconds);
      take(experiment, "queries_per_song", ex.queries_per_song);
      take(experiment, "seed", ex.seed);
      report = melodex::noise_recall_experiment(indexes, ex);
    } else if (suite == "sweep") {
      melodex::SweepExperiment ex;
      ex.parameter = melodex::parse_sweep_parameter(experiment.at("parameter").get<std::string>());
      ex.values = experiment.at("values").get<std::vector<double>>();
      if (experiment.contains("snr_db")) ex.snr_db = snr_from_json(experiment.at("snr_db"));
      take(experiment, "bit_flips", ex.bit_flips);
      take(experiment, "clip_seconds", ex.clip_seconds);
      take(experiment, "queries_per_song", ex.queries_per_song);
      take(experiment, "seed", ex.seed);
      if (experiment.contains("phrases")) {
        for (const json &p : experiment.at("phrases")) {
          ex.phrases.push_back({p.at("text").get<std::string>(), melodex::SongId(p.at("expected").get<uint32_t>())});
        }
      }
      report = melodex::sweep(indexes, ex);
    } else {
      throw melodex::Error(melodex::ErrorCode::kInvalidArgument, "unknown suite: " + suite);
    }
    if (out_dir) report.write(out_dir);
    json result = json::parse(report.to_json(true));
    result["csv"] = report.to_csv();
    result["timing_csv"] = report.timing_csv();
    *out_json = dup_string(result.dump(2));
  });
}

mdx_status mdx_synth(const char *out_dir, uint32_t songs, double seconds, uint64_t seed, char **out_corpus_path) {
  return guarded([&] {
    require(out_dir && out_corpus_path, "out_dir and out_corpus_path");
    melodex::SynthOptions options;
    options.songs = songs;
    options.seconds = seconds;
    options.seed = seed;
    *out_corpus_path = dup_string(melodex::write_synthetic_corpus(out_dir, options));
  });
}

}  // extern "C"
