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

// Command-line front end. Talks to the engine only through the C API.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "melodex/melodex.h"

namespace {

using json = nlohmann::json;

// Thrown on any failure; carries the process exit status.
struct CliError {
  int status;
  std::string message;
};

void check(mdx_status status) {
  if (status != MDX_OK) {
    throw CliError{1, std::string(mdx_status_name(status)) + ": " + mdx_last_error()};
  }
}

std::string take_string(char *s) {
  std::string out(s ? s : "");
  mdx_string_free(s);
  return out;
}

std::string read_text(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError{1, "cannot read " + path};
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct EngineHandle {
  mdx_engine *engine = nullptr;
  ~EngineHandle() { mdx_engine_free(engine); }
};

void load(EngineHandle &h, const std::string &dir, const std::string &config_path) {
  const std::string config = config_path.empty() ? std::string() : read_text(config_path);
  check(mdx_engine_load(dir.c_str(), config_path.empty() ? nullptr : config.c_str(), &h.engine));
}

struct SearchArgs {
  std::string index_dir, config;
  std::optional<std::string> lyrics, title, artist, album, genre, audio, before, after, weights;
  std::optional<int> limit;
  bool json_out = false;
  bool sequential = false;
  bool timing = false;
};

json weights_json(const std::string &text) {
  json out = json::object();
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw CliError{2, "--weights expects field=value pairs, got '" + item + "'"};
    try {
      size_t used = 0;
      const double v = std::stod(item.substr(eq + 1), &used);
      if (used != item.size() - eq - 1) throw std::invalid_argument("trailing");
      out[item.substr(0, eq)] = v;
    } catch (const std::exception &) {
      throw CliError{2, "--weights: bad number in '" + item + "'"};
    }
  }
  return out;
}

int run_search(const SearchArgs &a) {
  json q = json::object();
  const std::pair<const char *, const std::optional<std::string> *> fields[] = {
      {"lyrics", &a.lyrics}, {"title", &a.title}, {"artist", &a.artist}, {"album", &a.album}, {"genre", &a.genre}};
  for (const auto &[key, value] : fields) {
    if (*value) q[key] = **value;
  }
  if (q.empty() && !a.audio) {
    throw CliError{2, "search needs at least one of --lyrics --title --artist --album --genre --audio"};
  }
  if (a.before) q["before"] = *a.before;
  if (a.after) q["after"] = *a.after;
  if (a.limit) q["limit"] = *a.limit;
  if (a.weights) q["weights"] = weights_json(*a.weights);

  std::string wav;
  if (a.audio) wav = read_text(*a.audio);

  EngineHandle h;
  load(h, a.index_dir, a.config);
  char *out = nullptr;
  check(mdx_engine_search(h.engine, q.dump().c_str(), a.audio ? reinterpret_cast<const uint8_t *>(wav.data()) : nullptr,
                          wav.size(), a.sequential ? 1 : 0, a.timing ? 1 : 0, &out));
  const std::string body = take_string(out);
  if (a.json_out) {
    std::cout << body << "\n";
    return 0;
  }
  const json r = json::parse(body);
  int rank = 0;
  for (const json &row : r.at("results")) {
    std::printf("%3d  %5u  %.6f  %s - %s (%s)\n", ++rank, row.at("id").get<unsigned>(),
                row.at("final_score").get<double>(), row.at("title").get<std::string>().c_str(),
                row.at("artist").get<std::string>().c_str(), row.at("release_date").get<std::string>().c_str());
  }
  if (rank == 0) std::printf("no results\n");
  if (a.timing && r.contains("timing_ms")) {
    for (const auto &[k, v] : r.at("timing_ms").items()) std::printf("# %s %.3f ms\n", k.c_str(), v.get<double>());
  }
  return 0;
}

int run_serve(const std::string &dir, const std::string &config, const std::string &host, int port) {
  // Handle SIGINT/SIGTERM synchronously: block them here, before the server
  // threads start, and wait for one on the main thread.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  EngineHandle h;
  load(h, dir, config);
  mdx_server *server = nullptr;
  check(mdx_server_start(h.engine, host.c_str(), port, &server));
  std::printf("listening on http://%s:%d\n", host.c_str(), mdx_server_port(server));
  std::fflush(stdout);
  int received = 0;
  sigwait(&signals, &received);
  mdx_server_stop(server);
  mdx_server_free(server);
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"melodex: multi-field music search over lyrics, metadata and audio"};
  app.require_subcommand(1);

  std::string corpus, out_dir, config;
  unsigned threads = 0;
  auto *index = app.add_subcommand("index", "Build and persist all indexes for a corpus");
  index->add_option("corpus", corpus, "Corpus file (JSON lines)")->required();
  index->add_option("out-dir", out_dir, "Snapshot directory")->required();
  index->add_option("--config", config, "Engine config JSON file");
  index->add_option("--threads", threads, "Fingerprinting threads (0 = all)");

  SearchArgs sa;
  auto *search = app.add_subcommand("search", "Query a snapshot");
  search->add_option("index-dir", sa.index_dir)->required();
  search->add_option("--lyrics", sa.lyrics);
  search->add_option("--title", sa.title);
  search->add_option("--artist", sa.artist);
  search->add_option("--album", sa.album);
  search->add_option("--genre", sa.genre);
  search->add_option("--audio", sa.audio, "WAV clip");
  search->add_option("--before", sa.before, "Released strictly before (YYYY or YYYY-MM-DD)");
  search->add_option("--after", sa.after, "Released strictly after");
  search->add_option("--limit", sa.limit, "Result count (default 20)");
  search->add_option("--weights", sa.weights, "Weight overrides, e.g. title=3,lyrics=1");
  search->add_option("--config", sa.config, "Expected engine config JSON file");
  search->add_flag("--json", sa.json_out, "Print the response JSON");
  search->add_flag("--sequential", sa.sequential, "Run field searches one at a time");
  search->add_flag("--timing", sa.timing, "Include per-field timing");

  std::string serve_dir, serve_config, host = "127.0.0.1";
  int port = 8080;
  auto *serve = app.add_subcommand("serve", "Serve the HTTP API");
  serve->add_option("index-dir", serve_dir)->required();
  serve->add_option("--port", port)->required();
  serve->add_option("--host", host);
  serve->add_option("--config", serve_config);

  std::string eval_dir, eval_config, suite = "noise", report_dir, parameter, phrases_file;
  std::vector<std::string> snrs;
  std::vector<double> values;
  double clip_seconds = 3.0;
  uint32_t per_song = 1, bit_flips = 0;
  uint64_t seed = 1;
  auto *eval = app.add_subcommand("eval", "Run a robustness or sweep experiment");
  eval->add_option("index-dir", eval_dir)->required();
  eval->add_option("--suite", suite)->check(CLI::IsMember({"noise", "sweep"}));
  eval->add_option("--out", report_dir, "Directory for report.csv, timing.csv, summary.json");
  eval->add_option("--snr", snrs, "SNR levels in dB, 'inf' for clean (sweep: first value)");
  eval->add_option("--parameter", parameter, "ngram_N, toggle_bits, coarse_min_matches or ber_threshold");
  eval->add_option("--values", values, "Sweep values");
  eval->add_option("--bit-flips", bit_flips, "Bits flipped per query sub-fingerprint");
  eval->add_option("--phrases", phrases_file, "JSON array of {text, expected} phrase queries");
  eval->add_option("--clip-seconds", clip_seconds);
  eval->add_option("--queries-per-song", per_song);
  eval->add_option("--seed", seed);
  eval->add_option("--config", eval_config);

  std::string synth_dir;
  uint32_t songs = 50;
  double seconds = 12.0;
  uint64_t synth_seed = 1;
  auto *synth = app.add_subcommand("synth", "Write a synthetic corpus with audio");
  synth->add_option("out-dir", synth_dir)->required();
  synth->add_option("--songs", songs);
  synth->add_option("--seconds", seconds);
  synth->add_option("--seed", synth_seed);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*index) {
      const std::string cfg = config.empty() ? std::string() : read_text(config);
      EngineHandle h;
      check(mdx_engine_build(corpus.c_str(), config.empty() ? nullptr : cfg.c_str(), threads, &h.engine));
      check(mdx_engine_persist(h.engine, out_dir.c_str()));
      uint64_t n = 0;
      check(mdx_engine_song_count(h.engine, &n));
      std::printf("indexed %llu songs into %s\n", static_cast<unsigned long long>(n), out_dir.c_str());
      return 0;
    }
    if (*search) return run_search(sa);
    if (*serve) return run_serve(serve_dir, serve_config, host, port);
    if (*eval) {
      json experiment = {{"suite", suite}, {"clip_seconds", clip_seconds}, {"queries_per_song", per_song}, {"seed", seed}};
      const auto snr_value = [](const std::string &s) -> json {
        if (s == "inf") return s;
        try {
          return std::stod(s);
        } catch (const std::exception &) {
          throw CliError{2, "--snr: not a number: " + s};
        }
      };
      if (suite == "noise") {
        if (!snrs.empty()) {
          experiment["snr_db"] = json::array();
          for (const std::string &s : snrs) experiment["snr_db"].push_back(snr_value(s));
        }
      } else {
        if (parameter.empty() || values.empty()) throw CliError{2, "sweep needs --parameter and --values"};
        experiment["parameter"] = parameter;
        experiment["values"] = values;
        experiment["bit_flips"] = bit_flips;
        if (!snrs.empty()) experiment["snr_db"] = snr_value(snrs.front());
        if (!phrases_file.empty()) experiment["phrases"] = json::parse(read_text(phrases_file));
      }
      EngineHandle h;
      load(h, eval_dir, eval_config);
      char *out = nullptr;
      check(mdx_eval(h.engine, experiment.dump().c_str(), report_dir.empty() ? nullptr : report_dir.c_str(), &out));
      const json r = json::parse(take_string(out));
      std::cout << r.at("csv").get<std::string>();
      return 0;
    }
    if (*synth) {
      char *path = nullptr;
      check(mdx_synth(synth_dir.c_str(), songs, seconds, synth_seed, &path));
      std::printf("%s\n", take_string(path).c_str());
      return 0;
    }
  } catch (const CliError &e) {
    std::fprintf(stderr, "melodex: %s\n", e.message.c_str());
    return e.status;
  } catch (const std::exception &e) {
    std::fprintf(stderr, "melodex: %s\n", e.what());
    return 1;
  }
  return 0;
}
