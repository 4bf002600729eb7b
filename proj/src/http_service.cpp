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

#include "melodex/http_service.hpp"

#include <charconv>
#include <mutex>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "melodex/audio.hpp"

namespace melodex {

namespace {

HttpReply error_reply(int status, std::string_view code, std::string_view message) {
  return {status, nlohmann::json{{"error", code}, {"message", message}}.dump()};
}

HttpReply error_reply(const Error &e) {
  return error_reply(http_status_for(e.code()), error_code_name(e.code()), e.what());
}

}  // namespace

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kInternal:
    case ErrorCode::kIo:
    case ErrorCode::kMissingManifest:
    case ErrorCode::kVersionMismatch:
    case ErrorCode::kConfigMismatch: return 500;
    default: return 400;
  }
}

HttpReply handle_search(const Engine &engine, std::string_view query_json, const std::string *wav_bytes) {
  try {
    ParsedQuery parsed = parse_query_json(query_json.empty() ? std::string_view("{}") : query_json);
    if (wav_bytes) {
      try {
        parsed.query.audio = decode_wav(
            std::span<const uint8_t>(reinterpret_cast<const uint8_t *>(wav_bytes->data()), wav_bytes->size()));
      } catch (const Error &e) {
        throw Error(e.code(), std::string("audio: ") + e.what());
      }
    }
    const SearchResponse response = engine.execute(parsed.query, {.parallel = true, .limit = parsed.limit});
    return {200, response_to_json(response, true)};
  } catch (const Error &e) {
    return error_reply(e);
  } catch (const std::exception &e) {
    return error_reply(500, error_code_name(ErrorCode::kInternal), e.what());
  }
}

HttpReply handle_song(const Engine &engine, std::string_view id) {
  uint32_t value = 0;
  const auto [end, ec] = std::from_chars(id.data(), id.data() + id.size(), value);
  if (ec != std::errc() || end != id.data() + id.size() || id.empty()) {
    return error_reply(400, error_code_name(ErrorCode::kInvalidArgument), "song id must be a non-negative integer");
  }
  const SongRecord *record = engine.song(SongId(value));
  if (!record) return error_reply(404, error_code_name(ErrorCode::kNotFound), "no song " + std::string(id));
  return {200, song_to_json(*record)};
}

HttpReply handle_health(const Engine &engine) {
  return {200, nlohmann::json{{"status", "ok"}, {"songs", engine.indexes().records.size()}}.dump()};
}

struct SearchServer::Impl {
  std::shared_ptr<const Engine> engine;
  httplib::Server server;
  std::thread thread;
  std::mutex join_mutex;
  int port = -1;
};

SearchServer::SearchServer(std::shared_ptr<const Engine> engine) : impl_(std::make_unique<Impl>()) {
  impl_->engine = std::move(engine);
  const Engine *e = impl_->engine.get();
  httplib::Server &s = impl_->server;
  const auto send = [](httplib::Response &res, const HttpReply &reply) {
    res.status = reply.status;
    res.set_content(reply.body, "application/json");
  };
  // SO_REUSEADDR only: the library default also sets SO_REUSEPORT, which
  // lets a second server silently share a port that is already in use.
  s.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void *>(&yes), sizeof(yes));
  });
  s.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  s.Post("/search", [e, send](const httplib::Request &req, httplib::Response &res) {
    if (req.is_multipart_form_data()) {
      const std::string query = req.has_file("query") ? req.get_file_value("query").content : std::string();
      std::string audio;
      const bool has_audio = req.has_file("audio");
      if (has_audio) audio = req.get_file_value("audio").content;
      send(res, handle_search(*e, query, has_audio ? &audio : nullptr));
    } else {
      send(res, handle_search(*e, req.body, nullptr));
    }
  });
  s.Get(R"(/songs/([^/]+))", [e, send](const httplib::Request &req, httplib::Response &res) {
    send(res, handle_song(*e, req.matches[1].str()));
  });
  s.Get("/health", [e, send](const httplib::Request &, httplib::Response &res) { send(res, handle_health(*e)); });
}

SearchServer::~SearchServer() { stop(); }

int SearchServer::start(const std::string &host, int port) {
  if (impl_->thread.joinable()) throw Error(ErrorCode::kInvalidArgument, "server already started");
  httplib::Server &s = impl_->server;
  if (port == 0) {
    impl_->port = s.bind_to_any_port(host);
  } else {
    impl_->port = s.bind_to_port(host, port) ? port : -1;
  }
  if (impl_->port < 0) throw Error(ErrorCode::kIo, "cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([&s] { s.listen_after_bind(); });
  s.wait_until_ready();
  return impl_->port;
}

int SearchServer::port() const { return impl_->port; }

void SearchServer::wait() {
  std::lock_guard lock(impl_->join_mutex);
  if (impl_->thread.joinable()) impl_->thread.join();
}

void SearchServer::stop() {
  // Stop first: a concurrent wait() holds the mutex until the thread exits.
  impl_->server.stop();
  std::lock_guard lock(impl_->join_mutex);
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace melodex
