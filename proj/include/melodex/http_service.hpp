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

#ifndef MELODEX_HTTP_SERVICE_HPP_
#define MELODEX_HTTP_SERVICE_HPP_

#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "melodex/engine.hpp"

namespace melodex {

struct HttpReply {
  int status = 200;
  std::string body;  // JSON
};

// Endpoint logic, callable without a socket. Errors become
// {"error": <code name>, "message": ...} with 400, 404 or 500.
HttpReply handle_search(const Engine &engine, std::string_view query_json, const std::string *wav_bytes);
HttpReply handle_song(const Engine &engine, std::string_view id);
HttpReply handle_health(const Engine &engine);

int http_status_for(ErrorCode code);

// POST /search  multipart (part "query": JSON, optional part "audio": WAV)
//               or a plain JSON body
// GET  /songs/{id}
// GET  /health
class SearchServer {
 public:
  explicit SearchServer(std::shared_ptr<const Engine> engine);
  ~SearchServer();
  SearchServer(const SearchServer &) = delete;
  SearchServer &operator=(const SearchServer &) = delete;

  // Binds (port 0 picks a free port) and serves on a background thread.
  // Returns the bound port; throws kIo when binding fails.
  int start(const std::string &host, int port);
  int port() const;
  // Blocks until stop() is called from elsewhere.
  void wait();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace melodex

#endif  // MELODEX_HTTP_SERVICE_HPP_
