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

/* C interface to the melodex search engine. All strings are UTF-8. Strings
 * returned through char** out-parameters are owned by the caller and must be
 * released with mdx_string_free. On failure a function returns a non-zero
 * status and mdx_last_error() describes it (per thread). */
#ifndef MELODEX_MELODEX_H_
#define MELODEX_MELODEX_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(MDX_BUILDING_LIBRARY)
#define MDX_API __declspec(dllexport)
#else
#define MDX_API __declspec(dllimport)
#endif
#else
#define MDX_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mdx_status {
  MDX_OK = 0,
  MDX_ERR_INVALID_ARGUMENT = 1,
  MDX_ERR_PARSE = 2,
  MDX_ERR_VALIDATION = 3,
  MDX_ERR_NOT_FOUND = 4,
  MDX_ERR_UNSUPPORTED_FORMAT = 5,
  MDX_ERR_CORRUPT_DATA = 6,
  MDX_ERR_VERSION_MISMATCH = 7,
  MDX_ERR_CONFIG_MISMATCH = 8,
  MDX_ERR_MISSING_MANIFEST = 9,
  MDX_ERR_IO = 10,
  MDX_ERR_DUPLICATE_SONG = 11,
  MDX_ERR_TOO_SHORT = 12,
  MDX_ERR_WEIGHT_SUM = 13,
  MDX_ERR_FIELD_MISMATCH = 14,
  MDX_ERR_ZERO_POWER = 15,
  MDX_ERR_INTERNAL = 16
} mdx_status;

typedef struct mdx_engine mdx_engine;
typedef struct mdx_server mdx_server;

MDX_API const char *mdx_version(void);
MDX_API const char *mdx_status_name(mdx_status status);
/* Message of the last failed call on this thread; "" if none. */
MDX_API const char *mdx_last_error(void);
MDX_API void mdx_string_free(char *s);

/* config_json may be NULL (defaults) or a partial JSON overlay. threads = 0
 * uses every hardware thread. */
MDX_API mdx_status mdx_engine_build(const char *corpus_path, const char *config_json, unsigned threads,
                                    mdx_engine **out);
/* With config_json NULL the configuration recorded in the snapshot is
 * expected; otherwise the snapshot digest must match config_json. */
MDX_API mdx_status mdx_engine_load(const char *index_dir, const char *config_json, mdx_engine **out);
MDX_API mdx_status mdx_engine_persist(const mdx_engine *engine, const char *index_dir);
MDX_API void mdx_engine_free(mdx_engine *engine);

MDX_API mdx_status mdx_engine_song_count(const mdx_engine *engine, uint64_t *out);
MDX_API mdx_status mdx_engine_config(const mdx_engine *engine, char **out_json);

/* query_json uses the /search wire form. wav may be NULL. sequential != 0
 * runs field searches one after another; include_timing == 0 drops the
 * timing_ms object so responses compare byte for byte. */
MDX_API mdx_status mdx_engine_search(const mdx_engine *engine, const char *query_json, const uint8_t *wav,
                                     size_t wav_len, int sequential, int include_timing, char **out_json);
MDX_API mdx_status mdx_engine_song(const mdx_engine *engine, uint32_t id, char **out_json);

/* Serves /search, /songs/{id} and /health on a background thread. port 0
 * picks a free port. The server keeps the indexes alive on its own. */
MDX_API mdx_status mdx_server_start(const mdx_engine *engine, const char *host, int port, mdx_server **out);
MDX_API int mdx_server_port(const mdx_server *server);
MDX_API void mdx_server_wait(mdx_server *server);
MDX_API void mdx_server_stop(mdx_server *server);
MDX_API void mdx_server_free(mdx_server *server);

/* experiment_json:
 *   {"suite": "noise", "snr_db": ["inf", 30, 20, 10, 0], "clip_seconds": 3,
 *    "queries_per_song": 1, "seed": 1}
 *   {"suite": "sweep", "parameter": "toggle_bits", "values": [0, 1],
 *    "snr_db": "inf", "bit_flips": 1, "clip_seconds": 3,
 *    "queries_per_song": 1, "seed": 1,
 *    "phrases": [{"text": "...", "expected": 3}]}
 * Writes report.csv, timing.csv and summary.json when out_dir is non-NULL.
 * out_json receives {"csv": ..., "timing_csv": ..., "rows": [...]}. */
MDX_API mdx_status mdx_eval(const mdx_engine *engine, const char *experiment_json, const char *out_dir,
                            char **out_json);

/* Writes a deterministic synthetic corpus; out_corpus_path receives the
 * corpus.jsonl path. */
MDX_API mdx_status mdx_synth(const char *out_dir, uint32_t songs, double seconds, uint64_t seed,
                             char **out_corpus_path);

#ifdef __cplusplus
}
#endif

#endif /* MELODEX_MELODEX_H_ */
