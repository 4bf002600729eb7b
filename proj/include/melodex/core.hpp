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

#ifndef MELODEX_CORE_HPP_
#define MELODEX_CORE_HPP_

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace melodex {

// Error categories shared by every module. The C API maps these one-to-one
// onto mdx_status values.
enum class ErrorCode {
  kInvalidArgument = 1,
  kParse,
  kValidation,
  kNotFound,
  kUnsupportedFormat,
  kCorruptData,
  kVersionMismatch,
  kConfigMismatch,
  kMissingManifest,
  kIo,
  kDuplicateSong,
  kTooShort,
  kWeightSum,
  kFieldMismatch,
  kZeroPower,
  kInternal,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Dense per-corpus song identifier, assigned 0..K-1 in ingestion order.
struct SongId {
  uint32_t value = 0;

  constexpr SongId() = default;
  constexpr explicit SongId(uint32_t v) : value(v) {}
  friend constexpr auto operator<=>(SongId, SongId) = default;
};

// Calendar date. Year-only inputs normalize to January 1.
struct Date {
  int year = 1970;
  int month = 1;
  int day = 1;

  friend constexpr auto operator<=>(const Date &, const Date &) = default;

  bool valid() const;
  std::string to_string() const;

  // Accepts "YYYY-MM-DD" or "YYYY". Returns nullopt on malformed text; the
  // returned date may still be invalid (e.g. 2010-02-30), check valid().
  static std::optional<Date> parse(std::string_view text);
};

enum class FieldKind : uint8_t {
  kLyrics = 0,
  kTitle,
  kArtist,
  kAlbum,
  kGenre,
  kAudio,
};

inline constexpr std::array<FieldKind, 6> kAllFields = {
    FieldKind::kLyrics, FieldKind::kTitle, FieldKind::kArtist,
    FieldKind::kAlbum,  FieldKind::kGenre, FieldKind::kAudio};

inline constexpr std::array<FieldKind, 5> kTextFields = {
    FieldKind::kLyrics, FieldKind::kTitle, FieldKind::kArtist,
    FieldKind::kAlbum, FieldKind::kGenre};

std::string_view field_name(FieldKind field);
std::optional<FieldKind> parse_field(std::string_view name);
inline bool is_text_field(FieldKind f) { return f != FieldKind::kAudio; }

// Mono PCM with samples in [-1, 1].
struct PcmAudio {
  std::vector<float> samples;
  uint32_t sample_rate = 0;

  bool operator==(const PcmAudio &) const = default;
};

struct SongRecord {
  SongId id;
  std::string title;
  std::string artist;
  std::optional<std::string> album;
  std::optional<std::string> genre;
  Date release_date;
  std::string lyrics;
  // Resolved filesystem path of the song's WAV asset.
  std::optional<std::string> audio_path;

  bool operator==(const SongRecord &) const = default;
};

struct Query {
  std::optional<std::string> lyrics;
  std::optional<std::string> title;
  std::optional<std::string> artist;
  std::optional<std::string> album;
  std::optional<std::string> genre;
  std::optional<Date> released_before;
  std::optional<Date> released_after;
  std::optional<PcmAudio> audio;
  std::map<FieldKind, double> weight_overrides;

  // Text of a textual field, if present in the query.
  const std::optional<std::string> &text(FieldKind field) const;
  std::optional<std::string> &text(FieldKind field);

  // Searchable fields present in the query, in FieldKind order.
  std::vector<FieldKind> present_fields() const;
};

struct ValidationOutcome {
  std::vector<std::string> failures;

  bool ok() const { return failures.empty(); }
  bool has(std::string_view failure) const;
  std::string joined() const;
};

// Failure labels reported by the validators.
inline constexpr std::string_view kTitleNonEmpty = "title non-empty";
inline constexpr std::string_view kArtistNonEmpty = "artist non-empty";
inline constexpr std::string_view kValidDate = "valid calendar date";
inline constexpr std::string_view kNoSearchableField = "no searchable field";
inline constexpr std::string_view kDateBoundsInverted = "date bounds inverted";
inline constexpr std::string_view kInvalidBound = "valid date bound";
inline constexpr std::string_view kNegativeWeight = "non-negative weight";

ValidationOutcome validate_record(const SongRecord &record);
ValidationOutcome validate_query(const Query &query);

std::string_view trim(std::string_view text);

}  // namespace melodex

#endif  // MELODEX_CORE_HPP_
