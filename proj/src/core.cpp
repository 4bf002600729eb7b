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

#include "melodex/core.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace melodex {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kParse: return "parse_error";
    case ErrorCode::kValidation: return "validation_error";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kUnsupportedFormat: return "unsupported_format";
    case ErrorCode::kCorruptData: return "corrupt_data";
    case ErrorCode::kVersionMismatch: return "version_mismatch";
    case ErrorCode::kConfigMismatch: return "config_mismatch";
    case ErrorCode::kMissingManifest: return "missing_manifest";
    case ErrorCode::kIo: return "io_error";
    case ErrorCode::kDuplicateSong: return "duplicate_song";
    case ErrorCode::kTooShort: return "too_short";
    case ErrorCode::kWeightSum: return "weight_sum";
    case ErrorCode::kFieldMismatch: return "field_mismatch";
    case ErrorCode::kZeroPower: return "zero_power";
    case ErrorCode::kInternal: return "internal";
  }
  return "unknown";
}

namespace {

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m == 2 && is_leap(y)) return 29;
  return kDays[m - 1];
}

std::optional<int> parse_int(std::string_view s, size_t digits) {
  if (s.size() != digits) return std::nullopt;
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

bool Date::valid() const {
  if (year < 1 || year > 9999) return false;
  if (month < 1 || month > 12) return false;
  return day >= 1 && day <= days_in_month(year, month);
}

std::string Date::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
  return buf;
}

std::optional<Date> Date::parse(std::string_view text) {
  text = trim(text);
  if (text.size() == 4) {
    auto y = parse_int(text, 4);
    if (!y) return std::nullopt;
    return Date{*y, 1, 1};
  }
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  auto y = parse_int(text.substr(0, 4), 4);
  auto m = parse_int(text.substr(5, 2), 2);
  auto d = parse_int(text.substr(8, 2), 2);
  if (!y || !m || !d) return std::nullopt;
  return Date{*y, *m, *d};
}

std::string_view field_name(FieldKind field) {
  switch (field) {
    case FieldKind::kLyrics: return "lyrics";
    case FieldKind::kTitle: return "title";
    case FieldKind::kArtist: return "artist";
    case FieldKind::kAlbum: return "album";
    case FieldKind::kGenre: return "genre";
    case FieldKind::kAudio: return "audio";
  }
  return "unknown";
}

std::optional<FieldKind> parse_field(std::string_view name) {
  for (FieldKind f : kAllFields) {
    if (field_name(f) == name) return f;
  }
  return std::nullopt;
}

const std::optional<std::string> &Query::text(FieldKind field) const {
  switch (field) {
    case FieldKind::kLyrics: return lyrics;
    case FieldKind::kTitle: return title;
    case FieldKind::kArtist: return artist;
    case FieldKind::kAlbum: return album;
    case FieldKind::kGenre: return genre;
    case FieldKind::kAudio: break;
  }
  throw Error(ErrorCode::kInvalidArgument, "audio is not a text field");
}

std::optional<std::string> &Query::text(FieldKind field) {
  return const_cast<std::optional<std::string> &>(
      static_cast<const Query &>(*this).text(field));
}

std::vector<FieldKind> Query::present_fields() const {
  std::vector<FieldKind> out;
  for (FieldKind f : kTextFields) {
    if (text(f).has_value()) out.push_back(f);
  }
  if (audio.has_value()) out.push_back(FieldKind::kAudio);
  return out;
}

bool ValidationOutcome::has(std::string_view failure) const {
  for (const auto &f : failures) {
    if (f == failure) return true;
  }
  return false;
}

std::string ValidationOutcome::joined() const {
  std::string out;
  for (const auto &f : failures) {
    if (!out.empty()) out += "; ";
    out += f;
  }
  return out;
}

std::string_view trim(std::string_view text) {
  constexpr std::string_view kSpace = " \t\r\n\f\v";
  const auto b = text.find_first_not_of(kSpace);
  if (b == std::string_view::npos) return {};
  const auto e = text.find_last_not_of(kSpace);
  return text.substr(b, e - b + 1);
}

ValidationOutcome validate_record(const SongRecord &record) {
  ValidationOutcome out;
  if (trim(record.title).empty()) out.failures.emplace_back(kTitleNonEmpty);
  if (trim(record.artist).empty()) out.failures.emplace_back(kArtistNonEmpty);
  if (!record.release_date.valid()) out.failures.emplace_back(kValidDate);
  return out;
}

ValidationOutcome validate_query(const Query &query) {
  ValidationOutcome out;
  if (query.present_fields().empty()) {
    out.failures.emplace_back(kNoSearchableField);
  }
  const bool before_ok = !query.released_before || query.released_before->valid();
  const bool after_ok = !query.released_after || query.released_after->valid();
  if (!before_ok || !after_ok) out.failures.emplace_back(kInvalidBound);
  if (before_ok && after_ok && query.released_before && query.released_after &&
      !(*query.released_after < *query.released_before)) {
    out.failures.emplace_back(kDateBoundsInverted);
  }
  for (const auto &[field, w] : query.weight_overrides) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      out.failures.emplace_back(kNegativeWeight);
      break;
    }
  }
  return out;
}

}  // namespace melodex
