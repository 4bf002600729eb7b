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

#include "melodex/core.hpp"
#include "test_support.hpp"

namespace melodex {
namespace {

using testing::make_record;

TEST(DateTest, ParsesFullAndYearOnly) {
  EXPECT_EQ(Date::parse("1999-12-31"), (Date{1999, 12, 31}));
  EXPECT_EQ(Date::parse("2001"), (Date{2001, 1, 1}));
  EXPECT_FALSE(Date::parse("99-1-1"));
  EXPECT_FALSE(Date::parse("2001-1-01"));
  EXPECT_FALSE(Date::parse("2001-01-01x"));
  EXPECT_FALSE(Date::parse(""));
}

TEST(DateTest, CalendarValidity) {
  EXPECT_TRUE((Date{2000, 2, 29}).valid());
  EXPECT_FALSE((Date{1900, 2, 29}).valid());
  EXPECT_FALSE((Date{2010, 2, 30}).valid());
  EXPECT_FALSE((Date{2010, 13, 1}).valid());
  EXPECT_FALSE((Date{2010, 4, 31}).valid());
  EXPECT_EQ((Date{987, 3, 4}).to_string(), "0987-03-04");
}

TEST(DateTest, OrderingIsChronological) {
  EXPECT_LT((Date{1999, 12, 31}), (Date{2000, 1, 1}));
  EXPECT_LT((Date{2000, 1, 31}), (Date{2000, 2, 1}));
}

TEST(FieldTest, NamesRoundTrip) {
  for (FieldKind f : kAllFields) EXPECT_EQ(parse_field(field_name(f)), f);
  EXPECT_FALSE(parse_field("composer"));
}

TEST(ErrorTest, EveryCodeHasAName) {
  for (int c = 1; c <= int(ErrorCode::kInternal); ++c) {
    EXPECT_FALSE(error_code_name(ErrorCode(c)).empty()) << c;
  }
  const Error e(ErrorCode::kParse, "line 2");
  EXPECT_EQ(e.code(), ErrorCode::kParse);
  EXPECT_STREQ(e.what(), "line 2");
}

TEST(ValidateRecordTest, EmptyTitleFails) {
  auto r = make_record(0, "", "Band", Date{2000, 1, 1});
  const auto v = validate_record(r);
  EXPECT_FALSE(v.ok());
  EXPECT_TRUE(v.has(kTitleNonEmpty));
}

TEST(ValidateRecordTest, WhitespaceArtistFails) {
  EXPECT_TRUE(validate_record(make_record(0, "T", "  \t", Date{2000, 1, 1})).has(kArtistNonEmpty));
}

TEST(ValidateRecordTest, ImpossibleDateFails) {
  EXPECT_TRUE(validate_record(make_record(0, "T", "A", Date{2010, 2, 30})).has(kValidDate));
}

TEST(ValidateRecordTest, FullyPopulatedRecordPasses) {
  auto r = make_record(0, "Title", "Artist", Date{1987, 6, 5}, "la la");
  r.album = "Album";
  r.genre = "rock";
  r.audio_path = "/x.wav";
  EXPECT_TRUE(validate_record(r).ok());
}

TEST(ValidateQueryTest, DateOnlyQueryHasNoSearchableField) {
  Query q;
  q.released_before = Date{2000, 1, 1};
  EXPECT_TRUE(validate_query(q).has(kNoSearchableField));
}

TEST(ValidateQueryTest, LyricsOnlyPasses) {
  Query q;
  q.lyrics = "hello";
  EXPECT_TRUE(validate_query(q).ok());
}

TEST(ValidateQueryTest, InvertedBoundsFail) {
  Query q;
  q.lyrics = "hello";
  q.released_after = Date{2010, 1, 1};
  q.released_before = Date{2000, 1, 1};
  EXPECT_TRUE(validate_query(q).has(kDateBoundsInverted));
  // Exclusive bounds: equal dates admit nothing.
  q.released_before = q.released_after;
  EXPECT_TRUE(validate_query(q).has(kDateBoundsInverted));
}

TEST(ValidateQueryTest, AudioAloneIsSearchable) {
  Query q;
  q.audio = PcmAudio{{0.0f}, 5512};
  EXPECT_TRUE(validate_query(q).ok());
  EXPECT_EQ(q.present_fields(), std::vector<FieldKind>{FieldKind::kAudio});
}

TEST(ValidateQueryTest, NegativeWeightFails) {
  Query q;
  q.title = "x";
  q.weight_overrides[FieldKind::kTitle] = -1.0;
  EXPECT_TRUE(validate_query(q).has(kNegativeWeight));
}

// Property: accepted iff some searchable field is present and the bounds
// are consistent, over every combination of fields and bound shapes.
TEST(ValidateQueryTest, AcceptanceMatchesRuleExhaustively) {
  const std::optional<Date> bounds[] = {std::nullopt, Date{1990, 1, 1}, Date{2000, 1, 1}};
  for (unsigned mask = 0; mask < 64; ++mask) {
    for (const auto &before : bounds) {
      for (const auto &after : bounds) {
        Query q;
        for (size_t i = 0; i < kTextFields.size(); ++i) {
          if (mask & (1u << i)) q.text(kTextFields[i]) = "w";
        }
        if (mask & 32u) q.audio = PcmAudio{{0.1f}, 5512};
        q.released_before = before;
        q.released_after = after;
        const bool consistent = !before || !after || *after < *before;
        EXPECT_EQ(validate_query(q).ok(), mask != 0 && consistent);
      }
    }
  }
}

TEST(TrimTest, StripsAsciiWhitespace) {
  EXPECT_EQ(trim("  a b \n"), "a b");
  EXPECT_EQ(trim(" \t "), "");
}

}  // namespace
}  // namespace melodex
