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

#include <algorithm>
#include <cmath>

#include "melodex/rank_merge.hpp"
#include "melodex/synth.hpp"
#include "test_support.hpp"

namespace melodex {
namespace {

using testing::error_code_of;

FieldResult result(FieldKind f, std::map<SongId, double> scores) { return FieldResult{f, std::move(scores)}; }

std::vector<SongId> order(const std::vector<RankedResult> &ranked) {
  std::vector<SongId> ids;
  for (const RankedResult &r : ranked) ids.push_back(r.song);
  return ids;
}

size_t position(const std::vector<RankedResult> &ranked, SongId song) {
  for (size_t i = 0; i < ranked.size(); ++i) {
    if (ranked[i].song == song) return i;
  }
  return ranked.size();
}

FieldResult random_result(SeededRng &rng, FieldKind f, uint32_t songs) {
  FieldResult r{f, {}};
  for (uint32_t s = 0; s < songs; ++s) {
    if (rng.uniform() < 0.6) r.scores[SongId(s)] = f == FieldKind::kAudio ? rng.uniform() : rng.uniform(0.0, 20.0);
  }
  return r;
}

std::vector<FieldKind> random_fields(SeededRng &rng) {
  std::vector<FieldKind> fields;
  for (FieldKind f : kAllFields) {
    if (rng.uniform() < 0.5) fields.push_back(f);
  }
  if (fields.empty()) fields.push_back(kAllFields[rng.below(kAllFields.size())]);
  return fields;
}

TEST(NormalizeTest, MinMax) {
  const auto n = normalize(result(FieldKind::kLyrics, {{SongId(0), 2}, {SongId(1), 4}, {SongId(2), 6}}));
  EXPECT_EQ(n.scores.at(SongId(0)), 0.0);
  EXPECT_EQ(n.scores.at(SongId(1)), 0.5);
  EXPECT_EQ(n.scores.at(SongId(2)), 1.0);
}

TEST(NormalizeTest, SingletonAndConstantBecomeOne) {
  EXPECT_EQ(normalize(result(FieldKind::kTitle, {{SongId(0), 17}})).scores.at(SongId(0)), 1.0);
  const auto n = normalize(result(FieldKind::kGenre, {{SongId(0), 3}, {SongId(4), 3}}));
  EXPECT_EQ(n.scores.at(SongId(0)), 1.0);
  EXPECT_EQ(n.scores.at(SongId(4)), 1.0);
}

TEST(NormalizeTest, EmptyStaysEmpty) { EXPECT_TRUE(normalize(result(FieldKind::kArtist, {})).scores.empty()); }

TEST(NormalizeTest, AudioPassesThrough) {
  const auto r = result(FieldKind::kAudio, {{SongId(0), 0.7}, {SongId(1), 0.9}});
  EXPECT_EQ(normalize(r), r);
}

TEST(NormalizeTest, OutputInUnitInterval) {
  SeededRng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = normalize(random_result(rng, FieldKind::kLyrics, 30));
    for (const auto &[song, s] : n.scores) {
      EXPECT_GE(s, 0.0);
      EXPECT_LE(s, 1.0);
    }
  }
}

TEST(WeightsTest, BaseWeights) {
  EXPECT_EQ(base_weight(FieldKind::kTitle), 3.0);
  EXPECT_EQ(base_weight(FieldKind::kArtist), 2.0);
  EXPECT_EQ(base_weight(FieldKind::kAlbum), 2.0);
  EXPECT_EQ(base_weight(FieldKind::kGenre), 1.0);
  EXPECT_EQ(base_weight(FieldKind::kLyrics), 2.0);
  EXPECT_EQ(base_weight(FieldKind::kAudio), 4.0);
}

TEST(WeightsTest, SingleFieldGetsFullWeight) {
  EXPECT_EQ(default_weights({FieldKind::kLyrics}).weights, (std::map<FieldKind, double>{{FieldKind::kLyrics, 1.0}}));
}

TEST(WeightsTest, TitleOutweighsLyrics) {
  const auto w = default_weights({FieldKind::kTitle, FieldKind::kLyrics}).weights;
  EXPECT_DOUBLE_EQ(w.at(FieldKind::kTitle), 0.6);
  EXPECT_DOUBLE_EQ(w.at(FieldKind::kLyrics), 0.4);
  EXPECT_GT(w.at(FieldKind::kTitle), w.at(FieldKind::kLyrics));
}

TEST(WeightsTest, AudioAndArtist) {
  const auto w = default_weights({FieldKind::kAudio, FieldKind::kArtist});
  EXPECT_DOUBLE_EQ(w.weights.at(FieldKind::kAudio), 4.0 / 6.0);
  EXPECT_DOUBLE_EQ(w.weights.at(FieldKind::kArtist), 2.0 / 6.0);
  EXPECT_NEAR(w.sum(), 1.0, kWeightSumTolerance);
}

TEST(WeightsTest, EveryNonEmptySubsetSumsToOne) {
  for (unsigned mask = 1; mask < 64; ++mask) {
    std::set<FieldKind> present;
    for (size_t i = 0; i < kAllFields.size(); ++i) {
      if (mask & (1u << i)) present.insert(kAllFields[i]);
    }
    const auto w = default_weights(present);
    EXPECT_EQ(w.weights.size(), present.size());
    EXPECT_LE(std::fabs(w.sum() - 1.0), kWeightSumTolerance) << mask;
  }
}

TEST(WeightsTest, OverridesReplaceBaseAndRenormalize) {
  const auto w = resolve_weights({FieldKind::kTitle, FieldKind::kLyrics}, {{FieldKind::kLyrics, 6.0}});
  EXPECT_DOUBLE_EQ(w.weights.at(FieldKind::kTitle), 3.0 / 9.0);
  EXPECT_DOUBLE_EQ(w.weights.at(FieldKind::kLyrics), 6.0 / 9.0);
}

TEST(WeightsTest, OverridesForAbsentFieldsIgnored) {
  EXPECT_EQ(resolve_weights({FieldKind::kLyrics}, {{FieldKind::kAudio, 9.0}}), default_weights({FieldKind::kLyrics}));
}

TEST(WeightsTest, RejectsZeroTotalAndNegatives) {
  EXPECT_EQ(error_code_of([] { resolve_weights({FieldKind::kLyrics}, {{FieldKind::kLyrics, 0.0}}); }),
            ErrorCode::kWeightSum);
  EXPECT_EQ(error_code_of([] { resolve_weights({FieldKind::kLyrics}, {{FieldKind::kLyrics, -1.0}}); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(error_code_of([] { resolve_weights({FieldKind::kLyrics}, {{FieldKind::kLyrics, NAN}}); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(error_code_of([] { default_weights({}); }), ErrorCode::kInvalidArgument);
}

TEST(MergeTest, WeightedSum) {
  const std::vector<FieldResult> rs = {result(FieldKind::kLyrics, {{SongId(0), 0.5}}),
                                       result(FieldKind::kAudio, {{SongId(0), 1.0}})};
  const MergeWeights w{{{FieldKind::kLyrics, 0.4}, {FieldKind::kAudio, 0.6}}};
  const auto merged = merge(rs, w);
  ASSERT_EQ(merged.size(), 1u);
  EXPECT_NEAR(merged[0].final_score, 0.8, 1e-15);
}

TEST(MergeTest, AbsentFieldContributesZero) {
  const std::vector<FieldResult> rs = {result(FieldKind::kLyrics, {{SongId(3), 0.9}}),
                                       result(FieldKind::kAudio, {{SongId(4), 1.0}})};
  const MergeWeights w{{{FieldKind::kLyrics, 0.4}, {FieldKind::kAudio, 0.6}}};
  const auto merged = merge(rs, w);
  ASSERT_EQ(merged.size(), 2u);
  EXPECT_EQ(merged[0].song, SongId(3));
  EXPECT_NEAR(merged[0].final_score, 0.36, 1e-15);
  EXPECT_EQ(merged[0].breakdown.at(FieldKind::kAudio), 0.0);
  EXPECT_EQ(merged[1].breakdown.at(FieldKind::kLyrics), 0.0);
}

TEST(MergeTest, RejectsWeightSumOffByMoreThanTolerance) {
  const std::vector<FieldResult> rs = {result(FieldKind::kLyrics, {{SongId(0), 1.0}}),
                                       result(FieldKind::kTitle, {{SongId(0), 1.0}})};
  EXPECT_EQ(error_code_of([&] { merge(rs, MergeWeights{{{FieldKind::kLyrics, 0.5}, {FieldKind::kTitle, 0.5 + 2e-9}}}); }),
            ErrorCode::kWeightSum);
  EXPECT_EQ(error_code_of([&] { merge(rs, MergeWeights{{{FieldKind::kLyrics, 0.5}, {FieldKind::kTitle, 0.5 - 2e-9}}}); }),
            ErrorCode::kWeightSum);
  EXPECT_NO_THROW(merge(rs, MergeWeights{{{FieldKind::kLyrics, 0.5}, {FieldKind::kTitle, 0.5 + 5e-10}}}));
}

TEST(MergeTest, RejectsFieldMismatch) {
  const std::vector<FieldResult> rs = {result(FieldKind::kLyrics, {{SongId(0), 1.0}})};
  EXPECT_EQ(error_code_of([&] { merge(rs, MergeWeights{{{FieldKind::kTitle, 1.0}}}); }), ErrorCode::kFieldMismatch);
  EXPECT_EQ(error_code_of([&] {
              merge(rs, MergeWeights{{{FieldKind::kLyrics, 0.5}, {FieldKind::kTitle, 0.5}}});
            }),
            ErrorCode::kFieldMismatch);
  const std::vector<FieldResult> dup = {rs[0], rs[0]};
  EXPECT_EQ(error_code_of([&] { merge(dup, MergeWeights{{{FieldKind::kLyrics, 1.0}}}); }), ErrorCode::kFieldMismatch);
}

TEST(MergeTest, CandidateSetIsUnion) {
  SeededRng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<FieldResult> rs;
    std::set<SongId> expected;
    std::set<FieldKind> present;
    for (FieldKind f : random_fields(rng)) {
      rs.push_back(normalize(random_result(rng, f, 25)));
      present.insert(f);
      for (const auto &[song, s] : rs.back().scores) expected.insert(song);
    }
    std::set<SongId> got;
    for (const RankedResult &r : merge(rs, default_weights(present))) got.insert(r.song);
    EXPECT_EQ(got, expected);
  }
}

// Final scores equal an independent longhand evaluation of the weighted sum
// and a recompute from the stored breakdown bit for bit.
TEST(MergeTest, BreakdownRecomputeIsExact) {
  SeededRng rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<FieldResult> rs;
    std::set<FieldKind> present;
    for (FieldKind f : random_fields(rng)) {
      rs.push_back(normalize(random_result(rng, f, 20)));
      present.insert(f);
    }
    const MergeWeights w = default_weights(present);
    for (const RankedResult &r : merge(rs, w)) {
      EXPECT_EQ(recompute_final_score(r, w), r.final_score);
      long double oracle = 0.0L;
      for (const FieldResult &fr : rs) {
        auto it = fr.scores.find(r.song);
        oracle += (long double)w.weights.at(fr.field) * (it == fr.scores.end() ? 0.0L : it->second);
      }
      EXPECT_NEAR(double(oracle), r.final_score, 1e-12);
      EXPECT_GE(r.final_score, 0.0);
      EXPECT_LE(r.final_score, 1.0 + 1e-12);
    }
  }
}

TEST(MergeTest, SingleFieldRankEquivalence) {
  SeededRng rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const FieldKind f = kAllFields[rng.below(kAllFields.size())];
    const FieldResult raw = random_result(rng, f, 40);
    const FieldResult n = normalize(raw);
    const std::vector<FieldResult> rs = {n};
    const auto ranked = rank(merge(rs, default_weights({f})), 1000);

    std::vector<std::pair<double, SongId>> field_order;
    for (const auto &[song, s] : raw.scores) field_order.emplace_back(s, song);
    std::sort(field_order.begin(), field_order.end(), [](const auto &a, const auto &b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    ASSERT_EQ(ranked.size(), field_order.size());
    for (size_t i = 0; i < ranked.size(); ++i) EXPECT_EQ(ranked[i].song, field_order[i].second);
  }
}

TEST(MergeTest, RaisingOneScoreNeverLowersRank) {
  SeededRng rng(14);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<FieldResult> rs;
    std::set<FieldKind> present;
    for (FieldKind f : random_fields(rng)) {
      rs.push_back(normalize(random_result(rng, f, 15)));
      present.insert(f);
    }
    const MergeWeights w = default_weights(present);
    const auto before = rank(merge(rs, w), 1000);
    if (before.empty()) continue;
    const SongId target = before[rng.below(before.size())].song;
    FieldResult &field = rs[rng.below(rs.size())];
    double &s = field.scores[target];
    s = std::min(1.0, s + rng.uniform(0.0, 1.0));
    const auto after = rank(merge(rs, w), 1000);
    EXPECT_LE(position(after, target), position(before, target)) << "trial " << trial;
  }
}

TEST(FilterTest, BeforeBoundRemovesLaterSongs) {
  Query q;
  q.released_before = Date{2008, 1, 1};
  std::vector<RankedResult> rs = {{SongId(0), 0.5, {}}, {SongId(1), 0.4, {}}};
  const std::map<SongId, Date> dates = {{SongId(0), Date{2010, 5, 5}}, {SongId(1), Date{1999, 1, 1}}};
  const auto out = apply_filters(rs, q, [&](SongId s) { return dates.at(s); });
  EXPECT_EQ(order(out), (std::vector<SongId>{SongId(1)}));
}

TEST(FilterTest, BoundsAreExclusive) {
  std::vector<RankedResult> rs = {{SongId(0), 0.5, {}}, {SongId(1), 0.4, {}}, {SongId(2), 0.3, {}}};
  const std::map<SongId, Date> dates = {
      {SongId(0), Date{2000, 1, 1}}, {SongId(1), Date{2000, 1, 2}}, {SongId(2), Date{2000, 1, 3}}};
  auto lookup = [&](SongId s) { return dates.at(s); };
  Query before;
  before.released_before = Date{2000, 1, 2};
  EXPECT_EQ(order(apply_filters(rs, before, lookup)), (std::vector<SongId>{SongId(0)}));
  Query after;
  after.released_after = Date{2000, 1, 2};
  EXPECT_EQ(order(apply_filters(rs, after, lookup)), (std::vector<SongId>{SongId(2)}));
  Query both;
  both.released_after = Date{2000, 1, 1};
  both.released_before = Date{2000, 1, 3};
  EXPECT_EQ(order(apply_filters(rs, both, lookup)), (std::vector<SongId>{SongId(1)}));
}

TEST(FilterTest, NoBoundsLeavesListUnchanged) {
  std::vector<RankedResult> rs = {{SongId(0), 0.5, {}}, {SongId(1), 0.4, {}}};
  EXPECT_EQ(apply_filters(rs, Query{}, [](SongId) { return Date{2000, 1, 1}; }), rs);
}

TEST(FilterTest, RandomizedSoundness) {
  SeededRng rng(15);
  auto random_date = [&] { return Date{int(1960 + rng.below(64)), int(1 + rng.below(12)), int(1 + rng.below(28))}; };
  std::map<SongId, Date> dates;
  std::vector<RankedResult> rs;
  for (uint32_t s = 0; s < 200; ++s) {
    dates[SongId(s)] = random_date();
    rs.push_back({SongId(s), rng.uniform(), {}});
  }
  for (int trial = 0; trial < 1000; ++trial) {
    Query q;
    if (rng.uniform() < 0.7) q.released_before = random_date();
    if (rng.uniform() < 0.7) q.released_after = random_date();
    const auto out = apply_filters(rs, q, [&](SongId s) { return dates.at(s); });
    size_t expected = 0;
    for (const auto &[song, d] : dates) {
      const bool keep = (!q.released_before || d < *q.released_before) && (!q.released_after || d > *q.released_after);
      expected += keep;
    }
    EXPECT_EQ(out.size(), expected);
    for (const RankedResult &r : out) {
      if (q.released_before) {
        EXPECT_LT(dates.at(r.song), *q.released_before);
      }
      if (q.released_after) {
        EXPECT_GT(dates.at(r.song), *q.released_after);
      }
    }
  }
}

TEST(RankTest, DescendingScore) {
  EXPECT_EQ(order(rank({{SongId(0), 0.8, {}}, {SongId(1), 0.9, {}}}, 10)), (std::vector<SongId>{SongId(1), SongId(0)}));
}

TEST(RankTest, TiesByIdAscending) {
  EXPECT_EQ(order(rank({{SongId(7), 0.5, {}}, {SongId(2), 0.5, {}}}, 10)), (std::vector<SongId>{SongId(2), SongId(7)}));
}

TEST(RankTest, LimitTruncates) {
  EXPECT_EQ(order(rank({{SongId(0), 0.8, {}}, {SongId(1), 0.9, {}}}, 1)), (std::vector<SongId>{SongId(1)}));
}

}  // namespace
}  // namespace melodex
