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

#ifndef MELODEX_RANK_MERGE_HPP_
#define MELODEX_RANK_MERGE_HPP_

#include <functional>
#include <map>
#include <set>
#include <span>
#include <vector>

#include "melodex/core.hpp"

namespace melodex {

struct FieldResult {
  FieldKind field = FieldKind::kLyrics;
  std::map<SongId, double> scores;

  bool operator==(const FieldResult &) const = default;
};

struct MergeWeights {
  std::map<FieldKind, double> weights;

  double sum() const;
  bool operator==(const MergeWeights &) const = default;
};

struct RankedResult {
  SongId song;
  double final_score = 0.0;
  std::map<FieldKind, double> breakdown;

  bool operator==(const RankedResult &) const = default;
};

inline constexpr double kWeightSumTolerance = 1e-9;

// Min-max normalization to [0, 1]. Constant (including singleton) lists
// become all 1.0. Audio results are already similarities and pass through.
FieldResult normalize(const FieldResult &result);

// Base weight of a field before renormalization.
double base_weight(FieldKind field);

// Base weights restricted to `present` and renormalized to sum to 1.
MergeWeights default_weights(const std::set<FieldKind> &present);

// Like default_weights, but `overrides` replace the base weight of the fields
// they name. Overrides for absent fields are ignored. Throws kWeightSum when
// the present fields' weights add up to zero.
MergeWeights resolve_weights(const std::set<FieldKind> &present,
                             const std::map<FieldKind, double> &overrides);

// FinalScore(r) = sum_i c_i * r_i over the union of songs, with r_i = 0 where
// the song is missing from field i. Terms are summed in FieldKind order.
//
// Throws kFieldMismatch unless the weights name exactly the result fields and
// kWeightSum unless they sum to 1 within kWeightSumTolerance.
std::vector<RankedResult> merge(std::span<const FieldResult> results, const MergeWeights &weights);

// Recomputes the weighted sum from a breakdown exactly the way merge() does.
double recompute_final_score(const RankedResult &result, const MergeWeights &weights);

// Drops songs released on or after `released_before` and on or before
// `released_after` (both bounds exclusive).
std::vector<RankedResult> apply_filters(std::vector<RankedResult> results, const Query &query,
                                        const std::function<Date(SongId)> &release_date);

// Sorted by final_score descending, ties by song id ascending, truncated.
std::vector<RankedResult> rank(std::vector<RankedResult> results, size_t limit);

}  // namespace melodex

#endif  // MELODEX_RANK_MERGE_HPP_
