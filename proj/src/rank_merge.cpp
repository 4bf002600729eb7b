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

#include "melodex/rank_merge.hpp"

#include <algorithm>
#include <cmath>

namespace melodex {

double MergeWeights::sum() const {
  double s = 0.0;
  for (const auto &[f, w] : weights) s += w;
  return s;
}

FieldResult normalize(const FieldResult &result) {
  if (result.field == FieldKind::kAudio || result.scores.empty()) return result;
  double lo = result.scores.begin()->second;
  double hi = lo;
  for (const auto &[song, s] : result.scores) {
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  FieldResult out{result.field, {}};
  const double span = hi - lo;
  for (const auto &[song, s] : result.scores) {
    out.scores[song] = span > 0.0 ? (s - lo) / span : 1.0;
  }
  return out;
}

double base_weight(FieldKind field) {
  switch (field) {
    case FieldKind::kTitle: return 3.0;
    case FieldKind::kArtist: return 2.0;
    case FieldKind::kAlbum: return 2.0;
    case FieldKind::kGenre: return 1.0;
    case FieldKind::kLyrics: return 2.0;
    case FieldKind::kAudio: return 4.0;
  }
  return 0.0;
}

MergeWeights resolve_weights(const std::set<FieldKind> &present,
                             const std::map<FieldKind, double> &overrides) {
  if (present.empty()) throw Error(ErrorCode::kInvalidArgument, "no fields to weight");
  MergeWeights out;
  double total = 0.0;
  for (FieldKind f : present) {
    auto it = overrides.find(f);
    const double w = it != overrides.end() ? it->second : base_weight(f);
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw Error(ErrorCode::kInvalidArgument, "weight for " + std::string(field_name(f)) + " must be >= 0");
    }
    out.weights[f] = w;
    total += w;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::kWeightSum, "weights of the queried fields sum to zero");
  for (auto &[f, w] : out.weights) w /= total;
  return out;
}

MergeWeights default_weights(const std::set<FieldKind> &present) { return resolve_weights(present, {}); }

std::vector<RankedResult> merge(std::span<const FieldResult> results, const MergeWeights &weights) {
  std::set<FieldKind> fields;
  for (const FieldResult &r : results) {
    if (!fields.insert(r.field).second) {
      throw Error(ErrorCode::kFieldMismatch, "duplicate field result: " + std::string(field_name(r.field)));
    }
  }
  std::set<FieldKind> weighted;
  for (const auto &[f, w] : weights.weights) weighted.insert(f);
  if (fields != weighted) throw Error(ErrorCode::kFieldMismatch, "weights do not cover exactly the result fields");
  if (std::fabs(weights.sum() - 1.0) > kWeightSumTolerance) {
    throw Error(ErrorCode::kWeightSum, "weights must sum to 1");
  }

  std::map<SongId, RankedResult> merged;
  for (const FieldResult &r : results) {
    for (const auto &[song, s] : r.scores) merged[song].song = song;
  }
  std::vector<RankedResult> out;
  out.reserve(merged.size());
  for (auto &[song, rr] : merged) {
    for (const FieldResult &r : results) {
      auto it = r.scores.find(song);
      rr.breakdown[r.field] = it == r.scores.end() ? 0.0 : it->second;
    }
    rr.final_score = recompute_final_score(rr, weights);
    out.push_back(std::move(rr));
  }
  return out;
}

double recompute_final_score(const RankedResult &result, const MergeWeights &weights) {
  double total = 0.0;
  for (const auto &[field, c] : weights.weights) {
    auto it = result.breakdown.find(field);
    total += c * (it == result.breakdown.end() ? 0.0 : it->second);
  }
  return total;
}

std::vector<RankedResult> apply_filters(std::vector<RankedResult> results, const Query &query,
                                        const std::function<Date(SongId)> &release_date) {
  if (!query.released_before && !query.released_after) return results;
  std::erase_if(results, [&](const RankedResult &r) {
    const Date d = release_date(r.song);
    if (query.released_before && d >= *query.released_before) return true;
    if (query.released_after && d <= *query.released_after) return true;
    return false;
  });
  return results;
}

std::vector<RankedResult> rank(std::vector<RankedResult> results, size_t limit) {
  std::sort(results.begin(), results.end(), [](const RankedResult &a, const RankedResult &b) {
    if (a.final_score != b.final_score) return a.final_score > b.final_score;
    return a.song < b.song;
  });
  if (results.size() > limit) results.resize(limit);
  return results;
}

}  // namespace melodex
