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

#ifndef MELODEX_FINGERPRINT_HPP_
#define MELODEX_FINGERPRINT_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "melodex/core.hpp"

namespace melodex {

// One 32-bit word per pair of consecutive analysis frames. Bit m describes
// how the energy difference between bands m and m+1 changed.
using SubFingerprint = uint32_t;

struct ExtractorConfig {
  uint32_t target_rate = 5512;
  uint32_t frame_length = 2048;
  uint32_t hop = 64;
  uint32_t band_count = 33;
  double min_freq = 300.0;
  double max_freq = 2000.0;
  // A bit is set only when the second-order energy difference exceeds this
  // fraction of the two frames' summed band energy. Absorbs rounding and
  // phase jitter so stationary input yields zero words.
  double relative_tolerance = 1e-6;

  bool operator==(const ExtractorConfig &) const = default;

  // band_count + 1 log-spaced edges from min_freq to max_freq.
  std::vector<double> band_edges() const;
  void validate() const;
  // Stable textual form; feeds the snapshot config digest.
  std::string canonical() const;
};

struct FingerprintSequence {
  std::optional<SongId> song;
  std::vector<SubFingerprint> subfps;
  // Audio had fewer than two frames after resampling.
  bool too_short = false;

  bool operator==(const FingerprintSequence &) const = default;
};

// Number of sub-fingerprints produced for `samples` samples at target rate.
size_t expected_subfp_count(size_t samples, const ExtractorConfig &config);

// Periodic Hann window of length n.
std::vector<double> hann_window(size_t n);

// Band energies of an already windowed frame: for each band, the sum of
// |X_k|^2 over FFT bins whose centre frequency k*rate/N falls in
// [edge_b, edge_{b+1}). Accumulated in ascending bin order with compensated
// summation.
std::vector<double> band_energies(std::span<const double> windowed_frame,
                                  const ExtractorConfig &config);

// bit m = 1 iff (cur[m] - cur[m+1]) - (prev[m] - prev[m+1]) > tol * scale,
// where scale is the summed energy of both frames. tol = 0 gives the plain
// strict sign rule.
SubFingerprint derive_bits(std::span<const double> current, std::span<const double> previous,
                           double relative_tolerance = 0.0);

// resample -> frame -> window -> band energies -> derive_bits over
// consecutive frame pairs. Deterministic.
FingerprintSequence extract(const PcmAudio &audio, const ExtractorConfig &config);

// Pluggable PCM -> fingerprint front end.
class FingerprintExtractor {
 public:
  virtual ~FingerprintExtractor() = default;
  virtual FingerprintSequence extract(const PcmAudio &audio) const = 0;
  // Identifies the algorithm and its parameters for snapshot digests.
  virtual std::string canonical() const = 0;
};

class SpectralDifferenceExtractor final : public FingerprintExtractor {
 public:
  explicit SpectralDifferenceExtractor(ExtractorConfig config = {});
  FingerprintSequence extract(const PcmAudio &audio) const override;
  std::string canonical() const override { return config_.canonical(); }
  const ExtractorConfig &config() const { return config_; }

 private:
  ExtractorConfig config_;
};

// Golden files: a "# config-digest <hex>" header line, then one word per
// line as 8 lowercase hex digits.
std::string format_golden(std::span<const SubFingerprint> words, const std::string &digest);
std::vector<SubFingerprint> parse_golden(const std::string &text, std::string *digest = nullptr);

}  // namespace melodex

#endif  // MELODEX_FINGERPRINT_HPP_
