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

#include "melodex/fingerprint.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include "melodex/audio.hpp"

namespace melodex {

namespace {

// FFTW planning is not thread-safe; execution with the new-array interface
// is. Plans are created once per frame length and kept for the process.
fftw_plan r2c_plan(uint32_t n) {
  static std::mutex mu;
  static std::map<uint32_t, fftw_plan> plans;
  std::lock_guard<std::mutex> lock(mu);
  auto it = plans.find(n);
  if (it != plans.end()) return it->second;
  double *in = fftw_alloc_real(n);
  fftw_complex *out = fftw_alloc_complex(n / 2 + 1);
  fftw_plan plan = fftw_plan_dft_r2c_1d(int(n), in, out, FFTW_ESTIMATE);
  fftw_free(in);
  fftw_free(out);
  if (plan == nullptr) throw Error(ErrorCode::kInternal, "fftw: cannot create plan");
  plans.emplace(n, plan);
  return plan;
}

struct FftwDeleter {
  void operator()(void *p) const { fftw_free(p); }
};

// Bin -> band lookup; -1 for bins outside every band.
std::vector<int> bin_bands(const ExtractorConfig &config) {
  const auto edges = config.band_edges();
  const size_t bins = config.frame_length / 2 + 1;
  std::vector<int> out(bins, -1);
  for (size_t k = 0; k < bins; ++k) {
    const double f = double(k) * config.target_rate / config.frame_length;
    for (uint32_t b = 0; b < config.band_count; ++b) {
      if (f >= edges[b] && f < edges[b + 1]) {
        out[k] = int(b);
        break;
      }
    }
  }
  return out;
}

// Neumaier summation.
struct CompensatedSum {
  double sum = 0.0;
  double c = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::fabs(sum) >= std::fabs(x)) {
      c += (sum - t) + x;
    } else {
      c += (x - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + c; }
};

class BandAnalyzer {
 public:
  explicit BandAnalyzer(const ExtractorConfig &config)
      : config_(config),
        plan_(r2c_plan(config.frame_length)),
        bands_(bin_bands(config)),
        in_(fftw_alloc_real(config.frame_length)),
        out_(fftw_alloc_complex(config.frame_length / 2 + 1)) {}

  std::vector<double> energies(std::span<const double> windowed) {
    std::copy(windowed.begin(), windowed.end(), in_.get());
    fftw_execute_dft_r2c(plan_, in_.get(), out_.get());
    std::vector<CompensatedSum> acc(config_.band_count);
    const size_t bins = config_.frame_length / 2 + 1;
    for (size_t k = 0; k < bins; ++k) {
      const int b = bands_[k];
      if (b < 0) continue;
      const double re = out_.get()[k][0];
      const double im = out_.get()[k][1];
      acc[size_t(b)].add(re * re + im * im);
    }
    std::vector<double> e(config_.band_count);
    for (size_t b = 0; b < e.size(); ++b) e[b] = acc[b].value();
    return e;
  }

 private:
  const ExtractorConfig &config_;
  fftw_plan plan_;
  std::vector<int> bands_;
  std::unique_ptr<double, FftwDeleter> in_;
  std::unique_ptr<fftw_complex, FftwDeleter> out_;
};

}  // namespace

std::vector<double> ExtractorConfig::band_edges() const {
  std::vector<double> edges(band_count + 1);
  const double ratio = max_freq / min_freq;
  for (uint32_t b = 0; b <= band_count; ++b) {
    edges[b] = min_freq * std::pow(ratio, double(b) / band_count);
  }
  edges[band_count] = max_freq;
  return edges;
}

void ExtractorConfig::validate() const {
  if (target_rate == 0) throw Error(ErrorCode::kInvalidArgument, "extractor: target_rate must be > 0");
  if (frame_length < 2 || (frame_length & 1)) {
    throw Error(ErrorCode::kInvalidArgument, "extractor: frame_length must be even and >= 2");
  }
  if (hop == 0 || hop >= frame_length) {
    throw Error(ErrorCode::kInvalidArgument, "extractor: hop must satisfy 0 < hop < frame_length");
  }
  if (band_count != 33) {
    throw Error(ErrorCode::kInvalidArgument, "extractor: 32-bit words need exactly 33 bands");
  }
  if (!(min_freq > 0.0) || !(max_freq > min_freq) || max_freq > target_rate / 2.0) {
    throw Error(ErrorCode::kInvalidArgument, "extractor: need 0 < min_freq < max_freq <= nyquist");
  }
  if (!(relative_tolerance >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "extractor: relative_tolerance must be >= 0");
  }
}

std::string ExtractorConfig::canonical() const {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "spectral-difference/v1 rate=%u frame=%u hop=%u bands=%u fmin=%.17g fmax=%.17g "
                "tol=%.17g window=hann-periodic",
                target_rate, frame_length, hop, band_count, min_freq, max_freq, relative_tolerance);
  return buf;
}

size_t expected_subfp_count(size_t samples, const ExtractorConfig &config) {
  if (samples < config.frame_length) return 0;
  const size_t frames = (samples - config.frame_length) / config.hop + 1;
  return frames - 1;
}

std::vector<double> hann_window(size_t n) {
  std::vector<double> w(n);
  for (size_t i = 0; i < n; ++i) {
    w[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * double(i) / double(n)));
  }
  return w;
}

std::vector<double> band_energies(std::span<const double> windowed_frame, const ExtractorConfig &config) {
  if (windowed_frame.size() != config.frame_length) {
    throw Error(ErrorCode::kInvalidArgument, "band_energies: frame length mismatch");
  }
  BandAnalyzer analyzer(config);
  return analyzer.energies(windowed_frame);
}

SubFingerprint derive_bits(std::span<const double> current, std::span<const double> previous,
                           double relative_tolerance) {
  if (current.size() != 33 || previous.size() != 33) {
    throw Error(ErrorCode::kInvalidArgument, "derive_bits: need 33 band energies per frame");
  }
  double threshold = 0.0;
  if (relative_tolerance > 0.0) {
    double scale = 0.0;
    for (size_t b = 0; b < 33; ++b) scale += current[b] + previous[b];
    threshold = relative_tolerance * scale;
  }
  SubFingerprint bits = 0;
  for (size_t m = 0; m < 32; ++m) {
    const double d = (current[m] - current[m + 1]) - (previous[m] - previous[m + 1]);
    if (d > threshold) bits |= SubFingerprint(1) << m;
  }
  return bits;
}

FingerprintSequence extract(const PcmAudio &audio, const ExtractorConfig &config) {
  config.validate();
  FingerprintSequence seq;
  const PcmAudio pcm = resample(audio, config.target_rate);
  const size_t count = expected_subfp_count(pcm.samples.size(), config);
  if (count == 0) {
    seq.too_short = true;
    return seq;
  }

  const auto window = hann_window(config.frame_length);
  BandAnalyzer analyzer(config);
  std::vector<double> frame(config.frame_length);
  auto frame_energies = [&](size_t index) {
    const float *src = pcm.samples.data() + index * config.hop;
    for (size_t i = 0; i < frame.size(); ++i) frame[i] = double(src[i]) * window[i];
    return analyzer.energies(frame);
  };

  seq.subfps.reserve(count);
  std::vector<double> previous = frame_energies(0);
  for (size_t f = 1; f <= count; ++f) {
    std::vector<double> current = frame_energies(f);
    seq.subfps.push_back(derive_bits(current, previous, config.relative_tolerance));
    previous = std::move(current);
  }
  return seq;
}

SpectralDifferenceExtractor::SpectralDifferenceExtractor(ExtractorConfig config) : config_(config) {
  config_.validate();
}

FingerprintSequence SpectralDifferenceExtractor::extract(const PcmAudio &audio) const {
  return melodex::extract(audio, config_);
}

std::string format_golden(std::span<const SubFingerprint> words, const std::string &digest) {
  std::string out = "# config-digest " + digest + "\n";
  char buf[16];
  for (SubFingerprint w : words) {
    std::snprintf(buf, sizeof(buf), "%08x\n", w);
    out += buf;
  }
  return out;
}

std::vector<SubFingerprint> parse_golden(const std::string &text, std::string *digest) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# config-digest ", 0) != 0) {
    throw Error(ErrorCode::kParse, "golden file: missing config-digest header");
  }
  if (digest) *digest = line.substr(16);
  std::vector<SubFingerprint> words;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.size() != 8) throw Error(ErrorCode::kParse, "golden file: bad word '" + line + "'");
    words.push_back(SubFingerprint(std::stoul(line, nullptr, 16)));
  }
  return words;
}

}  // namespace melodex
