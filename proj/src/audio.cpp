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

#include "melodex/audio.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace melodex {

namespace {

constexpr uint16_t kFormatPcm = 0x0001;
constexpr uint16_t kFormatFloat = 0x0003;
constexpr uint16_t kFormatExtensible = 0xFFFE;

uint16_t le16(const uint8_t *p) { return uint16_t(p[0] | (p[1] << 8)); }
uint32_t le32(const uint8_t *p) {
  return uint32_t(p[0]) | (uint32_t(p[1]) << 8) | (uint32_t(p[2]) << 16) |
         (uint32_t(p[3]) << 24);
}

struct Format {
  uint16_t tag = 0;
  uint16_t channels = 0;
  uint32_t sample_rate = 0;
  uint16_t block_align = 0;
  uint16_t bits = 0;
};

Format parse_fmt(const uint8_t *p, uint32_t size) {
  if (size < 16) throw Error(ErrorCode::kCorruptData, "wav: fmt chunk too small");
  Format f;
  f.tag = le16(p);
  f.channels = le16(p + 2);
  f.sample_rate = le32(p + 4);
  f.block_align = le16(p + 12);
  f.bits = le16(p + 14);
  if (f.tag == kFormatExtensible) {
    if (size < 40) throw Error(ErrorCode::kCorruptData, "wav: extensible fmt chunk too small");
    // The first two bytes of the sub-format GUID carry the real format tag.
    f.tag = le16(p + 24);
  }
  return f;
}

float decode_sample(const uint8_t *p, const Format &f) {
  if (f.tag == kFormatFloat) {
    float v;
    std::memcpy(&v, p, 4);
    if constexpr (std::endian::native == std::endian::big) {
      v = std::bit_cast<float>(le32(p));
    }
    if (std::isnan(v)) return 0.0f;
    return std::clamp(v, -1.0f, 1.0f);
  }
  switch (f.bits) {
    case 8: return (float(p[0]) - 128.0f) / 128.0f;
    case 16: return float(int16_t(le16(p))) / 32768.0f;
    case 24: {
      int32_t v = int32_t(uint32_t(p[0]) << 8 | uint32_t(p[1]) << 16 | uint32_t(p[2]) << 24) >> 8;
      return float(double(v) / 8388608.0);
    }
    case 32: return float(double(int32_t(le32(p))) / 2147483648.0);
  }
  return 0.0f;
}

}  // namespace

PcmAudio decode_wav(std::span<const uint8_t> bytes) {
  if (bytes.size() < 12) throw Error(ErrorCode::kCorruptData, "wav: missing RIFF header");
  if (std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw Error(ErrorCode::kUnsupportedFormat, "wav: not a RIFF/WAVE container");
  }

  std::optional<Format> fmt;
  const uint8_t *data = nullptr;
  size_t data_size = 0;
  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const uint8_t *hdr = bytes.data() + pos;
    const uint32_t size = le32(hdr + 4);
    const size_t body = pos + 8;
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (body + size > bytes.size()) throw Error(ErrorCode::kCorruptData, "wav: truncated fmt chunk");
      fmt = parse_fmt(bytes.data() + body, size);
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      if (body + size > bytes.size()) throw Error(ErrorCode::kCorruptData, "wav: truncated data chunk");
      data = bytes.data() + body;
      data_size = size;
      break;
    }
    pos = body + size + (size & 1);
  }
  if (!fmt) throw Error(ErrorCode::kCorruptData, "wav: missing fmt chunk");
  if (!data) throw Error(ErrorCode::kCorruptData, "wav: missing data chunk");

  const Format &f = *fmt;
  const bool int_ok = f.tag == kFormatPcm && (f.bits == 8 || f.bits == 16 || f.bits == 24 || f.bits == 32);
  const bool float_ok = f.tag == kFormatFloat && f.bits == 32;
  if (!int_ok && !float_ok) {
    throw Error(ErrorCode::kUnsupportedFormat,
                "wav: unsupported encoding (format tag " + std::to_string(f.tag) + ", " +
                    std::to_string(f.bits) + " bits)");
  }
  if (f.channels != 1 && f.channels != 2) {
    throw Error(ErrorCode::kUnsupportedFormat,
                "wav: unsupported channel count " + std::to_string(f.channels));
  }
  if (f.sample_rate == 0) throw Error(ErrorCode::kCorruptData, "wav: zero sample rate");

  const size_t sample_bytes = f.bits / 8;
  const size_t frame_bytes = sample_bytes * f.channels;
  if (data_size % frame_bytes != 0) throw Error(ErrorCode::kCorruptData, "wav: partial sample frame");

  PcmAudio out;
  out.sample_rate = f.sample_rate;
  const size_t frames = data_size / frame_bytes;
  out.samples.resize(frames);
  for (size_t i = 0; i < frames; ++i) {
    const uint8_t *p = data + i * frame_bytes;
    if (f.channels == 1) {
      out.samples[i] = decode_sample(p, f);
    } else {
      const double l = decode_sample(p, f);
      const double r = decode_sample(p + sample_bytes, f);
      out.samples[i] = float((l + r) * 0.5);
    }
  }
  return out;
}

PcmAudio read_wav_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open audio file: " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_wav(bytes);
  } catch (const Error &e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

std::vector<uint8_t> encode_wav16(const PcmAudio &audio) {
  const uint32_t data_size = uint32_t(audio.samples.size() * 2);
  std::vector<uint8_t> out;
  out.reserve(44 + data_size);
  auto put = [&out](const char *tag) { out.insert(out.end(), tag, tag + 4); };
  auto put16 = [&out](uint16_t v) {
    out.push_back(uint8_t(v));
    out.push_back(uint8_t(v >> 8));
  };
  auto put32 = [&out](uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(uint8_t(v >> (8 * i)));
  };
  put("RIFF");
  put32(36 + data_size);
  put("WAVE");
  put("fmt ");
  put32(16);
  put16(kFormatPcm);
  put16(1);
  put32(audio.sample_rate);
  put32(audio.sample_rate * 2);
  put16(2);
  put16(16);
  put("data");
  put32(data_size);
  for (float s : audio.samples) {
    const double v = std::clamp(double(s), -1.0, 1.0) * 32768.0;
    const long q = std::clamp(std::lround(v), -32768L, 32767L);
    put16(uint16_t(int16_t(q)));
  }
  return out;
}

void write_wav_file(const std::string &path, const PcmAudio &audio) {
  const auto bytes = encode_wav16(audio);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write audio file: " + path);
  out.write(reinterpret_cast<const char *>(bytes.data()), std::streamsize(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "short write: " + path);
}

PcmAudio resample(const PcmAudio &audio, uint32_t target_rate) {
  if (audio.sample_rate == 0 || target_rate == 0) {
    throw Error(ErrorCode::kInvalidArgument, "resample: sample rates must be positive");
  }
  if (audio.sample_rate == target_rate) return audio;

  PcmAudio out;
  out.sample_rate = target_rate;
  const size_t n_in = audio.samples.size();
  const size_t n_out = size_t((uint64_t(n_in) * target_rate) / audio.sample_rate);
  out.samples.resize(n_out);
  for (size_t j = 0; j < n_out; ++j) {
    // Integer numerator keeps the grid exact for long inputs.
    const uint64_t num = uint64_t(j) * audio.sample_rate;
    const size_t i0 = size_t(num / target_rate);
    const double frac = double(num % target_rate) / double(target_rate);
    const float a = audio.samples[i0];
    if (i0 + 1 >= n_in || frac == 0.0) {
      out.samples[j] = a;
    } else {
      const float b = audio.samples[i0 + 1];
      out.samples[j] = float(a + frac * (double(b) - a));
    }
  }
  return out;
}

}  // namespace melodex
