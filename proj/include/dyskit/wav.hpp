// Copyright 2026 The Dyskit Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DYSKIT_WAV_HPP_
#define DYSKIT_WAV_HPP_

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "dyskit/common.hpp"

namespace dyskit::signal {

// Mono audio normalized to [-1, 1].
struct AudioBuffer {
  std::vector<double> samples;
  int sample_rate = 0;
  // Set when a multichannel file was downmixed by channel average.
  bool downmixed = false;

  double duration() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

namespace detail {

inline uint32_t read_u32le(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) |
         (static_cast<uint32_t>(p[3]) << 24);
}

inline uint16_t read_u16le(const unsigned char* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace detail

// Reads a PCM WAV file (8/16/24-bit, any rate). Multichannel input is
// downmixed by averaging and flagged. Compressed codecs are rejected.
inline AudioBuffer read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open wav file: " + path);
  std::vector<unsigned char> raw((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  if (raw.size() < 44 || std::memcmp(raw.data(), "RIFF", 4) != 0 ||
      std::memcmp(raw.data() + 8, "WAVE", 4) != 0) {
    throw FormatError("not a RIFF/WAVE file: " + path);
  }

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  const unsigned char* data = nullptr;
  uint32_t data_size = 0;
  size_t pos = 12;
  while (pos + 8 <= raw.size()) {
    const char* id = reinterpret_cast<const char*>(raw.data() + pos);
    uint32_t size = detail::read_u32le(raw.data() + pos + 4);
    if (pos + 8 + size > raw.size()) size = static_cast<uint32_t>(raw.size() - pos - 8);
    if (std::memcmp(id, "fmt ", 4) == 0 && size >= 16) {
      const unsigned char* f = raw.data() + pos + 8;
      format = detail::read_u16le(f);
      channels = detail::read_u16le(f + 2);
      rate = detail::read_u32le(f + 4);
      bits = detail::read_u16le(f + 14);
      if (format == 0xFFFE && size >= 40) {
        // WAVE_FORMAT_EXTENSIBLE: the subformat GUID starts with the real tag.
        format = detail::read_u16le(f + 24);
      }
    } else if (std::memcmp(id, "data", 4) == 0) {
      data = raw.data() + pos + 8;
      data_size = size;
    }
    pos += 8 + size + (size & 1);  // chunks are word-aligned
  }

  if (format == 0 || rate == 0) throw FormatError("missing fmt chunk: " + path);
  if (format != 1) {
    throw FormatError("unsupported codec (format tag " + std::to_string(format) +
                      "), PCM required: " + path);
  }
  if (bits != 8 && bits != 16 && bits != 24) {
    throw FormatError("unsupported PCM sample width " + std::to_string(bits) +
                      " bits: " + path);
  }
  if (channels == 0) throw FormatError("zero channels: " + path);
  if (data == nullptr || data_size == 0) throw FormatError("empty data chunk: " + path);

  const uint32_t bytes_per_sample = bits / 8;
  const uint32_t frame_bytes = bytes_per_sample * channels;
  const uint32_t frames = data_size / frame_bytes;
  if (frames == 0) throw FormatError("zero-length audio: " + path);

  AudioBuffer buf;
  buf.sample_rate = static_cast<int>(rate);
  buf.downmixed = channels > 1;
  buf.samples.resize(frames);
  for (uint32_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (uint32_t c = 0; c < channels; ++c) {
      const unsigned char* s = data + i * frame_bytes + c * bytes_per_sample;
      double v = 0.0;
      if (bits == 8) {
        v = (static_cast<int>(s[0]) - 128) / 128.0;
      } else if (bits == 16) {
        int16_t x = static_cast<int16_t>(s[0] | (s[1] << 8));
        v = x / 32768.0;
      } else {
        int32_t x = s[0] | (s[1] << 8) | (s[2] << 16);
        if (x & 0x800000) x |= ~0xFFFFFF;
        v = x / 8388608.0;
      }
      acc += v;
    }
    buf.samples[i] = acc / channels;
  }
  return buf;
}

// Writes mono 16-bit PCM. Only the synthetic-corpus generator writes audio.
inline void write_wav(const std::string& path, const std::vector<double>& samples,
                      int sample_rate) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write wav file: " + path);
  auto put_u32 = [&](uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xFF),
                          static_cast<unsigned char>((v >> 8) & 0xFF),
                          static_cast<unsigned char>((v >> 16) & 0xFF),
                          static_cast<unsigned char>((v >> 24) & 0xFF)};
    out.write(reinterpret_cast<char*>(b), 4);
  };
  auto put_u16 = [&](uint16_t v) {
    unsigned char b[2] = {static_cast<unsigned char>(v & 0xFF),
                          static_cast<unsigned char>((v >> 8) & 0xFF)};
    out.write(reinterpret_cast<char*>(b), 2);
  };
  const uint32_t data_bytes = static_cast<uint32_t>(samples.size() * 2);
  out.write("RIFF", 4);
  put_u32(36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  put_u32(16);
  put_u16(1);  // PCM
  put_u16(1);  // mono
  put_u32(static_cast<uint32_t>(sample_rate));
  put_u32(static_cast<uint32_t>(sample_rate) * 2);
  put_u16(2);
  put_u16(16);
  out.write("data", 4);
  put_u32(data_bytes);
  for (double x : samples) {
    double c = std::clamp(x, -1.0, 1.0);
    int v = static_cast<int>(std::lrint(c * 32767.0));
    put_u16(static_cast<uint16_t>(static_cast<int16_t>(v)));
  }
}

}  // namespace dyskit::signal

#endif  // DYSKIT_WAV_HPP_
