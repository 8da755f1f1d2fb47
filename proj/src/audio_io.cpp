// Copyright 2026 The derev Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "derev/audio_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace derev {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;

void put_bytes(std::ofstream& out, std::uint32_t v, int n) {
  for (int i = 0; i < n; ++i) {
    const char b = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(&b, 1);
  }
}

std::uint32_t get_bytes(const unsigned char* p, int n) {
  std::uint32_t v = 0;
  for (int i = 0; i < n; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

}  // namespace

Waveform read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_wav: cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 44 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw std::runtime_error("read_wav: not a RIFF/WAVE file: " + path);

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t sample_rate = 0;
  std::size_t data_pos = 0, data_len = 0;
  bool have_fmt = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
    const std::uint32_t size = get_bytes(bytes.data() + pos + 4, 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size())
      throw std::runtime_error("read_wav: truncated chunk in " + path);
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (size < 16) throw std::runtime_error("read_wav: short fmt chunk");
      format = static_cast<std::uint16_t>(get_bytes(bytes.data() + body, 2));
      channels =
          static_cast<std::uint16_t>(get_bytes(bytes.data() + body + 2, 2));
      sample_rate = get_bytes(bytes.data() + body + 4, 4);
      bits =
          static_cast<std::uint16_t>(get_bytes(bytes.data() + body + 14, 2));
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      data_pos = body;
      data_len = size;
    }
    pos = body + size + (size % 2);  // chunks are word-aligned
  }
  if (!have_fmt || data_pos == 0)
    throw std::runtime_error("read_wav: missing fmt or data chunk in " + path);
  if (channels < 1 || channels > 8)
    throw std::runtime_error("read_wav: unsupported channel count");
  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool float32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !float32)
    throw std::runtime_error(
        "read_wav: unsupported encoding (need 16-bit PCM or 32-bit float)");

  const std::size_t bytes_per_sample = bits / 8;
  const std::size_t frame_size = bytes_per_sample * channels;
  const std::size_t n = data_len / frame_size;

  Waveform wave(channels, n, static_cast<int>(sample_rate));
  const unsigned char* p = bytes.data() + data_pos;
  for (std::size_t i = 0; i < n; ++i) {
    for (int d = 0; d < channels; ++d) {
      const unsigned char* sp = p + i * frame_size + d * bytes_per_sample;
      if (pcm16) {
        const std::int16_t v =
            static_cast<std::int16_t>(get_bytes(sp, 2));
        wave.channels[d][i] = static_cast<double>(v) / 32768.0;
      } else {
        const std::uint32_t u = get_bytes(sp, 4);
        float fv;
        std::memcpy(&fv, &u, 4);
        wave.channels[d][i] = static_cast<double>(fv);
      }
    }
  }
  return wave;
}

WavWriteResult write_wav(const Waveform& wave, const std::string& path,
                         WavEncoding encoding) {
  wave.check_consistent();
  if (wave.sample_rate <= 0)
    throw std::invalid_argument("write_wav: bad sample rate");
  for (const auto& ch : wave.channels)
    for (double v : ch)
      if (!std::isfinite(v))
        throw std::invalid_argument("write_wav: non-finite sample");

  const int channels = wave.num_channels();
  const std::size_t n = wave.num_samples();
  const bool pcm16 = encoding == WavEncoding::Pcm16;
  const std::uint32_t bytes_per_sample = pcm16 ? 2 : 4;
  const std::uint32_t block_align = bytes_per_sample * channels;
  const std::uint32_t data_size =
      static_cast<std::uint32_t>(n * block_align);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("write_wav: cannot open " + path);
  out.write("RIFF", 4);
  put_bytes(out, 36 + data_size, 4);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  put_bytes(out, 16, 4);
  put_bytes(out, pcm16 ? kFormatPcm : kFormatFloat, 2);
  put_bytes(out, static_cast<std::uint32_t>(channels), 2);
  put_bytes(out, static_cast<std::uint32_t>(wave.sample_rate), 4);
  put_bytes(out, static_cast<std::uint32_t>(wave.sample_rate) * block_align,
            4);
  put_bytes(out, block_align, 2);
  put_bytes(out, bytes_per_sample * 8, 2);
  out.write("data", 4);
  put_bytes(out, data_size, 4);

  WavWriteResult result;
  for (std::size_t i = 0; i < n; ++i) {
    for (int d = 0; d < channels; ++d) {
      double v = wave.channels[d][i];
      if (v > 1.0 || v < -1.0) {
        v = std::clamp(v, -1.0, 1.0);
        ++result.clipped_samples;
      }
      if (pcm16) {
        const long q = std::lround(v * 32768.0);
        const std::int16_t s =
            static_cast<std::int16_t>(std::clamp<long>(q, -32768, 32767));
        put_bytes(out, static_cast<std::uint16_t>(s), 2);
      } else {
        const float fv = static_cast<float>(v);
        std::uint32_t bits;
        std::memcpy(&bits, &fv, 4);
        put_bytes(out, bits, 4);
      }
    }
  }
  if (!out) throw std::runtime_error("write_wav: write failed for " + path);
  return result;
}

}  // namespace derev
