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

#include "derev/psd.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "derev/wpe.hpp"

namespace derev {

namespace {

constexpr char kLpsMagic[8] = {'D', 'E', 'R', 'E', 'V', 'L', 'P', 'S'};
constexpr std::uint32_t kLpsVersion = 1;

// Per-channel linear power planes (frames, bins, channels) for a leaf source.
Tensor3 leaf_power(const PsdSource& source, const Spectrogram& x) {
  switch (source.kind) {
    case PsdSource::Kind::Iterative:
      return per_channel_context_power(x, source.context);
    case PsdSource::Kind::ExternalFile: {
      const LpsData lps = load_lps(source.path);
      const int want_d = source.per_channel ? x.channels : 1;
      if (lps.log_power.d0 != x.frames || lps.log_power.d1 != x.bins ||
          lps.log_power.d2 != want_d)
        throw std::invalid_argument(
            "psd: external estimate shape does not match the observation");
      Tensor3 power = lps.log_power;
      for (double& v : power.data) {
        v = std::exp(v);
        if (!(v >= 0.0) || !std::isfinite(v))
          throw std::invalid_argument("psd: invalid power value in file");
      }
      return power;
    }
    default:
      throw std::invalid_argument("psd: combiner used as a leaf source");
  }
}

PsdEstimate combine_average(const Tensor3& power, double floor) {
  PsdEstimate lambda(power.d0, power.d1);
  const double inv_d = 1.0 / power.d2;
  for (int t = 0; t < power.d0; ++t)
    for (int f = 0; f < power.d1; ++f) {
      double acc = 0.0;
      for (int d = 0; d < power.d2; ++d) acc += power.at(t, f, d);
      lambda.at(t, f) = std::max(floor, acc * inv_d);
    }
  return lambda;
}

PsdEstimate combine_ref(const Tensor3& power, int channel, double floor) {
  if (channel < 0 || channel >= power.d2)
    throw std::invalid_argument("psd: reference channel out of range");
  PsdEstimate lambda(power.d0, power.d1);
  for (int t = 0; t < power.d0; ++t)
    for (int f = 0; f < power.d1; ++f)
      lambda.at(t, f) = std::max(floor, power.at(t, f, channel));
  return lambda;
}

void put_u32(std::ofstream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::ifstream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

PsdSource PsdSource::iterative(int context) {
  PsdSource s;
  s.kind = Kind::Iterative;
  s.context = context;
  return s;
}

PsdSource PsdSource::external_file(std::string path, bool per_channel) {
  PsdSource s;
  s.kind = Kind::ExternalFile;
  s.path = std::move(path);
  s.per_channel = per_channel;
  return s;
}

PsdSource PsdSource::channel_average(PsdSource inner) {
  PsdSource s;
  s.kind = Kind::ChannelAverage;
  s.inner = std::make_shared<const PsdSource>(std::move(inner));
  return s;
}

PsdSource PsdSource::ref_channel_of(PsdSource inner, int channel) {
  PsdSource s;
  s.kind = Kind::RefChannel;
  s.inner = std::make_shared<const PsdSource>(std::move(inner));
  s.ref_channel = channel;
  return s;
}

void PsdSource::validate(int num_channels) const {
  const bool combiner =
      kind == Kind::ChannelAverage || kind == Kind::RefChannel;
  if (combiner) {
    if (!inner) throw std::invalid_argument("psd: combiner without inner");
    if (inner->kind == Kind::ChannelAverage ||
        inner->kind == Kind::RefChannel)
      throw std::invalid_argument("psd: composition depth exceeds 2");
    if (kind == Kind::RefChannel &&
        (ref_channel < 0 || ref_channel >= num_channels))
      throw std::invalid_argument("psd: reference channel out of range");
    inner->validate(num_channels);
  } else {
    if (kind == Kind::Iterative && context < 0)
      throw std::invalid_argument("psd: negative context");
    if (kind == Kind::ExternalFile && path.empty())
      throw std::invalid_argument("psd: empty estimate path");
  }
}

PsdEstimate provide_psd(const PsdSource& source, const Spectrogram& x,
                        double floor) {
  source.validate(x.channels);
  switch (source.kind) {
    case PsdSource::Kind::ChannelAverage:
      return combine_average(leaf_power(*source.inner, x), floor);
    case PsdSource::Kind::RefChannel:
      return combine_ref(leaf_power(*source.inner, x), source.ref_channel,
                         floor);
    default:
      // A bare leaf behaves as its channel average.
      return combine_average(leaf_power(source, x), floor);
  }
}

void export_lps(const Spectrogram& spec, const std::string& path) {
  const Tensor3 lps = log_power_spectra(spec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("export_lps: cannot open " + path);
  out.write(kLpsMagic, 8);
  put_u32(out, kLpsVersion);
  put_u32(out, static_cast<std::uint32_t>(spec.frames));
  put_u32(out, static_cast<std::uint32_t>(spec.bins));
  put_u32(out, static_cast<std::uint32_t>(spec.channels));
  put_u32(out, static_cast<std::uint32_t>(spec.config.sample_rate));
  put_u32(out, 0);  // reserved; pads the header to 32 bytes
  for (double v : lps.data) {
    const float fv = static_cast<float>(v);
    std::uint32_t bits;
    std::memcpy(&bits, &fv, 4);
    unsigned char b[4] = {static_cast<unsigned char>(bits & 0xff),
                          static_cast<unsigned char>((bits >> 8) & 0xff),
                          static_cast<unsigned char>((bits >> 16) & 0xff),
                          static_cast<unsigned char>((bits >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
  }
  if (!out) throw std::runtime_error("export_lps: write failed for " + path);
}

LpsData load_lps(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_lps: cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kLpsMagic, 8) != 0)
    throw std::runtime_error("load_lps: bad magic in " + path);
  const std::uint32_t version = get_u32(in);
  if (version != kLpsVersion)
    throw std::runtime_error("load_lps: unsupported version");
  const std::uint32_t frames = get_u32(in);
  const std::uint32_t bins = get_u32(in);
  const std::uint32_t channels = get_u32(in);
  const std::uint32_t sample_rate = get_u32(in);
  get_u32(in);  // reserved
  if (!in || frames == 0 || bins == 0 || channels == 0)
    throw std::runtime_error("load_lps: corrupt header");

  LpsData data;
  data.sample_rate = static_cast<int>(sample_rate);
  data.log_power = Tensor3(static_cast<int>(frames), static_cast<int>(bins),
                           static_cast<int>(channels));
  for (double& v : data.log_power.data) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw std::runtime_error("load_lps: truncated file");
    std::uint32_t bits = static_cast<std::uint32_t>(b[0]) |
                         (static_cast<std::uint32_t>(b[1]) << 8) |
                         (static_cast<std::uint32_t>(b[2]) << 16) |
                         (static_cast<std::uint32_t>(b[3]) << 24);
    float fv;
    std::memcpy(&fv, &bits, 4);
    v = static_cast<double>(fv);
  }
  return data;
}

}  // namespace derev
