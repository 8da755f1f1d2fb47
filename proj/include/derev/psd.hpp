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

#pragma once

#include <memory>
#include <string>

#include "derev/stft.hpp"
#include "derev/types.hpp"

namespace derev {

/// Pluggable lambda source for single-pass (neural-style) WPE. Leaf variants
/// produce per-channel power estimates; the two combiner variants reduce them
/// to a single (frames, bins) plane, either by averaging all channels or by
/// selecting a reference channel. Composition depth is at most 2: a combiner
/// may wrap only a leaf.
struct PsdSource {
  enum class Kind { Iterative, ExternalFile, ChannelAverage, RefChannel };

  Kind kind = Kind::Iterative;
  int context = 1;              // Iterative: +-frames of temporal context
  std::string path;             // ExternalFile: LPS interchange file
  bool per_channel = false;     // ExternalFile: expect one plane per channel
  std::shared_ptr<const PsdSource> inner;  // combiners only
  int ref_channel = 0;          // RefChannel: 0-based channel index

  static PsdSource iterative(int context = 1);
  static PsdSource external_file(std::string path, bool per_channel = false);
  static PsdSource channel_average(PsdSource inner);
  static PsdSource ref_channel_of(PsdSource inner, int channel);

  void validate(int num_channels) const;
};

/// Produces lambda from `source` for the observation `x`. A bare leaf is
/// combined with the channel average (the default multichannel rule); wrap it
/// in ref_channel_of to keep only one channel's power. Output is floored and
/// finite.
PsdEstimate provide_psd(const PsdSource& source, const Spectrogram& x,
                        double floor = 1e-10);

/// Writes log_power_spectra(spec) in the LPS interchange format: a 32-byte
/// little-endian header {magic "DEREVLPS", u32 version, frames, bins,
/// channels, sample_rate} followed by frames*bins*channels float32 values in
/// (frame, bin, channel) order.
void export_lps(const Spectrogram& spec, const std::string& path);

struct LpsData {
  Tensor3 log_power;  // (frames, bins, channels)
  int sample_rate = 0;
};

LpsData load_lps(const std::string& path);

}  // namespace derev
