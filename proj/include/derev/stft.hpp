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

#include <vector>

#include "derev/types.hpp"

namespace derev {

/// STFT framing parameters. Defaults give a 64 ms Hann window with a 16 ms
/// hop at 16 kHz.
struct StftConfig {
  int window_len = 1024;
  int hop = 256;
  int fft_size = 1024;
  int sample_rate = 16000;

  void validate() const;

  bool operator==(const StftConfig&) const = default;
};

/// Complex STFT tensor, shape (frames, bins, channels) with channels packed
/// contiguously per time-frequency cell. bins == fft_size / 2 + 1.
struct Spectrogram {
  std::vector<Complex> data;
  int frames = 0, bins = 0, channels = 0;
  StftConfig config;

  Spectrogram() = default;
  Spectrogram(int t, int f, int d, const StftConfig& cfg)
      : data(static_cast<std::size_t>(t) * f * d, Complex(0.0, 0.0)),
        frames(t), bins(f), channels(d), config(cfg) {}

  Complex& at(int t, int f, int d) {
    return data[(static_cast<std::size_t>(t) * bins + f) * channels + d];
  }
  Complex at(int t, int f, int d) const {
    return data[(static_cast<std::size_t>(t) * bins + f) * channels + d];
  }
  /// Pointer to the `channels` contiguous values of cell (t, f).
  const Complex* cell(int t, int f) const {
    return data.data() + (static_cast<std::size_t>(t) * bins + f) * channels;
  }
  Complex* cell(int t, int f) {
    return data.data() + (static_cast<std::size_t>(t) * bins + f) * channels;
  }

  /// Copy of a single channel as a 1-channel spectrogram.
  Spectrogram extract_channel(int d) const;
};

/// Analysis transform. The input is zero-padded by window_len - hop samples
/// at both ends, so frames = floor((padded - window_len) / hop) + 1 and every
/// input sample sits under full window overlap. Throws if the input is
/// shorter than one window or contains non-finite samples.
Spectrogram stft(const Waveform& wave, const StftConfig& cfg);

/// Weighted overlap-add synthesis with per-sample window-power normalization,
/// the exact inverse of stft() on the unpadded region. num_samples selects
/// the output length (counted from the start of the unpadded region, at most
/// frames * hop); -1 reconstructs (frames + 1) * hop - window_len samples,
/// the shortest input length consistent with this frame count. Callers that
/// know the original length should pass it.
Waveform istft(const Spectrogram& spec, int num_samples = -1);

/// Same, but cross-checks `cfg` against the config embedded in `spec`.
Waveform istft(const Spectrogram& spec, const StftConfig& cfg,
               int num_samples = -1);

/// Elementwise ln(|X|^2 + floor_eps), shape (frames, bins, channels). The
/// floor keeps digital silence finite: ln(1e-10) ~= -23.03.
Tensor3 log_power_spectra(const Spectrogram& spec, double floor_eps = 1e-10);

/// Periodic Hann window of length n.
std::vector<double> hann_window(int n);

}  // namespace derev
