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

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace derev {

using Complex = std::complex<double>;

/// Multi-channel time-domain sample buffer. Channels are planar and must all
/// have the same length. Samples are nominally in [-1, 1] but the type does
/// not enforce it.
struct Waveform {
  std::vector<std::vector<double>> channels;
  int sample_rate = 0;

  Waveform() = default;
  Waveform(int num_channels, std::size_t num_samples, int fs)
      : channels(num_channels, std::vector<double>(num_samples, 0.0)),
        sample_rate(fs) {}

  int num_channels() const { return static_cast<int>(channels.size()); }
  std::size_t num_samples() const {
    return channels.empty() ? 0 : channels.front().size();
  }
  double duration_s() const {
    return sample_rate > 0
               ? static_cast<double>(num_samples()) / sample_rate
               : 0.0;
  }

  void check_consistent() const {
    if (channels.empty()) throw std::invalid_argument("waveform: no channels");
    for (const auto& ch : channels) {
      if (ch.size() != channels.front().size())
        throw std::invalid_argument("waveform: ragged channel lengths");
    }
  }
};

/// Dense real tensor with three dimensions, row-major (i, j, k).
struct Tensor3 {
  std::vector<double> data;
  int d0 = 0, d1 = 0, d2 = 0;

  Tensor3() = default;
  Tensor3(int n0, int n1, int n2)
      : data(static_cast<std::size_t>(n0) * n1 * n2, 0.0),
        d0(n0), d1(n1), d2(n2) {}

  double& at(int i, int j, int k) {
    return data[(static_cast<std::size_t>(i) * d1 + j) * d2 + k];
  }
  double at(int i, int j, int k) const {
    return data[(static_cast<std::size_t>(i) * d1 + j) * d2 + k];
  }
};

/// Non-negative per-bin power estimate lambda_{t,f}, shape (frames, bins).
struct PsdEstimate {
  std::vector<double> data;
  int frames = 0, bins = 0;

  PsdEstimate() = default;
  PsdEstimate(int t, int f)
      : data(static_cast<std::size_t>(t) * f, 0.0), frames(t), bins(f) {}

  double& at(int t, int f) {
    return data[static_cast<std::size_t>(t) * bins + f];
  }
  double at(int t, int f) const {
    return data[static_cast<std::size_t>(t) * bins + f];
  }
};

}  // namespace derev
