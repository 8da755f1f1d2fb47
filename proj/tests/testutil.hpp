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

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "derev/rng.hpp"
#include "derev/stft.hpp"
#include "derev/types.hpp"

namespace derev::testutil {

inline Waveform white_noise(double seconds, int fs, std::uint64_t seed,
                            double amplitude = 0.3, int channels = 1) {
  Rng rng(seed);
  Waveform w(channels, static_cast<std::size_t>(seconds * fs), fs);
  for (auto& ch : w.channels)
    for (double& v : ch) v = amplitude * rng.uniform(-1.0, 1.0);
  return w;
}

/// Speech-shaped synthetic signal: voiced syllables (glottal pulse train
/// through drifting formant resonators) alternating with fricative-like noise
/// bursts and short pauses. Nonstationary enough for linear-prediction
/// dereverberation and LPC-based metrics to behave as on real speech.
inline Waveform synth_speech(double seconds, int fs, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t n = static_cast<std::size_t>(seconds * fs);
  Waveform w(1, n, fs);
  auto& x = w.channels[0];

  std::size_t pos = 0;
  while (pos < n) {
    const double kind = rng.uniform();
    const std::size_t seg_len = static_cast<std::size_t>(
        rng.uniform(0.12, 0.30) * fs);
    const std::size_t end = std::min(n, pos + seg_len);

    if (kind < 0.15) {  // pause
      pos = end;
      continue;
    }

    if (kind < 0.75) {  // voiced segment
      const double f0 = rng.uniform(90.0, 220.0);
      const double f0_drift = rng.uniform(-30.0, 30.0);
      // Two formant resonators with random vowel-ish frequencies.
      const double formants[2] = {rng.uniform(300.0, 900.0),
                                  rng.uniform(1000.0, 2400.0)};
      const double bws[2] = {80.0, 120.0};
      double s1[2] = {0.0, 0.0}, s2[2] = {0.0, 0.0};
      double b_coef[2][3];
      for (int r = 0; r < 2; ++r) {
        const double rr = std::exp(-M_PI * bws[r] / fs);
        const double th = 2.0 * M_PI * formants[r] / fs;
        b_coef[r][0] = 1.0;
        b_coef[r][1] = -2.0 * rr * std::cos(th);
        b_coef[r][2] = rr * rr;
      }
      double phase = 0.0;
      for (std::size_t i = pos; i < end; ++i) {
        const double frac = static_cast<double>(i - pos) / (end - pos);
        phase += (f0 + f0_drift * frac) / fs;
        double excitation = 0.0;
        if (phase >= 1.0) {  // glottal pulse
          phase -= 1.0;
          excitation = 1.0;
        }
        excitation += 0.02 * rng.normal();  // aspiration noise
        double v = excitation;
        for (int r = 0; r < 2; ++r) {
          const double y = v - b_coef[r][1] * s1[r] - b_coef[r][2] * s2[r];
          s2[r] = s1[r];
          s1[r] = y;
          v = y;
        }
        const double env = std::sin(M_PI * frac);  // syllable envelope
        x[i] = 0.08 * env * v;
      }
    } else {  // unvoiced fricative burst: high-passed noise
      double prev = 0.0;
      for (std::size_t i = pos; i < end; ++i) {
        const double frac = static_cast<double>(i - pos) / (end - pos);
        const double nz = rng.normal();
        const double hp = nz - 0.95 * prev;
        prev = nz;
        x[i] = 0.04 * std::sin(M_PI * frac) * hp;
      }
    }
    pos = end;
  }

  // Normalize the peak to a speech-like headroom.
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::fabs(v));
  if (peak > 0.0)
    for (double& v : x) v *= 0.7 / peak;
  return w;
}

inline double rms(const std::vector<double>& x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc / std::max<std::size_t>(1, x.size()));
}

inline double rms_diff(const Waveform& a, const Waveform& b) {
  double acc = 0.0;
  std::size_t count = 0;
  for (int d = 0; d < a.num_channels(); ++d)
    for (std::size_t i = 0; i < a.num_samples(); ++i) {
      const double diff = a.channels[d][i] - b.channels[d][i];
      acc += diff * diff;
      ++count;
    }
  return std::sqrt(acc / std::max<std::size_t>(1, count));
}

inline double rel_rms_error(const std::vector<double>& got,
                            const std::vector<double>& want) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < want.size(); ++i) {
    const double d = got[i] - want[i];
    num += d * d;
    den += want[i] * want[i];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

inline Spectrogram random_spectrogram(int frames, int bins, int channels,
                                      std::uint64_t seed,
                                      const StftConfig& cfg = {}) {
  Rng rng(seed);
  Spectrogram s(frames, bins, channels, cfg);
  for (auto& v : s.data) v = Complex(rng.normal(), rng.normal());
  return s;
}

/// Max |a - b| / max(1, |b|) over all elements of two complex sequences.
inline double max_rel_diff(const std::vector<Complex>& a,
                           const std::vector<Complex>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double denom = std::max(1.0, std::abs(b[i]));
    worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
  }
  return worst;
}

}  // namespace derev::testutil
