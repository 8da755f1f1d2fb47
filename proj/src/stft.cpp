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

#include "derev/stft.hpp"

#include <cmath>
#include <stdexcept>

#include "derev/fft.hpp"

namespace derev {

void StftConfig::validate() const {
  if (window_len <= 0 || hop <= 0 || fft_size <= 0 || sample_rate <= 0)
    throw std::invalid_argument("stft config: non-positive parameter");
  if (window_len % hop != 0)
    throw std::invalid_argument("stft config: hop must divide window_len");
  if (fft_size < window_len)
    throw std::invalid_argument("stft config: fft_size < window_len");
}

std::vector<double> hann_window(int n) {
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / n);
  return w;
}

Spectrogram Spectrogram::extract_channel(int d) const {
  if (d < 0 || d >= channels)
    throw std::invalid_argument("extract_channel: bad channel index");
  Spectrogram out(frames, bins, 1, config);
  for (int t = 0; t < frames; ++t)
    for (int f = 0; f < bins; ++f) out.at(t, f, 0) = at(t, f, d);
  return out;
}

Spectrogram stft(const Waveform& wave, const StftConfig& cfg) {
  cfg.validate();
  wave.check_consistent();
  if (wave.sample_rate != cfg.sample_rate)
    throw std::invalid_argument("stft: sample rate mismatch with config");
  const std::size_t n = wave.num_samples();
  if (n < static_cast<std::size_t>(cfg.window_len))
    throw std::invalid_argument("stft: input shorter than one window");
  for (const auto& ch : wave.channels)
    for (double v : ch)
      if (!std::isfinite(v))
        throw std::invalid_argument("stft: non-finite sample");

  const int pad = cfg.window_len - cfg.hop;
  const std::size_t padded = n + 2 * static_cast<std::size_t>(pad);
  const int frames =
      static_cast<int>((padded - cfg.window_len) / cfg.hop) + 1;
  const int bins = cfg.fft_size / 2 + 1;
  const int d_count = wave.num_channels();

  const std::vector<double> win = hann_window(cfg.window_len);
  RealFft fft(cfg.fft_size);
  std::vector<double> frame(cfg.fft_size, 0.0);
  std::vector<Complex> coef(bins);

  Spectrogram spec(frames, bins, d_count, cfg);
  for (int d = 0; d < d_count; ++d) {
    const auto& ch = wave.channels[d];
    for (int t = 0; t < frames; ++t) {
      const long start = static_cast<long>(t) * cfg.hop - pad;
      for (int i = 0; i < cfg.window_len; ++i) {
        const long idx = start + i;
        const double v =
            (idx >= 0 && idx < static_cast<long>(n)) ? ch[idx] : 0.0;
        frame[i] = v * win[i];
      }
      std::fill(frame.begin() + cfg.window_len, frame.end(), 0.0);
      fft.forward(frame.data(), coef.data());
      // DC and Nyquist of a real signal are real by construction.
      coef[0] = Complex(coef[0].real(), 0.0);
      coef[bins - 1] = Complex(coef[bins - 1].real(), 0.0);
      for (int f = 0; f < bins; ++f) spec.at(t, f, d) = coef[f];
    }
  }
  return spec;
}

Waveform istft(const Spectrogram& spec, int num_samples) {
  const StftConfig& cfg = spec.config;
  cfg.validate();
  if (spec.bins != cfg.fft_size / 2 + 1)
    throw std::invalid_argument("istft: bins inconsistent with fft_size");
  if (spec.frames < 1 || spec.channels < 1)
    throw std::invalid_argument("istft: empty spectrogram");

  const int pad = cfg.window_len - cfg.hop;
  const std::size_t padded =
      static_cast<std::size_t>(spec.frames - 1) * cfg.hop + cfg.window_len;
  const long max_out = static_cast<long>(spec.frames) * cfg.hop;
  const long n_out =
      num_samples >= 0
          ? num_samples
          : static_cast<long>(spec.frames + 1) * cfg.hop - cfg.window_len;
  if (n_out < 0 || n_out > max_out)
    throw std::invalid_argument("istft: requested length not reconstructible");

  const std::vector<double> win = hann_window(cfg.window_len);
  std::vector<double> wsum(padded, 0.0);
  for (int t = 0; t < spec.frames; ++t)
    for (int i = 0; i < cfg.window_len; ++i)
      wsum[static_cast<std::size_t>(t) * cfg.hop + i] += win[i] * win[i];

  RealFft fft(cfg.fft_size);
  std::vector<Complex> coef(spec.bins);
  std::vector<double> frame(cfg.fft_size);

  Waveform out(spec.channels, static_cast<std::size_t>(n_out),
               cfg.sample_rate);
  std::vector<double> acc(padded);
  for (int d = 0; d < spec.channels; ++d) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (int t = 0; t < spec.frames; ++t) {
      for (int f = 0; f < spec.bins; ++f) coef[f] = spec.at(t, f, d);
      fft.inverse(coef.data(), frame.data());
      const std::size_t base = static_cast<std::size_t>(t) * cfg.hop;
      for (int i = 0; i < cfg.window_len; ++i)
        acc[base + i] += frame[i] * win[i];
    }
    auto& ch = out.channels[d];
    for (long i = 0; i < n_out; ++i) {
      const std::size_t p = static_cast<std::size_t>(i) + pad;
      ch[i] = wsum[p] > 1e-12 ? acc[p] / wsum[p] : 0.0;
    }
  }
  return out;
}

Waveform istft(const Spectrogram& spec, const StftConfig& cfg,
               int num_samples) {
  if (!(spec.config == cfg))
    throw std::invalid_argument("istft: config does not match spectrogram");
  return istft(spec, num_samples);
}

Tensor3 log_power_spectra(const Spectrogram& spec, double floor_eps) {
  Tensor3 out(spec.frames, spec.bins, spec.channels);
  for (int t = 0; t < spec.frames; ++t)
    for (int f = 0; f < spec.bins; ++f)
      for (int d = 0; d < spec.channels; ++d) {
        const Complex v = spec.at(t, f, d);
        out.at(t, f, d) =
            std::log(v.real() * v.real() + v.imag() * v.imag() + floor_eps);
      }
  return out;
}

}  // namespace derev
