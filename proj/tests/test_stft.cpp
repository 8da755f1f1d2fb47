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

#include <doctest.h>

#include <cmath>

#include "derev/fft.hpp"
#include "testutil.hpp"

using namespace derev;
using namespace derev::testutil;

namespace {

int expected_frames(std::size_t n, const StftConfig& cfg) {
  const std::size_t padded = n + 2 * (cfg.window_len - cfg.hop);
  return static_cast<int>((padded - cfg.window_len) / cfg.hop) + 1;
}

}  // namespace

TEST_CASE("config validation") {
  StftConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.hop = 300;  // does not divide 1024
  CHECK_THROWS(cfg.validate());
  cfg = StftConfig{};
  cfg.fft_size = 512;  // smaller than the window
  CHECK_THROWS(cfg.validate());
}

TEST_CASE("zero input maps to zero spectrogram and back") {
  StftConfig cfg;
  Waveform wave(1, 16000, 16000);
  const Spectrogram spec = stft(wave, cfg);
  CHECK(spec.frames == expected_frames(16000, cfg));
  CHECK(spec.bins == 513);
  for (const auto& v : spec.data) CHECK(v == Complex(0.0, 0.0));

  const Waveform back = istft(spec, 16000);
  for (double v : back.channels[0]) CHECK(v == 0.0);
}

TEST_CASE("bin-center sinusoid peaks at its bin in interior frames") {
  StftConfig cfg;
  const int k = 40;
  const double freq = static_cast<double>(k) * cfg.sample_rate / cfg.fft_size;
  Waveform wave(1, 16000, 16000);
  for (std::size_t i = 0; i < wave.num_samples(); ++i)
    wave.channels[0][i] = std::sin(2.0 * M_PI * freq * i / cfg.sample_rate);

  const Spectrogram spec = stft(wave, cfg);
  for (int t = 4; t < spec.frames - 4; ++t) {
    int argmax = 0;
    double best = -1.0;
    for (int f = 0; f < spec.bins; ++f) {
      const double mag = std::abs(spec.at(t, f, 0));
      if (mag > best) {
        best = mag;
        argmax = f;
      }
    }
    CHECK(argmax == k);
  }
}

TEST_CASE("round trip is exact to 1e-6 for assorted lengths") {
  StftConfig cfg;
  // Lengths deliberately include non-multiples of the hop.
  const std::size_t lengths[] = {1024, 4096, 16000, 16001, 12345, 5000};
  std::uint64_t seed = 100;
  for (const std::size_t n : lengths) {
    Waveform wave(1, n, 16000);
    Rng rng(seed++);
    for (double& v : wave.channels[0]) v = rng.uniform(-1.0, 1.0);
    const Spectrogram spec = stft(wave, cfg);
    const Waveform back = istft(spec, static_cast<int>(n));
    REQUIRE(back.num_samples() == n);
    CHECK(rel_rms_error(back.channels[0], wave.channels[0]) <= 1e-6);
  }
}

TEST_CASE("round trip preserves channel order") {
  StftConfig cfg;
  Waveform wave = white_noise(1.0, 16000, 42, 0.5, 3);
  for (std::size_t i = 0; i < wave.num_samples(); ++i)
    wave.channels[2][i] += 0.5;  // make channels distinguishable
  const Spectrogram spec = stft(wave, cfg);
  CHECK(spec.channels == 3);
  const Waveform back = istft(spec, static_cast<int>(wave.num_samples()));
  for (int d = 0; d < 3; ++d)
    CHECK(rel_rms_error(back.channels[d], wave.channels[d]) <= 1e-6);
}

TEST_CASE("linearity to machine precision") {
  StftConfig cfg;
  const Waveform x = white_noise(0.5, 16000, 1);
  const Waveform y = white_noise(0.5, 16000, 2);
  const double a = 1.7, b = -0.3;
  Waveform mix(1, x.num_samples(), 16000);
  for (std::size_t i = 0; i < x.num_samples(); ++i)
    mix.channels[0][i] = a * x.channels[0][i] + b * y.channels[0][i];

  const Spectrogram sx = stft(x, cfg), sy = stft(y, cfg), sm = stft(mix, cfg);
  double worst = 0.0;
  for (std::size_t i = 0; i < sm.data.size(); ++i)
    worst = std::max(worst,
                     std::abs(sm.data[i] - (a * sx.data[i] + b * sy.data[i])));
  CHECK(worst <= 1e-9);
}

TEST_CASE("single nonzero frame stays inside its window support") {
  StftConfig cfg;
  Waveform wave = white_noise(1.0, 16000, 7);
  Spectrogram spec = stft(wave, cfg);
  const int keep = 10;
  for (int t = 0; t < spec.frames; ++t) {
    if (t == keep) continue;
    for (int f = 0; f < spec.bins; ++f) spec.at(t, f, 0) = Complex(0.0, 0.0);
  }
  const Waveform out = istft(spec, static_cast<int>(wave.num_samples()));
  // Frame `keep` covers padded samples [keep*hop, keep*hop + window); the
  // unpadded region starts window_len - hop into the padding.
  const long pad = cfg.window_len - cfg.hop;
  const long lo = static_cast<long>(keep) * cfg.hop - pad;
  const long hi = lo + cfg.window_len;
  for (long i = 0; i < static_cast<long>(out.num_samples()); ++i) {
    if (i < lo || i >= hi) CHECK(out.channels[0][i] == 0.0);
  }
}

TEST_CASE("stationary-noise energy matches the window gain within 1%") {
  StftConfig cfg;
  const Waveform wave = white_noise(4.0, 16000, 9, 0.5);
  const Spectrogram spec = stft(wave, cfg);

  double time_energy = 0.0;
  for (double v : wave.channels[0]) time_energy += v * v;

  // One-sided bins doubled except DC and Nyquist; with the periodic Hann at
  // 4x overlap the window-power gain is 3/2, and Parseval brings in a factor
  // fft_size.
  double spec_energy = 0.0;
  for (int t = 0; t < spec.frames; ++t)
    for (int f = 0; f < spec.bins; ++f) {
      const double p = std::norm(spec.at(t, f, 0));
      spec_energy += (f == 0 || f == spec.bins - 1) ? p : 2.0 * p;
    }
  const double expected = cfg.fft_size * 1.5 * time_energy;
  CHECK(spec_energy == doctest::Approx(expected).epsilon(0.01));
}

TEST_CASE("dc and nyquist bins are purely real") {
  StftConfig cfg;
  const Spectrogram spec = stft(white_noise(0.5, 16000, 11), cfg);
  for (int t = 0; t < spec.frames; ++t) {
    CHECK(spec.at(t, 0, 0).imag() == 0.0);
    CHECK(spec.at(t, spec.bins - 1, 0).imag() == 0.0);
  }
}

TEST_CASE("log power spectra closed forms") {
  StftConfig cfg;
  Spectrogram spec(3, 5, 2, cfg);

  SUBCASE("unit magnitude maps to zero") {
    for (auto& v : spec.data) v = Complex(0.0, 1.0);
    const Tensor3 lps = log_power_spectra(spec);
    for (double v : lps.data) CHECK(v == doctest::Approx(0.0).epsilon(1e-9));
  }
  SUBCASE("magnitude e maps to two") {
    for (auto& v : spec.data) v = Complex(std::exp(1.0), 0.0);
    const Tensor3 lps = log_power_spectra(spec);
    for (double v : lps.data) CHECK(v == doctest::Approx(2.0).epsilon(1e-9));
  }
  SUBCASE("silence maps to the floor") {
    const Tensor3 lps = log_power_spectra(spec);
    for (double v : lps.data) CHECK(v == doctest::Approx(std::log(1e-10)));
  }
}

TEST_CASE("error paths") {
  StftConfig cfg;
  Waveform wave(1, 100, 16000);  // shorter than one window
  CHECK_THROWS(stft(wave, cfg));

  Waveform bad(1, 4096, 16000);
  bad.channels[0][5] = std::nan("");
  CHECK_THROWS(stft(bad, cfg));

  Waveform rate(1, 4096, 8000);  // sample rate mismatch
  CHECK_THROWS(stft(rate, cfg));

  Spectrogram spec = stft(white_noise(0.5, 16000, 1), cfg);
  StftConfig other = cfg;
  other.hop = 512;
  CHECK_THROWS(istft(spec, other));                      // config mismatch
  CHECK_THROWS(istft(spec, spec.frames * cfg.hop + 1));  // too long
}

TEST_CASE("larger fft than window still round trips") {
  StftConfig cfg;
  cfg.fft_size = 2048;
  const Waveform wave = white_noise(1.0, 16000, 21);
  const Spectrogram spec = stft(wave, cfg);
  CHECK(spec.bins == 1025);
  const Waveform back = istft(spec, static_cast<int>(wave.num_samples()));
  CHECK(rel_rms_error(back.channels[0], wave.channels[0]) <= 1e-6);
}

TEST_CASE("fft convolve matches the direct sum") {
  Rng rng(5);
  std::vector<double> x(777), h(123);
  for (double& v : x) v = rng.uniform(-1.0, 1.0);
  for (double& v : h) v = rng.uniform(-1.0, 1.0);
  const std::vector<double> got = fft_convolve(x, h);
  REQUIRE(got.size() == x.size() + h.size() - 1);
  for (std::size_t n = 0; n < got.size(); n += 17) {
    double want = 0.0;
    for (std::size_t k = 0; k < h.size(); ++k)
      if (n >= k && n - k < x.size()) want += h[k] * x[n - k];
    CHECK(got[n] == doctest::Approx(want).epsilon(1e-10));
  }
}
