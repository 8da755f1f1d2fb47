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

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "derev/rng.hpp"
#include "derev/types.hpp"

namespace derev {

/// Shoebox room geometry for the image-method simulator. A single absorption
/// coefficient applies to all six surfaces; each reflection multiplies the
/// amplitude by sqrt(1 - absorption).
struct RoomSpec {
  std::array<double, 3> dimensions = {20.0, 20.0, 3.0};  // meters
  double absorption = 0.5;                               // in [0.2, 0.8]
  std::array<double, 3> source_pos = {10.0, 10.0, 1.5};
  std::vector<std::array<double, 3>> mic_positions = {{12.0, 10.0, 1.5}};
  int reflection_order = 10;
  double rir_duration_s = 1.0;
  int sample_rate = 16000;
  double sound_speed = 343.0;
  bool fractional_delay = false;  // windowed-sinc tap placement when true

  void validate() const;
};

enum class RoomSizeClass { Medium, Large };

/// Sampled room impulse response, one tap vector per microphone.
/// main_peak_index marks the direct-path arrival (first tap within 0.3 of
/// the maximum magnitude; for typical rooms this is also the argmax) and
/// early_len the end of the early window (main peak + 50 ms, inclusive).
struct Rir {
  std::vector<std::vector<double>> taps;
  std::vector<long> main_peak_index;
  std::vector<long> early_len;
  int sample_rate = 0;

  int num_mics() const { return static_cast<int>(taps.size()); }
  std::size_t num_taps() const { return taps.empty() ? 0 : taps[0].size(); }
};

/// One generated training/evaluation example. Before any dynamic range
/// control of the mixture, observed == clean early part + late_ref + noise
/// holds sample-wise; early_ref equals the clean early part plus the noise
/// component when the generator runs in noisy-target mode.
struct MixtureExample {
  Waveform observed;
  Waveform early_ref;
  Waveform late_ref;
  double snr_db = 0.0;  // NaN-free; +inf never used, noise may be absent
  bool has_noise = false;
  std::uint64_t seed = 0;
  int speech_index = -1, rir_index = -1, noise_index = -1;
};

/// Draws a RoomSpec from the size-class parameter ranges: medium rooms span
/// [10x10x2, 30x30x5] m^3 (1.0 s RIR), large rooms [30x30x2, 50x50x5] m^3
/// (2.0 s RIR); absorption uniform in [0.2, 0.8], source-mic distance uniform
/// in [1.0, 5.0] m, reflection order 10.
RoomSpec sample_room_spec(RoomSizeClass size_class, int sample_rate, Rng& rng,
                          int num_mics = 1, double mic_spacing = 0.2);

/// Allen-Berkley image-method simulation. Deterministic for a given spec;
/// taps length is rir_duration_s * sample_rate. Images are placed at integer
/// delays by default (exact for test oracles) or with an 8 ms windowed-sinc
/// fractional-delay kernel when spec.fractional_delay is set.
Rir simulate_rir(const RoomSpec& spec);

/// Splits the RIR at main peak + early_ms per microphone. Both parts keep the
/// full length with zeros in the complement, so early + late == rir exactly.
std::pair<Rir, Rir> split_rir(const Rir& rir, double early_ms = 50.0);

/// FFT-based linear convolution truncated to the speech length. A mono
/// speech input against a D-mic RIR yields D output channels; a D-channel
/// input requires a D-mic RIR and convolves channel-wise.
Waveform convolve(const Waveform& speech, const Rir& rir);

/// Adds `noise` to `clean` scaled so the full-utterance energy ratio hits
/// snr_db exactly. The noise is cyclically cropped/tiled to the clean length
/// from a seeded random start offset.
Waveform mix_noise(const Waveform& clean, const Waveform& noise,
                   double snr_db, std::uint64_t seed);

/// Dynamic range control: rescales by 2r / (amax - amin) where amax and amin
/// are the means of the n largest and n smallest signed sample amplitudes.
/// Requires at least 2n samples, values in [-1, 1], and a non-constant
/// signal.
Waveform drc(const Waveform& wave, int n = 100, double r = 0.25);

/// Pools and draw ranges for generate_example.
struct DatagenConfig {
  std::vector<Waveform> speech_pool;
  std::vector<Rir> rir_pool;
  std::vector<Waveform> noise_pool;  // empty = noiseless examples
  int snr_lo_db = 5, snr_hi_db = 15;     // integer SNR draw, inclusive
  double crop_lo_s = 2.0, crop_hi_s = 4.0;
  bool noisy_target = true;  // include the noise component in early_ref
  bool apply_drc = true;     // DRC on the cropped speech before convolution
};

/// On-the-fly example generation: draws a speech clip, RIR and noise sample,
/// crops the speech, convolves with the early/late RIR parts and mixes noise
/// at the drawn SNR. Pure function of (cfg, seed).
MixtureExample generate_example(const DatagenConfig& cfg, std::uint64_t seed);

/// Reverberation time from the Schroeder backward energy integral: a least
/// squares line through the decay curve between -5 and -25 dB, extrapolated
/// to -60 dB.
double schroeder_t60(const std::vector<double>& taps, int sample_rate);

}  // namespace derev
