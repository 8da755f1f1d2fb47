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

#include "derev/room_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "derev/fft.hpp"

namespace derev {

namespace {

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

double distance(const std::array<double, 3>& a,
                const std::array<double, 3>& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

bool strictly_inside(const std::array<double, 3>& p,
                     const std::array<double, 3>& dims) {
  for (int i = 0; i < 3; ++i)
    if (!(p[i] > 0.0 && p[i] < dims[i])) return false;
  return true;
}

// Direct-path onset: the first tap within 0.3 of the global maximum. Plain
// argmax can land on a later tap when several image arrivals collapse onto
// one integer delay and outweigh the direct sound; the onset cannot, since
// nothing arrives before the direct path.
long find_peak(const std::vector<double>& taps) {
  double best = 0.0;
  for (double v : taps) best = std::max(best, std::fabs(v));
  if (best <= 0.0) return 0;
  for (std::size_t i = 0; i < taps.size(); ++i)
    if (std::fabs(taps[i]) >= 0.3 * best) return static_cast<long>(i);
  return 0;
}

double total_energy(const Waveform& w) {
  double e = 0.0;
  for (const auto& ch : w.channels)
    for (double v : ch) e += v * v;
  return e;
}

}  // namespace

void RoomSpec::validate() const {
  for (double d : dimensions)
    if (!(d > 0.0)) throw std::invalid_argument("room: non-positive dimension");
  if (!(absorption > 0.0 && absorption < 1.0))
    throw std::invalid_argument("room: absorption must be in (0, 1)");
  if (!strictly_inside(source_pos, dimensions))
    throw std::invalid_argument("room: source outside room");
  if (mic_positions.empty())
    throw std::invalid_argument("room: no microphones");
  for (const auto& m : mic_positions) {
    if (!strictly_inside(m, dimensions))
      throw std::invalid_argument("room: microphone outside room");
    if (distance(m, source_pos) < 1e-6)
      throw std::invalid_argument("room: source coincides with microphone");
  }
  if (reflection_order < 0)
    throw std::invalid_argument("room: negative reflection order");
  if (!(rir_duration_s > 0.0) || sample_rate <= 0 || !(sound_speed > 0.0))
    throw std::invalid_argument("room: bad duration/rate/speed");
}

RoomSpec sample_room_spec(RoomSizeClass size_class, int sample_rate, Rng& rng,
                          int num_mics, double mic_spacing) {
  if (num_mics < 1) throw std::invalid_argument("sample_room_spec: num_mics");
  RoomSpec spec;
  const bool medium = size_class == RoomSizeClass::Medium;
  const double lo_xy = medium ? 10.0 : 30.0;
  const double hi_xy = medium ? 30.0 : 50.0;
  spec.dimensions = {rng.uniform(lo_xy, hi_xy), rng.uniform(lo_xy, hi_xy),
                     rng.uniform(2.0, 5.0)};
  spec.absorption = rng.uniform(0.2, 0.8);
  spec.rir_duration_s = medium ? 1.0 : 2.0;
  spec.sample_rate = sample_rate;
  spec.reflection_order = 10;

  const double margin = 0.5;
  auto sample_point = [&](double extra) {
    return std::array<double, 3>{
        rng.uniform(margin + extra, spec.dimensions[0] - margin - extra),
        rng.uniform(margin + extra, spec.dimensions[1] - margin - extra),
        rng.uniform(margin, spec.dimensions[2] - margin)};
  };
  // Source first, then the mic array center at a uniform distance in
  // [1, 5] m along a random horizontal-ish direction, redrawn until inside.
  spec.source_pos = sample_point(0.0);
  for (int attempt = 0;; ++attempt) {
    const double dist = rng.uniform(1.0, 5.0);
    const double az = rng.uniform(0.0, 2.0 * M_PI);
    const double el = rng.uniform(-0.3, 0.3);
    const std::array<double, 3> dir = {std::cos(az) * std::cos(el),
                                       std::sin(az) * std::cos(el),
                                       std::sin(el)};
    std::array<double, 3> center = {spec.source_pos[0] + dist * dir[0],
                                    spec.source_pos[1] + dist * dir[1],
                                    spec.source_pos[2] + dist * dir[2]};
    spec.mic_positions.clear();
    bool ok = true;
    for (int m = 0; m < num_mics; ++m) {
      // Mics along the azimuth-orthogonal axis, spaced mic_spacing apart.
      const double off = (m - 0.5 * (num_mics - 1)) * mic_spacing;
      const std::array<double, 3> pos = {center[0] - off * std::sin(az),
                                         center[1] + off * std::cos(az),
                                         center[2]};
      if (!strictly_inside(pos, spec.dimensions) ||
          distance(pos, spec.source_pos) < 0.5) {
        ok = false;
        break;
      }
      spec.mic_positions.push_back(pos);
    }
    if (ok) break;
    if (attempt > 200)
      throw std::runtime_error("sample_room_spec: no valid geometry found");
  }
  spec.validate();
  return spec;
}

Rir simulate_rir(const RoomSpec& spec) {
  spec.validate();
  const double fs = spec.sample_rate;
  const double c = spec.sound_speed;
  const long n_taps = std::lround(spec.rir_duration_s * fs);
  const double beta = std::sqrt(1.0 - spec.absorption);
  const int order = spec.reflection_order;

  Rir rir;
  rir.sample_rate = spec.sample_rate;
  rir.taps.assign(spec.mic_positions.size(),
                  std::vector<double>(n_taps, 0.0));

  // Windowed-sinc kernel half width (4 ms each side) for fractional delays.
  const int tw = 2 * static_cast<int>(std::lround(0.004 * fs));

  const auto& dims = spec.dimensions;
  for (std::size_t mic = 0; mic < spec.mic_positions.size(); ++mic) {
    auto& taps = rir.taps[mic];
    const auto& r = spec.mic_positions[mic];
    const auto& s = spec.source_pos;
    // Lattice bounds: images beyond the RIR duration or the reflection
    // order cannot contribute.
    const double max_dist = c * spec.rir_duration_s + 1.0;
    const int order_bound = (order + 1) / 2;
    const int n1 = std::min<int>(
        order_bound, static_cast<int>(std::ceil(max_dist / (2.0 * dims[0]))));
    const int n2 = std::min<int>(
        order_bound, static_cast<int>(std::ceil(max_dist / (2.0 * dims[1]))));
    const int n3 = std::min<int>(
        order_bound, static_cast<int>(std::ceil(max_dist / (2.0 * dims[2]))));

    for (int mx = -n1; mx <= n1; ++mx) {
      for (int my = -n2; my <= n2; ++my) {
        for (int mz = -n3; mz <= n3; ++mz) {
          for (int q = 0; q <= 1; ++q) {
            for (int j = 0; j <= 1; ++j) {
              for (int k = 0; k <= 1; ++k) {
                if (std::abs(2 * mx - q) + std::abs(2 * my - j) +
                        std::abs(2 * mz - k) > order)
                  continue;
                const double ix = (1 - 2 * q) * s[0] - r[0] + 2 * mx * dims[0];
                const double iy = (1 - 2 * j) * s[1] - r[1] + 2 * my * dims[1];
                const double iz = (1 - 2 * k) * s[2] - r[2] + 2 * mz * dims[2];
                const double dist = std::sqrt(ix * ix + iy * iy + iz * iz);
                const int n_refl = std::abs(mx - q) + std::abs(mx) +
                                   std::abs(my - j) + std::abs(my) +
                                   std::abs(mz - k) + std::abs(mz);
                const double gain =
                    std::pow(beta, n_refl) / (4.0 * M_PI * dist);
                const double delay = dist / c * fs;
                if (spec.fractional_delay) {
                  const long base = std::lround(std::floor(delay));
                  for (int i = 0; i < tw; ++i) {
                    const long idx = base - tw / 2 + 1 + i;
                    if (idx < 0 || idx >= n_taps) continue;
                    const double t = static_cast<double>(idx) - delay;
                    const double w =
                        0.5 * (1.0 + std::cos(2.0 * M_PI * t / tw));
                    taps[idx] += gain * w * sinc(M_PI * t);
                  }
                } else {
                  const long idx = std::lround(delay);
                  if (idx >= 0 && idx < n_taps) taps[idx] += gain;
                }
              }
            }
          }
        }
      }
    }
  }

  const double early_window = 0.05 * fs;
  for (const auto& taps : rir.taps) {
    const long peak = find_peak(taps);
    rir.main_peak_index.push_back(peak);
    rir.early_len.push_back(
        std::min<long>(static_cast<long>(taps.size()),
                       peak + std::lround(early_window) + 1));
  }
  return rir;
}

std::pair<Rir, Rir> split_rir(const Rir& rir, double early_ms) {
  if (rir.taps.empty() || rir.sample_rate <= 0)
    throw std::invalid_argument("split_rir: empty rir");
  Rir early = rir, late = rir;
  const long window =
      std::lround(early_ms / 1000.0 * rir.sample_rate);
  for (int m = 0; m < rir.num_mics(); ++m) {
    const long n = static_cast<long>(rir.taps[m].size());
    const long peak = rir.main_peak_index[m];
    if (peak < 0 || peak >= n)
      throw std::invalid_argument("split_rir: invalid main peak index");
    const long cut = std::min(n, peak + window + 1);
    std::fill(early.taps[m].begin() + cut, early.taps[m].end(), 0.0);
    std::fill(late.taps[m].begin(), late.taps[m].begin() + cut, 0.0);
    early.early_len[m] = cut;
    late.early_len[m] = cut;
    late.main_peak_index[m] = find_peak(late.taps[m]);
  }
  return {early, late};
}

Waveform convolve(const Waveform& speech, const Rir& rir) {
  speech.check_consistent();
  if (speech.sample_rate != rir.sample_rate)
    throw std::invalid_argument("convolve: sample rate mismatch");
  if (rir.taps.empty()) throw std::invalid_argument("convolve: empty rir");
  const bool mono_speech = speech.num_channels() == 1;
  if (!mono_speech && speech.num_channels() != rir.num_mics())
    throw std::invalid_argument(
        "convolve: channel count must be 1 or match the microphone count");

  const std::size_t n = speech.num_samples();
  Waveform out(rir.num_mics(), n, speech.sample_rate);
  for (int m = 0; m < rir.num_mics(); ++m) {
    const auto& src = speech.channels[mono_speech ? 0 : m];
    std::vector<double> full = fft_convolve(src, rir.taps[m]);
    std::copy(full.begin(), full.begin() + n, out.channels[m].begin());
  }
  return out;
}

Waveform mix_noise(const Waveform& clean, const Waveform& noise,
                   double snr_db, std::uint64_t seed) {
  clean.check_consistent();
  noise.check_consistent();
  if (clean.sample_rate != noise.sample_rate)
    throw std::invalid_argument("mix_noise: sample rate mismatch");
  if (noise.num_channels() != 1 &&
      noise.num_channels() != clean.num_channels())
    throw std::invalid_argument("mix_noise: incompatible channel counts");

  const std::size_t n = clean.num_samples();
  const std::size_t noise_len = noise.num_samples();
  if (noise_len == 0) throw std::invalid_argument("mix_noise: empty noise");

  // Cyclic crop from a seeded random phase covers both the "crop" and
  // "duplicate" cases.
  Rng rng(seed);
  const std::size_t offset = static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(noise_len) - 1));

  Waveform noise_seg(clean.num_channels(), n, clean.sample_rate);
  for (int d = 0; d < clean.num_channels(); ++d) {
    const auto& src = noise.channels[noise.num_channels() == 1 ? 0 : d];
    for (std::size_t i = 0; i < n; ++i)
      noise_seg.channels[d][i] = src[(offset + i) % noise_len];
  }

  const double clean_energy = total_energy(clean);
  const double noise_energy = total_energy(noise_seg);
  if (noise_energy <= 0.0)
    throw std::invalid_argument("mix_noise: silent noise segment");
  const double gain =
      std::sqrt(clean_energy / (noise_energy * std::pow(10.0, snr_db / 10.0)));

  Waveform out = clean;
  for (int d = 0; d < out.num_channels(); ++d)
    for (std::size_t i = 0; i < n; ++i)
      out.channels[d][i] += gain * noise_seg.channels[d][i];
  return out;
}

Waveform drc(const Waveform& wave, int n, double r) {
  wave.check_consistent();
  if (n < 1) throw std::invalid_argument("drc: n must be >= 1");
  std::vector<double> all;
  all.reserve(wave.num_samples() * wave.num_channels());
  for (const auto& ch : wave.channels) all.insert(all.end(), ch.begin(), ch.end());
  if (all.size() < static_cast<std::size_t>(2 * n))
    throw std::invalid_argument("drc: need at least 2n samples");
  for (double v : all)
    if (std::fabs(v) > 1.0 + 1e-9)
      throw std::invalid_argument("drc: input not normalized to [-1, 1]");

  std::vector<double> sorted = all;
  std::sort(sorted.begin(), sorted.end());
  double lo = 0.0, hi = 0.0;
  for (int i = 0; i < n; ++i) {
    lo += sorted[i];
    hi += sorted[sorted.size() - 1 - i];
  }
  lo /= n;
  hi /= n;
  if (hi - lo <= 0.0)
    throw std::invalid_argument("drc: constant signal");

  const double scale = 2.0 * r / (hi - lo);
  Waveform out = wave;
  for (auto& ch : out.channels)
    for (double& v : ch) v *= scale;
  return out;
}

MixtureExample generate_example(const DatagenConfig& cfg, std::uint64_t seed) {
  if (cfg.speech_pool.empty() || cfg.rir_pool.empty())
    throw std::invalid_argument("datagen: empty speech or rir pool");
  if (cfg.crop_lo_s <= 0.0 || cfg.crop_hi_s < cfg.crop_lo_s)
    throw std::invalid_argument("datagen: bad crop range");
  if (cfg.snr_hi_db < cfg.snr_lo_db)
    throw std::invalid_argument("datagen: bad snr range");

  Rng rng(seed);
  MixtureExample ex;
  ex.seed = seed;
  ex.speech_index = static_cast<int>(
      rng.uniform_int(0, static_cast<std::int64_t>(cfg.speech_pool.size()) - 1));
  ex.rir_index = static_cast<int>(
      rng.uniform_int(0, static_cast<std::int64_t>(cfg.rir_pool.size()) - 1));
  const Waveform& utterance = cfg.speech_pool[ex.speech_index];
  const Rir& rir = cfg.rir_pool[ex.rir_index];
  if (utterance.num_channels() != 1)
    throw std::invalid_argument("datagen: speech pool must be mono");
  if (utterance.sample_rate != rir.sample_rate)
    throw std::invalid_argument("datagen: speech/rir sample rate mismatch");

  // Random crop.
  const double crop_s = rng.uniform(cfg.crop_lo_s, cfg.crop_hi_s);
  const std::size_t crop_len =
      static_cast<std::size_t>(std::lround(crop_s * utterance.sample_rate));
  if (crop_len > utterance.num_samples())
    throw std::invalid_argument("datagen: crop longer than utterance");
  const std::size_t max_start = utterance.num_samples() - crop_len;
  const std::size_t start = static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(max_start)));
  Waveform speech(1, crop_len, utterance.sample_rate);
  std::copy(utterance.channels[0].begin() + start,
            utterance.channels[0].begin() + start + crop_len,
            speech.channels[0].begin());
  if (cfg.apply_drc) speech = drc(speech);

  const auto [early_rir, late_rir] = split_rir(rir);
  const Waveform early_clean = convolve(speech, early_rir);
  ex.late_ref = convolve(speech, late_rir);

  // The observation is assembled as the sum of the parts so that
  // observed == early + late (+ noise) holds bit-exactly.
  ex.observed = early_clean;
  for (int d = 0; d < ex.observed.num_channels(); ++d)
    for (std::size_t i = 0; i < ex.observed.num_samples(); ++i)
      ex.observed.channels[d][i] += ex.late_ref.channels[d][i];

  ex.early_ref = early_clean;
  if (!cfg.noise_pool.empty()) {
    ex.noise_index = static_cast<int>(rng.uniform_int(
        0, static_cast<std::int64_t>(cfg.noise_pool.size()) - 1));
    ex.snr_db = static_cast<double>(rng.uniform_int(cfg.snr_lo_db, cfg.snr_hi_db));
    const std::uint64_t noise_seed = rng.raw();
    const Waveform& noise = cfg.noise_pool[ex.noise_index];
    const Waveform noisy_observed =
        mix_noise(ex.observed, noise, ex.snr_db, noise_seed);
    if (cfg.noisy_target) {
      // Same noise component added to the target (early arriving + noise).
      for (int d = 0; d < ex.early_ref.num_channels(); ++d)
        for (std::size_t i = 0; i < ex.early_ref.num_samples(); ++i)
          ex.early_ref.channels[d][i] += noisy_observed.channels[d][i] -
                                         ex.observed.channels[d][i];
    }
    ex.observed = noisy_observed;
    ex.has_noise = true;
  }
  return ex;
}

double schroeder_t60(const std::vector<double>& taps, int sample_rate) {
  if (taps.empty() || sample_rate <= 0)
    throw std::invalid_argument("schroeder_t60: empty rir");
  // Backward energy integral.
  std::vector<double> edc(taps.size());
  double acc = 0.0;
  for (std::size_t i = taps.size(); i-- > 0;) {
    acc += taps[i] * taps[i];
    edc[i] = acc;
  }
  if (acc <= 0.0) throw std::invalid_argument("schroeder_t60: silent rir");

  // Least-squares line through the decay between -5 and -25 dB.
  const double total = acc;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  long count = 0;
  for (std::size_t i = 0; i < edc.size(); ++i) {
    if (edc[i] <= 0.0) break;
    const double db = 10.0 * std::log10(edc[i] / total);
    if (db > -5.0) continue;
    if (db < -25.0) break;
    const double t = static_cast<double>(i) / sample_rate;
    sx += t;
    sy += db;
    sxx += t * t;
    sxy += t * db;
    ++count;
  }
  if (count < 2)
    throw std::invalid_argument("schroeder_t60: decay range too short");
  const double denom = count * sxx - sx * sx;
  if (denom <= 0.0)
    throw std::invalid_argument("schroeder_t60: degenerate fit");
  const double slope = (count * sxy - sx * sy) / denom;  // dB per second
  if (slope >= 0.0)
    throw std::invalid_argument("schroeder_t60: non-decaying energy");
  return -60.0 / slope;
}

}  // namespace derev
