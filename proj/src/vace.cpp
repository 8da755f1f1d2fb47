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

#include "derev/vace.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

#include "derev/audio_io.hpp"
#include "derev/psd.hpp"

namespace derev {

VirtualGenerator VirtualGenerator::scaled_copy(double gain) {
  VirtualGenerator g;
  g.kind = Kind::ScaledCopy;
  g.gain = gain;
  return g;
}

VirtualGenerator VirtualGenerator::late_oracle(Waveform late_ref,
                                               double gain) {
  VirtualGenerator g;
  g.kind = Kind::LateOracle;
  g.late_ref = std::move(late_ref);
  g.gain = gain;
  return g;
}

VirtualGenerator VirtualGenerator::external_signal(std::string path) {
  VirtualGenerator g;
  g.kind = Kind::ExternalSignal;
  g.path = std::move(path);
  return g;
}

VirtualGenerator VirtualGenerator::frame_delay(int frames, double gain) {
  VirtualGenerator g;
  g.kind = Kind::FrameDelay;
  g.frames = frames;
  g.gain = gain;
  return g;
}

void VaceConfig::validate() const {
  wpe.validate();
  stft.validate();
  if (psd_mode != PsdMode::Averaged && psd_mode != PsdMode::Simplified)
    throw std::invalid_argument("vace: invalid psd mode");
}

namespace {

// Mono channel of x1, scaled and length-fitted to n samples.
std::vector<double> fit_length(const std::vector<double>& src, double gain,
                               std::size_t n, long shift = 0) {
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const long j = static_cast<long>(i) - shift;
    if (j >= 0 && j < static_cast<long>(src.size())) out[i] = gain * src[j];
  }
  return out;
}

}  // namespace

Waveform generate_virtual(const Waveform& x1, const VirtualGenerator& gen,
                          const StftConfig& cfg) {
  x1.check_consistent();
  if (x1.num_channels() != 1)
    throw std::invalid_argument("vace: observation must be single-channel");
  if (!(gen.gain > 0.0) || !std::isfinite(gen.gain))
    throw std::invalid_argument("vace: gain must be finite and > 0");
  const std::size_t n = x1.num_samples();

  Waveform xv(1, n, x1.sample_rate);
  switch (gen.kind) {
    case VirtualGenerator::Kind::ScaledCopy:
      xv.channels[0] = fit_length(x1.channels[0], gen.gain, n);
      break;
    case VirtualGenerator::Kind::LateOracle: {
      gen.late_ref.check_consistent();
      if (gen.late_ref.sample_rate != x1.sample_rate)
        throw std::invalid_argument("vace: late reference sample rate");
      xv.channels[0] = fit_length(gen.late_ref.channels[0], gen.gain, n);
      break;
    }
    case VirtualGenerator::Kind::FrameDelay:
      xv.channels[0] = fit_length(x1.channels[0], gen.gain, n,
                                  static_cast<long>(gen.frames) * cfg.hop);
      break;
    case VirtualGenerator::Kind::ExternalSignal: {
      const Waveform ext = read_wav(gen.path);
      if (ext.sample_rate != x1.sample_rate)
        throw std::invalid_argument("vace: external signal sample rate");
      const long diff = static_cast<long>(ext.num_samples()) -
                        static_cast<long>(n);
      if (std::labs(diff) > cfg.hop)
        throw std::invalid_argument(
            "vace: external signal length differs by more than one hop");
      xv.channels[0] = fit_length(ext.channels[0], gen.gain, n);
      break;
    }
  }
  return xv;
}

Waveform vace_wpe(const Waveform& x1, const VirtualGenerator& gen,
                  const VaceConfig& cfg) {
  cfg.validate();
  x1.check_consistent();
  if (x1.num_channels() != 1)
    throw std::invalid_argument("vace: observation must be single-channel");
  const std::size_t min_len =
      static_cast<std::size_t>(cfg.wpe.delay + cfg.wpe.lp_order + 1) *
      cfg.stft.hop;
  if (x1.num_samples() <= min_len)
    throw std::invalid_argument("vace: observation too short for lp config");
  if (gen.kind == VirtualGenerator::Kind::ScaledCopy)
    std::cerr << "vace: scaled-copy virtual channel is collinear with the "
                 "input; relying on diagonal loading\n";

  const Waveform xv = generate_virtual(x1, gen, cfg.stft);
  const Spectrogram spec1 = stft(x1, cfg.stft);
  const Spectrogram specv = stft(xv, cfg.stft);

  Spectrogram both(spec1.frames, spec1.bins, 2, cfg.stft);
  for (int t = 0; t < spec1.frames; ++t)
    for (int f = 0; f < spec1.bins; ++f) {
      both.at(t, f, 0) = spec1.at(t, f, 0);  // channel 0: actual microphone
      both.at(t, f, 1) = specv.at(t, f, 0);
    }

  const PsdSource lambda_source =
      cfg.psd_mode == PsdMode::Averaged
          ? PsdSource::channel_average(PsdSource::iterative(cfg.wpe.context))
          : PsdSource::ref_channel_of(PsdSource::iterative(cfg.wpe.context),
                                      0);

  const DelayedStack stack =
      build_delayed_stack(both, cfg.wpe.delay, cfg.wpe.lp_order);
  Spectrogram z = both;
  for (int it = 0; it < cfg.wpe.iterations; ++it) {
    const PsdEstimate lambda =
        provide_psd(lambda_source, z, cfg.wpe.psd_floor);
    const Correlations corr =
        compute_correlations(stack, both, lambda, cfg.wpe.num_threads);
    const LpFilterBank filters = solve_filters(
        corr, cfg.wpe.diag_load, cfg.wpe.lp_order, nullptr,
        cfg.wpe.num_threads);
    z = apply_filters(both, stack, filters);
  }

  // Only the actual channel's output leaves the system.
  return istft(z.extract_channel(0),
               static_cast<int>(x1.num_samples()));
}

double loss_freq(const Spectrogram& a, const Spectrogram& b, double alpha,
                 double beta) {
  if (a.frames != b.frames || a.bins != b.bins || a.channels != b.channels)
    throw std::invalid_argument("loss_freq: shape mismatch");
  const std::size_t n = a.data.size();
  if (n == 0) throw std::invalid_argument("loss_freq: empty spectrogram");

  constexpr double kMagFloor = 1e-10;
  double mse_re = 0.0, mse_im = 0.0, mse_logmag = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Complex va = a.data[i], vb = b.data[i];
    const double dr = va.real() - vb.real();
    const double di = va.imag() - vb.imag();
    mse_re += dr * dr;
    mse_im += di * di;
    const double la = std::log(std::max(std::abs(va), kMagFloor));
    const double lb = std::log(std::max(std::abs(vb), kMagFloor));
    mse_logmag += (la - lb) * (la - lb);
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  return alpha * (mse_re * inv_n + mse_im * inv_n) +
         beta * mse_logmag * inv_n;
}

double loss_total(const Spectrogram& a, const Spectrogram& b,
                  const Waveform& a_time, const Waveform& b_time,
                  double alpha, double beta, double gamma) {
  a_time.check_consistent();
  b_time.check_consistent();
  if (a_time.num_channels() != b_time.num_channels() ||
      a_time.num_samples() != b_time.num_samples())
    throw std::invalid_argument("loss_total: time-domain length mismatch");

  double mae = 0.0;
  std::size_t count = 0;
  for (int d = 0; d < a_time.num_channels(); ++d) {
    for (std::size_t i = 0; i < a_time.num_samples(); ++i) {
      mae += std::fabs(a_time.channels[d][i] - b_time.channels[d][i]);
      ++count;
    }
  }
  mae /= static_cast<double>(count);
  return loss_freq(a, b, alpha, beta) + gamma * mae;
}

std::span<const CurriculumStage> default_lp_order_schedule() {
  static constexpr CurriculumStage kSchedule[] = {
      {15, 9}, {25, 12}, {35, 15}, {44, 18}, {52, 21}};
  return kSchedule;
}

int lp_order_curriculum(int epoch, std::span<const CurriculumStage> schedule,
                        Rng& rng) {
  if (schedule.empty())
    throw std::invalid_argument("curriculum: empty schedule");
  if (epoch < 0) throw std::invalid_argument("curriculum: negative epoch");
  constexpr int kLower = 4;
  int upper = 6;
  for (const auto& stage : schedule)
    if (epoch > stage.after_epoch) upper = stage.upper;
  return static_cast<int>(rng.uniform_int(kLower, upper));
}

}  // namespace derev
