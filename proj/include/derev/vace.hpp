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

#include <span>
#include <string>
#include <vector>

#include "derev/rng.hpp"
#include "derev/stft.hpp"
#include "derev/types.hpp"
#include "derev/wpe.hpp"

namespace derev {

// Virtual acoustic channel expansion: synthesize a second input channel from
// a single microphone signal so the dual-channel WPE algorithm applies, then
// keep only the actual channel's output. The generator variants here stand in
// for a trained virtual-signal network: a scaled copy of the input, the
// simulator's late-reverberation reference, a frame-delayed copy, or an
// arbitrary externally produced signal loaded from disk.

struct VirtualGenerator {
  enum class Kind { ScaledCopy, LateOracle, ExternalSignal, FrameDelay };

  Kind kind = Kind::ScaledCopy;
  double gain = 1.0;
  Waveform late_ref;  // LateOracle
  std::string path;   // ExternalSignal
  int frames = 0;     // FrameDelay, in STFT hops

  static VirtualGenerator scaled_copy(double gain);
  static VirtualGenerator late_oracle(Waveform late_ref, double gain = 1.0);
  static VirtualGenerator external_signal(std::string path);
  static VirtualGenerator frame_delay(int frames, double gain = 1.0);
};

enum class PsdMode {
  Averaged,    // lambda from both channels' power
  Simplified,  // lambda from the actual channel only
};

struct VaceConfig {
  WpeConfig wpe;
  PsdMode psd_mode = PsdMode::Simplified;
  StftConfig stft;

  void validate() const;
};

/// Realizes the virtual signal for observation x1; the result always has
/// exactly x1's length. ExternalSignal inputs may differ from it by at most
/// one hop and are zero-padded or trimmed at the end.
Waveform generate_virtual(const Waveform& x1, const VirtualGenerator& gen,
                          const StftConfig& cfg);

/// Full VACE-WPE pass on a single-channel observation: stacks [X1, Xv] as a
/// dual-channel spectrogram, estimates lambda per cfg.psd_mode, runs
/// cfg.wpe.iterations rounds of dual-channel WPE and returns the inverse STFT
/// of the actual channel's output. The virtual channel output is discarded.
Waveform vace_wpe(const Waveform& x1, const VirtualGenerator& gen,
                  const VaceConfig& cfg);

/// Frequency-domain distance: alpha * [MSE(Re A, Re B) + MSE(Im A, Im B)]
/// + beta * MSE(ln|A|, ln|B|), magnitudes floored at 1e-10.
double loss_freq(const Spectrogram& a, const Spectrogram& b, double alpha,
                 double beta);

/// loss_freq plus gamma * MAE(a_time, b_time).
double loss_total(const Spectrogram& a, const Spectrogram& b,
                  const Waveform& a_time, const Waveform& b_time,
                  double alpha, double beta, double gamma);

/// Named weight sets for the signal-distance losses.
struct LossWeights {
  double alpha, beta, gamma;
};
inline constexpr LossWeights kLossPretrainSelf{10.0, 0.3, 20.0};
inline constexpr LossWeights kLossPretrainLate{10.0, 0.1, 20.0};
inline constexpr LossWeights kLossFinetune{10.0, 0.1, 20.0};
inline constexpr LossWeights kLossPretrainLateNoisy{2.0, 0.05, 10.0};
inline constexpr LossWeights kLossFinetuneNoisy{1.0, 0.1, 5.0};

/// One stage of the training-order curriculum: after `after_epoch` the upper
/// bound of the LP-order draw becomes `upper`.
struct CurriculumStage {
  int after_epoch;
  int upper;
};

/// Default schedule: upper bound 6, raised to 9/12/15/18/21 after epochs
/// 15/25/35/44/52. The lower bound is fixed at 4.
std::span<const CurriculumStage> default_lp_order_schedule();

/// Uniform LP-order draw in [4, upper(epoch)] for curriculum training.
int lp_order_curriculum(int epoch, std::span<const CurriculumStage> schedule,
                        Rng& rng);

}  // namespace derev
