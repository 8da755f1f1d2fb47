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

#include "derev/stft.hpp"
#include "derev/types.hpp"

namespace derev {

// Weighted prediction error dereverberation. The late reverberation in each
// frequency bin is modeled as a delayed multichannel linear prediction from
// the observed frames and subtracted:
//
//   Z_{t,f} = X_{t,f} - G_f^H Xtilde_{t-delay,f}
//
// where Xtilde stacks lp_order past frames of all channels starting `delay`
// frames back, and G_f solves per-frequency normal equations weighted by the
// inverse of the desired-signal power lambda_{t,f}.

struct WpeConfig {
  int lp_order = 10;      // prediction taps per channel (K)
  int delay = 3;          // prediction delay in frames; 3 frames ~ 50 ms
  int context = 1;        // +-frames averaged into the power estimate
  int iterations = 3;     // alternating lambda / filter updates
  double diag_load = 1e-6;   // relative diagonal loading of the normal matrix
  double psd_floor = 1e-10;  // absolute floor applied to lambda
  int num_threads = 0;       // per-frequency worker threads; 0 = auto

  void validate() const;
};

/// Stacked delayed frames: stack(t, f, (tau - delay) * D + d) =
/// X(t - tau, f, d) for tau in [delay, delay + lp_order - 1], zero where the
/// frame index would be negative. dim == channels * lp_order.
struct DelayedStack {
  std::vector<Complex> data;  // (frames, bins, dim), dim contiguous
  int frames = 0, bins = 0, dim = 0;
  int channels = 0, lp_order = 0, delay = 0;

  Complex at(int t, int f, int i) const {
    return data[(static_cast<std::size_t>(t) * bins + f) * dim + i];
  }
  const Complex* row(int t, int f) const {
    return data.data() + (static_cast<std::size_t>(t) * bins + f) * dim;
  }
};

/// Per-frequency prediction filters, shape (bins, dim, channels); column d of
/// slice f is the stacked filter predicting channel d.
struct LpFilterBank {
  std::vector<Complex> data;
  int bins = 0, dim = 0, channels = 0;

  LpFilterBank() = default;
  LpFilterBank(int f, int k, int d)
      : data(static_cast<std::size_t>(f) * k * d, Complex(0.0, 0.0)),
        bins(f), dim(k), channels(d) {}

  Complex& at(int f, int i, int d) {
    return data[(static_cast<std::size_t>(f) * dim + i) * channels + d];
  }
  Complex at(int f, int i, int d) const {
    return data[(static_cast<std::size_t>(f) * dim + i) * channels + d];
  }
};

/// Normal-equation statistics per frequency: R (dim x dim, Hermitian) and
/// P (dim x channels), both row-major per bin.
struct Correlations {
  std::vector<Complex> r;  // (bins, dim, dim)
  std::vector<Complex> p;  // (bins, dim, channels)
  int bins = 0, dim = 0, channels = 0;
};

struct WpeResult {
  Spectrogram dereverberated;
  LpFilterBank filters;
  std::vector<int> failed_bins;  // bins whose solve fell back to zero filters
};

DelayedStack build_delayed_stack(const Spectrogram& x, int delay,
                                 int lp_order);

/// Per-channel context-averaged power |Z|^2, shape (frames, bins, channels).
/// The averaging window [t - context, t + context] is truncated to valid
/// frames at the edges and the divisor is the number of frames actually
/// summed, so a constant-magnitude input maps to a constant power.
Tensor3 per_channel_context_power(const Spectrogram& z, int context);

/// Channel mean of per_channel_context_power, floored: the iterative-WPE
/// power estimate lambda_{t,f}.
PsdEstimate psd_context_avg(const Spectrogram& z, int context,
                            double floor = 1e-10);

Correlations compute_correlations(const DelayedStack& stack,
                                  const Spectrogram& x,
                                  const PsdEstimate& lambda,
                                  int num_threads = 0);

/// Solves (R_f + diag_load * tr(R_f) / lp_order * I) G_f = P_f per bin with a
/// Hermitian LDLT decomposition. A bin whose solution is non-finite or whose
/// relative residual exceeds 1e-8 falls back to zero filters and is recorded
/// in failed_bins.
LpFilterBank solve_filters(const Correlations& corr, double diag_load,
                           int lp_order,
                           std::vector<int>* failed_bins = nullptr,
                           int num_threads = 0);

Spectrogram apply_filters(const Spectrogram& x, const DelayedStack& stack,
                          const LpFilterBank& filters);

/// Classic iterative WPE: alternates psd_context_avg, compute_correlations,
/// solve_filters and apply_filters for cfg.iterations rounds, starting from
/// Z = X. Returns the final dereverberated spectrogram (all channels) and the
/// final filter bank.
WpeResult wpe_iterative(const Spectrogram& x, const WpeConfig& cfg);

/// Single-pass WPE with an externally supplied power estimate (floored to
/// cfg.psd_floor); no iteration.
WpeResult wpe_with_psd(const Spectrogram& x, const PsdEstimate& lambda,
                       const WpeConfig& cfg);

}  // namespace derev
