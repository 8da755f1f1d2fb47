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
#include <vector>

#include "derev/types.hpp"

namespace derev {

// Intrusive objective quality metrics, computed against the early-arriving
// reference signal. All metrics use 25 ms frames with a 10 ms hop (segSRR:
// non-overlapping 25 ms segments), LPC order 10, and skip frames whose
// reference energy is below -60 dBFS. Multichannel inputs are evaluated on
// channel 0.

struct MetricsReport {
  double cd = 0.0;        // cepstrum distance, dB; lower is better
  double llr = 0.0;       // log-likelihood ratio; lower is better
  double fwsegsnr = 0.0;  // frequency-weighted segmental SNR, dB; higher is better
  double segsrr = 0.0;    // segmental signal-to-reverberation ratio, dB; higher is better
};

/// LPC-cepstrum distance, mean over active frames of
/// 10/ln(10) * sqrt((dc0)^2 + 2 * sum_k (dc_k)^2), where c_k come from the
/// order-10 all-pole model and c0 = ln(residual energy).
double cepstral_distance(const Waveform& ref, const Waveform& deg);

/// Log-likelihood ratio ln(a_d R_r a_d^T / a_r R_r a_r^T) per frame with the
/// reference autocorrelation matrix; mean of the smallest 95% of frames.
double llr(const Waveform& ref, const Waveform& deg);

/// Mel-band (23 bands) magnitude-weighted segmental SNR, band weights
/// |ref band magnitude|^0.2, per-band SNR clipped to [-10, 35] dB.
double fwsegsnr(const Waveform& ref, const Waveform& deg);

/// Segmental 10 log10(||early||^2 / ||deg - early||^2) over non-overlapping
/// 25 ms segments, clipped to [-10, 35] dB; silent early segments skipped.
double segsrr(const Waveform& early_ref, const Waveform& deg);

MetricsReport evaluate_all(const Waveform& ref, const Waveform& deg);

/// Corpus aggregate: the arithmetic mean of per-utterance values.
MetricsReport mean_report(std::span<const MetricsReport> reports);

}  // namespace derev
