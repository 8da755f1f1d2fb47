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

#include <cstddef>

#include "derev/types.hpp"

namespace derev {

/// Real-input FFT of a fixed size, backed by FFTW. One instance holds its own
/// plan and scratch buffers; instances are not safe to share across threads,
/// but distinct instances are (plan creation is serialized internally).
class RealFft {
 public:
  explicit RealFft(int size);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  int size() const { return size_; }
  int num_bins() const { return size_ / 2 + 1; }

  /// `in` has size() reals, `out` receives num_bins() coefficients.
  void forward(const double* in, Complex* out);

  /// Inverse of forward, including the 1/N normalization.
  void inverse(const Complex* in, double* out);

 private:
  int size_;
  void* plan_fwd_;   // fftw_plan
  void* plan_inv_;   // fftw_plan
  double* real_buf_;
  void* complex_buf_;  // fftw_complex*
};

/// Linear convolution of x (length n) with h (length m) via zero-padded FFTs,
/// full length n + m - 1.
std::vector<double> fft_convolve(const std::vector<double>& x,
                                 const std::vector<double>& h);

}  // namespace derev
