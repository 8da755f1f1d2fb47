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

#include "derev/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <mutex>
#include <stdexcept>

namespace derev {

namespace {
// The FFTW planner is not thread-safe; plan creation and destruction are
// serialized behind this mutex. Plan execution on private buffers is safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

RealFft::RealFft(int size) : size_(size) {
  if (size < 2) throw std::invalid_argument("RealFft: size must be >= 2");
  real_buf_ = fftw_alloc_real(size_);
  auto* cbuf = fftw_alloc_complex(size_ / 2 + 1);
  complex_buf_ = cbuf;
  std::lock_guard<std::mutex> lock(planner_mutex());
  plan_fwd_ = fftw_plan_dft_r2c_1d(size_, real_buf_, cbuf, FFTW_ESTIMATE);
  plan_inv_ = fftw_plan_dft_c2r_1d(size_, cbuf, real_buf_, FFTW_ESTIMATE);
  if (plan_fwd_ == nullptr || plan_inv_ == nullptr)
    throw std::runtime_error("RealFft: plan creation failed");
}

RealFft::~RealFft() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
  fftw_free(real_buf_);
  fftw_free(complex_buf_);
}

void RealFft::forward(const double* in, Complex* out) {
  std::memcpy(real_buf_, in, sizeof(double) * size_);
  fftw_execute(static_cast<fftw_plan>(plan_fwd_));
  const auto* cbuf = static_cast<fftw_complex*>(complex_buf_);
  for (int k = 0; k < num_bins(); ++k) out[k] = Complex(cbuf[k][0], cbuf[k][1]);
}

void RealFft::inverse(const Complex* in, double* out) {
  auto* cbuf = static_cast<fftw_complex*>(complex_buf_);
  for (int k = 0; k < num_bins(); ++k) {
    cbuf[k][0] = in[k].real();
    cbuf[k][1] = in[k].imag();
  }
  fftw_execute(static_cast<fftw_plan>(plan_inv_));
  const double scale = 1.0 / size_;
  for (int n = 0; n < size_; ++n) out[n] = real_buf_[n] * scale;
}

std::vector<double> fft_convolve(const std::vector<double>& x,
                                 const std::vector<double>& h) {
  if (x.empty() || h.empty())
    throw std::invalid_argument("fft_convolve: empty input");
  const std::size_t full = x.size() + h.size() - 1;
  std::size_t n = 1;
  while (n < full) n <<= 1;
  n = std::max<std::size_t>(n, 2);

  RealFft fft(static_cast<int>(n));
  std::vector<double> xa(n, 0.0), ha(n, 0.0);
  std::copy(x.begin(), x.end(), xa.begin());
  std::copy(h.begin(), h.end(), ha.begin());
  std::vector<Complex> xf(fft.num_bins()), hf(fft.num_bins());
  fft.forward(xa.data(), xf.data());
  fft.forward(ha.data(), hf.data());
  for (int k = 0; k < fft.num_bins(); ++k) xf[k] *= hf[k];
  std::vector<double> out(n, 0.0);
  fft.inverse(xf.data(), out.data());
  out.resize(full);
  return out;
}

}  // namespace derev
