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

#include "derev/wpe.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <thread>

namespace derev {

namespace {

using MatrixXc =
    Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using VectorXc = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;

// Runs fn(index) for every index in [0, count) on up to `threads` workers.
// Each index writes disjoint output, so results do not depend on scheduling.
void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  int n_threads = threads > 0
                      ? threads
                      : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::clamp(n_threads, 1, std::max(1, count));
  if (n_threads == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (int w = 0; w < n_threads; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i < count; i += n_threads) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

void WpeConfig::validate() const {
  if (lp_order < 1) throw std::invalid_argument("wpe: lp_order must be >= 1");
  if (delay < 1) throw std::invalid_argument("wpe: delay must be >= 1");
  if (context < 0) throw std::invalid_argument("wpe: context must be >= 0");
  if (iterations < 1)
    throw std::invalid_argument("wpe: iterations must be >= 1");
  if (diag_load < 0.0)
    throw std::invalid_argument("wpe: diag_load must be >= 0");
  if (psd_floor <= 0.0)
    throw std::invalid_argument("wpe: psd_floor must be > 0");
}

DelayedStack build_delayed_stack(const Spectrogram& x, int delay,
                                 int lp_order) {
  if (delay < 1 || lp_order < 1)
    throw std::invalid_argument("delayed stack: delay/lp_order must be >= 1");
  if (x.frames <= delay)
    throw std::invalid_argument("delayed stack: too few frames for delay");

  DelayedStack stack;
  stack.frames = x.frames;
  stack.bins = x.bins;
  stack.channels = x.channels;
  stack.lp_order = lp_order;
  stack.delay = delay;
  stack.dim = x.channels * lp_order;
  stack.data.assign(
      static_cast<std::size_t>(x.frames) * x.bins * stack.dim,
      Complex(0.0, 0.0));

  for (int t = 0; t < x.frames; ++t) {
    for (int tau = delay; tau < delay + lp_order; ++tau) {
      const int src = t - tau;
      if (src < 0) continue;  // causal zero padding
      const int block = (tau - delay) * x.channels;
      for (int f = 0; f < x.bins; ++f) {
        const Complex* src_cell = x.cell(src, f);
        Complex* dst =
            stack.data.data() +
            (static_cast<std::size_t>(t) * x.bins + f) * stack.dim + block;
        for (int d = 0; d < x.channels; ++d) dst[d] = src_cell[d];
      }
    }
  }
  return stack;
}

Tensor3 per_channel_context_power(const Spectrogram& z, int context) {
  if (context < 0) throw std::invalid_argument("context must be >= 0");
  Tensor3 out(z.frames, z.bins, z.channels);
  for (int t = 0; t < z.frames; ++t) {
    const int lo = std::max(0, t - context);
    const int hi = std::min(z.frames - 1, t + context);
    const double inv_count = 1.0 / (hi - lo + 1);
    for (int f = 0; f < z.bins; ++f) {
      for (int d = 0; d < z.channels; ++d) {
        double acc = 0.0;
        for (int tt = lo; tt <= hi; ++tt) {
          const Complex v = z.at(tt, f, d);
          acc += v.real() * v.real() + v.imag() * v.imag();
        }
        out.at(t, f, d) = acc * inv_count;
      }
    }
  }
  return out;
}

PsdEstimate psd_context_avg(const Spectrogram& z, int context, double floor) {
  const Tensor3 power = per_channel_context_power(z, context);
  PsdEstimate lambda(z.frames, z.bins);
  const double inv_d = 1.0 / z.channels;
  for (int t = 0; t < z.frames; ++t)
    for (int f = 0; f < z.bins; ++f) {
      double acc = 0.0;
      for (int d = 0; d < z.channels; ++d) acc += power.at(t, f, d);
      lambda.at(t, f) = std::max(floor, acc * inv_d);
    }
  return lambda;
}

Correlations compute_correlations(const DelayedStack& stack,
                                  const Spectrogram& x,
                                  const PsdEstimate& lambda,
                                  int num_threads) {
  if (stack.frames != x.frames || stack.bins != x.bins ||
      stack.channels != x.channels)
    throw std::invalid_argument("correlations: stack/spectrogram mismatch");
  if (lambda.frames != x.frames || lambda.bins != x.bins)
    throw std::invalid_argument("correlations: lambda shape mismatch");
  for (double v : lambda.data)
    if (!std::isfinite(v) || v <= 0.0)
      throw std::invalid_argument("correlations: lambda must be finite > 0");

  const int dim = stack.dim;
  const int d_count = x.channels;
  Correlations corr;
  corr.bins = x.bins;
  corr.dim = dim;
  corr.channels = d_count;
  corr.r.assign(static_cast<std::size_t>(x.bins) * dim * dim,
                Complex(0.0, 0.0));
  corr.p.assign(static_cast<std::size_t>(x.bins) * dim * d_count,
                Complex(0.0, 0.0));

  parallel_for(x.bins, num_threads, [&](int f) {
    MatrixXc r = MatrixXc::Zero(dim, dim);
    MatrixXc p = MatrixXc::Zero(dim, d_count);
    for (int t = 0; t < x.frames; ++t) {
      const double w = 1.0 / lambda.at(t, f);
      Eigen::Map<const VectorXc> xt(stack.row(t, f), dim);
      Eigen::Map<const VectorXc> cur(x.cell(t, f), d_count);
      r.selfadjointView<Eigen::Lower>().rankUpdate(xt, w);
      p.noalias() += w * (xt * cur.adjoint());
    }
    // Mirror the lower triangle; R is Hermitian by construction.
    r.triangularView<Eigen::StrictlyUpper>() = r.adjoint();
    std::copy(r.data(), r.data() + static_cast<std::size_t>(dim) * dim,
              corr.r.begin() + static_cast<std::size_t>(f) * dim * dim);
    std::copy(p.data(), p.data() + static_cast<std::size_t>(dim) * d_count,
              corr.p.begin() + static_cast<std::size_t>(f) * dim * d_count);
  });
  return corr;
}

LpFilterBank solve_filters(const Correlations& corr, double diag_load,
                           int lp_order, std::vector<int>* failed_bins,
                           int num_threads) {
  if (lp_order < 1) throw std::invalid_argument("solve: lp_order must be >= 1");
  const int dim = corr.dim;
  const int d_count = corr.channels;
  LpFilterBank bank(corr.bins, dim, d_count);
  std::vector<char> failed(corr.bins, 0);

  parallel_for(corr.bins, num_threads, [&](int f) {
    Eigen::Map<const MatrixXc> r(
        corr.r.data() + static_cast<std::size_t>(f) * dim * dim, dim, dim);
    Eigen::Map<const MatrixXc> p(
        corr.p.data() + static_cast<std::size_t>(f) * dim * d_count, dim,
        d_count);
    Eigen::Map<MatrixXc> g(
        bank.data.data() + static_cast<std::size_t>(f) * dim * d_count, dim,
        d_count);

    const double p_norm = p.norm();
    if (p_norm == 0.0) {
      g.setZero();
      return;
    }
    // Relative loading scaled by tr(R)/K so that an all-zero channel leaves
    // the loaded system of the remaining channels unchanged.
    const double eps = diag_load * r.trace().real() / lp_order;
    MatrixXc reg = r;
    reg.diagonal().array() += eps;
    Eigen::LDLT<MatrixXc> ldlt(reg);
    bool ok = ldlt.info() == Eigen::Success;
    if (ok) {
      g = ldlt.solve(p);
      ok = g.allFinite() && (reg * g - p).norm() <= 1e-8 * p_norm;
    }
    if (!ok) {
      g.setZero();
      failed[f] = 1;
    }
  });

  if (failed_bins != nullptr) {
    failed_bins->clear();
    for (int f = 0; f < corr.bins; ++f)
      if (failed[f]) failed_bins->push_back(f);
  }
  return bank;
}

Spectrogram apply_filters(const Spectrogram& x, const DelayedStack& stack,
                          const LpFilterBank& filters) {
  if (stack.frames != x.frames || stack.bins != x.bins ||
      filters.bins != x.bins || filters.dim != stack.dim ||
      filters.channels != x.channels)
    throw std::invalid_argument("apply_filters: shape mismatch");

  Spectrogram z(x.frames, x.bins, x.channels, x.config);
  for (int t = 0; t < x.frames; ++t) {
    for (int f = 0; f < x.bins; ++f) {
      const Complex* xt = stack.row(t, f);
      const Complex* cur = x.cell(t, f);
      Complex* out = z.cell(t, f);
      for (int d = 0; d < x.channels; ++d) {
        Complex pred(0.0, 0.0);
        for (int i = 0; i < stack.dim; ++i)
          pred += std::conj(filters.at(f, i, d)) * xt[i];
        out[d] = cur[d] - pred;
      }
    }
  }
  return z;
}

WpeResult wpe_iterative(const Spectrogram& x, const WpeConfig& cfg) {
  cfg.validate();
  if (x.frames <= cfg.delay + cfg.lp_order)
    throw std::invalid_argument("wpe: too few frames for delay + lp_order");

  const DelayedStack stack = build_delayed_stack(x, cfg.delay, cfg.lp_order);
  WpeResult result;
  result.dereverberated = x;  // Z initialized to X
  for (int it = 0; it < cfg.iterations; ++it) {
    const PsdEstimate lambda =
        psd_context_avg(result.dereverberated, cfg.context, cfg.psd_floor);
    const Correlations corr =
        compute_correlations(stack, x, lambda, cfg.num_threads);
    result.filters = solve_filters(corr, cfg.diag_load, cfg.lp_order,
                                   &result.failed_bins, cfg.num_threads);
    result.dereverberated = apply_filters(x, stack, result.filters);
  }
  return result;
}

WpeResult wpe_with_psd(const Spectrogram& x, const PsdEstimate& lambda,
                       const WpeConfig& cfg) {
  cfg.validate();
  if (lambda.frames != x.frames || lambda.bins != x.bins)
    throw std::invalid_argument("wpe: lambda shape mismatch");
  if (x.frames <= cfg.delay + cfg.lp_order)
    throw std::invalid_argument("wpe: too few frames for delay + lp_order");
  for (double v : lambda.data)
    if (!std::isfinite(v) || v < 0.0)
      throw std::invalid_argument("wpe: lambda must be finite and >= 0");

  PsdEstimate floored = lambda;
  for (double& v : floored.data) v = std::max(v, cfg.psd_floor);

  const DelayedStack stack = build_delayed_stack(x, cfg.delay, cfg.lp_order);
  const Correlations corr =
      compute_correlations(stack, x, floored, cfg.num_threads);
  WpeResult result;
  result.filters = solve_filters(corr, cfg.diag_load, cfg.lp_order,
                                 &result.failed_bins, cfg.num_threads);
  result.dereverberated = apply_filters(x, stack, result.filters);
  return result;
}

}  // namespace derev
