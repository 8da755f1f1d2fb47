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

#include "derev/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "derev/fft.hpp"
#include "derev/stft.hpp"

namespace derev {

namespace {

constexpr int kLpcOrder = 10;
constexpr double kFrameSec = 0.025;
constexpr double kHopSec = 0.010;
constexpr double kSilenceGateDb = -60.0;  // frame gate on the reference
constexpr double kClipLoDb = -10.0;
constexpr double kClipHiDb = 35.0;

struct FramePair {
  const double* ref;
  const double* deg;
  int len;
};

const std::vector<double>& pick_channel(const Waveform& w) {
  w.check_consistent();
  return w.channels[0];
}

void check_pair(const Waveform& ref, const Waveform& deg) {
  if (ref.sample_rate != deg.sample_rate)
    throw std::invalid_argument("metrics: sample rate mismatch");
  if (pick_channel(ref).size() != pick_channel(deg).size())
    throw std::invalid_argument("metrics: length mismatch");
}

bool frame_active(const double* x, int len) {
  double ms = 0.0;
  for (int i = 0; i < len; ++i) ms += x[i] * x[i];
  ms /= len;
  return 10.0 * std::log10(ms + 1e-30) > kSilenceGateDb;
}

/// Active 25 ms / 10 ms frames of the pair, gated on reference energy.
std::vector<FramePair> active_frames(const Waveform& ref,
                                     const Waveform& deg) {
  check_pair(ref, deg);
  const auto& r = pick_channel(ref);
  const auto& d = pick_channel(deg);
  const int frame = static_cast<int>(std::lround(kFrameSec * ref.sample_rate));
  const int hop = static_cast<int>(std::lround(kHopSec * ref.sample_rate));
  if (r.size() < static_cast<std::size_t>(frame))
    throw std::invalid_argument("metrics: input shorter than one frame");

  std::vector<FramePair> out;
  for (std::size_t start = 0; start + frame <= r.size(); start += hop) {
    if (!frame_active(r.data() + start, frame)) continue;
    out.push_back({r.data() + start, d.data() + start, frame});
  }
  if (out.empty())
    throw std::invalid_argument("metrics: all frames below silence gate");
  return out;
}

struct LpcModel {
  std::vector<double> a;  // a[0] = 1
  std::vector<double> r;  // autocorrelation, r[0..order]
  double err = 0.0;       // residual energy
  bool ok = false;
};

LpcModel lpc_analyze(const double* x, int len, const std::vector<double>& win,
                     int order) {
  LpcModel m;
  std::vector<double> w(len);
  for (int i = 0; i < len; ++i) w[i] = x[i] * win[i];

  m.r.assign(order + 1, 0.0);
  for (int k = 0; k <= order; ++k)
    for (int i = 0; i + k < len; ++i) m.r[k] += w[i] * w[i + k];
  if (m.r[0] <= 0.0) return m;

  // Levinson-Durbin recursion.
  m.a.assign(order + 1, 0.0);
  m.a[0] = 1.0;
  double err = m.r[0];
  std::vector<double> prev(order + 1, 0.0);
  for (int i = 1; i <= order; ++i) {
    double acc = m.r[i];
    for (int j = 1; j < i; ++j) acc += m.a[j] * m.r[i - j];
    const double k = -acc / err;
    prev = m.a;
    m.a[i] = k;
    for (int j = 1; j < i; ++j) m.a[j] = prev[j] + k * prev[i - j];
    err *= 1.0 - k * k;
    if (err <= 0.0) return m;
  }
  m.err = err;
  m.ok = true;
  return m;
}

/// Cepstrum of the all-pole model 1/A(z) with c0 = ln(residual energy).
std::vector<double> lpc_cepstrum(const LpcModel& m, int order) {
  std::vector<double> c(order + 1, 0.0);
  c[0] = std::log(m.err);
  for (int k = 1; k <= order; ++k) {
    double acc = -m.a[k];
    for (int j = 1; j < k; ++j)
      acc -= (static_cast<double>(j) / k) * c[j] * m.a[k - j];
    c[k] = acc;
  }
  return c;
}

/// Quadratic form a^T R a with the Toeplitz autocorrelation matrix R.
double toeplitz_quadratic(const std::vector<double>& a,
                          const std::vector<double>& r) {
  const int n = static_cast<int>(a.size());
  double acc = 0.0;
  for (int k = 0; k < n; ++k) {
    double cross = 0.0;
    for (int i = 0; i + k < n; ++i) cross += a[i] * a[i + k];
    acc += (k == 0 ? 1.0 : 2.0) * r[k] * cross;
  }
  return acc;
}

double clip_db(double v) { return std::clamp(v, kClipLoDb, kClipHiDb); }

/// Triangular mel filterbank on the power spectrum, `bands` filters between
/// 0 Hz and fs/2.
std::vector<std::vector<double>> mel_filterbank(int bands, int bins, int fs,
                                                int fft_size) {
  auto hz_to_mel = [](double hz) {
    return 2595.0 * std::log10(1.0 + hz / 700.0);
  };
  auto mel_to_hz = [](double mel) {
    return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
  };
  const double mel_hi = hz_to_mel(fs / 2.0);
  std::vector<double> edges(bands + 2);
  for (int i = 0; i < bands + 2; ++i)
    edges[i] = mel_to_hz(mel_hi * i / (bands + 1));

  std::vector<std::vector<double>> fb(bands, std::vector<double>(bins, 0.0));
  for (int b = 0; b < bands; ++b) {
    const double lo = edges[b], mid = edges[b + 1], hi = edges[b + 2];
    for (int k = 0; k < bins; ++k) {
      const double hz = static_cast<double>(k) * fs / fft_size;
      if (hz <= lo || hz >= hi) continue;
      fb[b][k] = hz <= mid ? (hz - lo) / (mid - lo) : (hi - hz) / (hi - mid);
    }
  }
  return fb;
}

}  // namespace

double cepstral_distance(const Waveform& ref, const Waveform& deg) {
  const auto frames = active_frames(ref, deg);
  const std::vector<double> win = hann_window(frames.front().len);

  double total = 0.0;
  long count = 0;
  for (const auto& fr : frames) {
    const LpcModel mr = lpc_analyze(fr.ref, fr.len, win, kLpcOrder);
    const LpcModel md = lpc_analyze(fr.deg, fr.len, win, kLpcOrder);
    if (!mr.ok || !md.ok) continue;
    const std::vector<double> cr = lpc_cepstrum(mr, kLpcOrder);
    const std::vector<double> cd = lpc_cepstrum(md, kLpcOrder);
    double acc = (cr[0] - cd[0]) * (cr[0] - cd[0]);
    for (int k = 1; k <= kLpcOrder; ++k)
      acc += 2.0 * (cr[k] - cd[k]) * (cr[k] - cd[k]);
    total += 10.0 / std::log(10.0) * std::sqrt(acc);
    ++count;
  }
  if (count == 0)
    throw std::invalid_argument("cepstral_distance: no analyzable frames");
  return total / count;
}

double llr(const Waveform& ref, const Waveform& deg) {
  const auto frames = active_frames(ref, deg);
  const std::vector<double> win = hann_window(frames.front().len);

  std::vector<double> values;
  values.reserve(frames.size());
  for (const auto& fr : frames) {
    const LpcModel mr = lpc_analyze(fr.ref, fr.len, win, kLpcOrder);
    const LpcModel md = lpc_analyze(fr.deg, fr.len, win, kLpcOrder);
    if (!mr.ok || !md.ok) continue;  // degenerate frame skipped
    const double num = toeplitz_quadratic(md.a, mr.r);
    const double den = toeplitz_quadratic(mr.a, mr.r);
    if (!(num > 0.0) || !(den > 0.0)) continue;
    values.push_back(std::log(num / den));
  }
  if (values.empty())
    throw std::invalid_argument("llr: no analyzable frames");

  // Mean of the smallest 95% of frames.
  std::sort(values.begin(), values.end());
  const std::size_t keep = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(values.size() * 0.95)));
  double total = 0.0;
  for (std::size_t i = 0; i < keep; ++i) total += values[i];
  return total / static_cast<double>(keep);
}

double fwsegsnr(const Waveform& ref, const Waveform& deg) {
  const auto frames = active_frames(ref, deg);
  const int frame_len = frames.front().len;
  const std::vector<double> win = hann_window(frame_len);

  int fft_size = 1;
  while (fft_size < frame_len) fft_size <<= 1;
  RealFft fft(fft_size);
  const int bins = fft.num_bins();

  constexpr int kBands = 23;
  constexpr double kWeightExp = 0.2;
  const auto fb = mel_filterbank(kBands, bins, ref.sample_rate, fft_size);

  std::vector<double> buf(fft_size, 0.0);
  std::vector<Complex> spec_r(bins), spec_d(bins);
  std::vector<double> pow_r(bins), pow_d(bins);

  double total = 0.0;
  long count = 0;
  for (const auto& fr : frames) {
    for (int i = 0; i < frame_len; ++i) buf[i] = fr.ref[i] * win[i];
    std::fill(buf.begin() + frame_len, buf.end(), 0.0);
    fft.forward(buf.data(), spec_r.data());
    for (int i = 0; i < frame_len; ++i) buf[i] = fr.deg[i] * win[i];
    std::fill(buf.begin() + frame_len, buf.end(), 0.0);
    fft.forward(buf.data(), spec_d.data());
    for (int k = 0; k < bins; ++k) {
      pow_r[k] = std::norm(spec_r[k]);
      pow_d[k] = std::norm(spec_d[k]);
    }

    double num = 0.0, den = 0.0;
    for (int b = 0; b < kBands; ++b) {
      double er = 0.0, ed = 0.0;
      for (int k = 0; k < bins; ++k) {
        er += fb[b][k] * pow_r[k];
        ed += fb[b][k] * pow_d[k];
      }
      const double mag_r = std::sqrt(er);
      const double mag_d = std::sqrt(ed);
      const double diff = (mag_r - mag_d) * (mag_r - mag_d);
      const double snr =
          clip_db(10.0 * std::log10(er / (diff + 1e-20) + 1e-20));
      const double weight = std::pow(mag_r + 1e-20, kWeightExp);
      num += weight * snr;
      den += weight;
    }
    if (den <= 0.0) continue;
    total += num / den;
    ++count;
  }
  if (count == 0) throw std::invalid_argument("fwsegsnr: no analyzable frames");
  return total / count;
}

double segsrr(const Waveform& early_ref, const Waveform& deg) {
  check_pair(early_ref, deg);
  const auto& e = pick_channel(early_ref);
  const auto& d = pick_channel(deg);
  const int seg = static_cast<int>(std::lround(kFrameSec *
                                               early_ref.sample_rate));
  if (e.size() < static_cast<std::size_t>(seg))
    throw std::invalid_argument("segsrr: input shorter than one segment");

  double total = 0.0;
  long count = 0;
  for (std::size_t start = 0; start + seg <= e.size(); start += seg) {
    if (!frame_active(e.data() + start, seg)) continue;  // silent segment
    double se = 0.0, sd = 0.0;
    for (int i = 0; i < seg; ++i) {
      const double ev = e[start + i];
      const double dv = d[start + i] - ev;
      se += ev * ev;
      sd += dv * dv;
    }
    total += clip_db(10.0 * std::log10(se / (sd + 1e-20) + 1e-20));
    ++count;
  }
  if (count == 0)
    throw std::invalid_argument("segsrr: all segments silent");
  return total / count;
}

MetricsReport evaluate_all(const Waveform& ref, const Waveform& deg) {
  MetricsReport rep;
  rep.cd = cepstral_distance(ref, deg);
  rep.llr = llr(ref, deg);
  rep.fwsegsnr = fwsegsnr(ref, deg);
  rep.segsrr = segsrr(ref, deg);
  return rep;
}

MetricsReport mean_report(std::span<const MetricsReport> reports) {
  if (reports.empty())
    throw std::invalid_argument("mean_report: empty corpus");
  MetricsReport m;
  for (const auto& r : reports) {
    m.cd += r.cd;
    m.llr += r.llr;
    m.fwsegsnr += r.fwsegsnr;
    m.segsrr += r.segsrr;
  }
  const double n = static_cast<double>(reports.size());
  m.cd /= n;
  m.llr /= n;
  m.fwsegsnr /= n;
  m.segsrr /= n;
  return m;
}

}  // namespace derev
