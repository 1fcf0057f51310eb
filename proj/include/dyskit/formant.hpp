// Copyright 2026 The Dyskit Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DYSKIT_FORMANT_HPP_
#define DYSKIT_FORMANT_HPP_

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "dyskit/common.hpp"
#include "dyskit/wav.hpp"

namespace dyskit::signal {

inline constexpr double kMaxFormantMaleHz = 5000.0;
inline constexpr double kMaxFormantFemaleHz = 5500.0;
inline constexpr double kFormantBandwidthLimitHz = 400.0;

struct FormantEstimate {
  double f1 = 0.0;
  double f2 = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;
  bool confident = false;
};

namespace detail {

// Windowed-sinc resampler (Hann window, 16 zero crossings per side).
inline std::vector<double> resample(const std::vector<double>& x, int sr_in,
                                    int sr_out) {
  if (sr_in == sr_out) return x;
  const double ratio = static_cast<double>(sr_out) / sr_in;
  const double cutoff = 0.45 * std::min(sr_in, sr_out);  // Hz
  const double fc = cutoff / sr_in;                      // cycles/sample (input)
  const int half_width = 16;
  const size_t n_out = static_cast<size_t>(std::floor(x.size() * ratio));
  std::vector<double> y(n_out, 0.0);
  const double span = half_width / (2.0 * fc);
  for (size_t i = 0; i < n_out; ++i) {
    const double center = i / ratio;
    const int lo = std::max(0, static_cast<int>(std::ceil(center - span)));
    const int hi =
        std::min(static_cast<int>(x.size()) - 1, static_cast<int>(std::floor(center + span)));
    double acc = 0.0;
    for (int k = lo; k <= hi; ++k) {
      const double t = k - center;
      double s;
      if (std::fabs(t) < 1e-12) {
        s = 2.0 * fc;
      } else {
        s = std::sin(2.0 * M_PI * fc * t) / (M_PI * t);
      }
      const double w = 0.5 + 0.5 * std::cos(M_PI * t / span);
      acc += x[k] * s * w;
    }
    y[i] = acc;
  }
  return y;
}

// Levinson-Durbin solve of the autocorrelation normal equations.
// Returns LP coefficients a[1..p] with the convention
// x[n] ~ -sum_k a[k] x[n-k]; a[0] = 1.
inline std::vector<double> lpc_autocorrelation(const std::vector<double>& x, int order) {
  std::vector<double> r(order + 1, 0.0);
  const int n = static_cast<int>(x.size());
  for (int lag = 0; lag <= order; ++lag) {
    double s = 0.0;
    for (int t = 0; t + lag < n; ++t) s += x[t] * x[t + lag];
    r[lag] = s;
  }
  std::vector<double> a(order + 1, 0.0);
  a[0] = 1.0;
  double err = r[0];
  if (err <= 0.0) return a;
  for (int i = 1; i <= order; ++i) {
    double acc = r[i];
    for (int j = 1; j < i; ++j) acc += a[j] * r[i - j];
    const double k = -acc / err;
    std::vector<double> na = a;
    for (int j = 1; j < i; ++j) na[j] = a[j] + k * a[i - j];
    na[i] = k;
    a = std::move(na);
    err *= (1.0 - k * k);
    if (err <= 0.0) break;
  }
  return a;
}

// Durand-Kerner simultaneous root iteration for a monic real polynomial
// z^p + c[1] z^(p-1) + ... + c[p].
inline std::vector<std::complex<double>> polynomial_roots(const std::vector<double>& c) {
  const int p = static_cast<int>(c.size()) - 1;
  if (p <= 0) return {};
  auto eval = [&](std::complex<double> z) {
    std::complex<double> v(1.0, 0.0);
    for (int i = 1; i <= p; ++i) v = v * z + c[i];
    return v;
  };
  std::vector<std::complex<double>> roots(p);
  const std::complex<double> seed(0.4, 0.9);
  std::complex<double> acc(1.0, 0.0);
  for (int i = 0; i < p; ++i) {
    acc *= seed;
    roots[i] = acc;
  }
  for (int iter = 0; iter < 500; ++iter) {
    double move = 0.0;
    for (int i = 0; i < p; ++i) {
      std::complex<double> denom(1.0, 0.0);
      for (int j = 0; j < p; ++j) {
        if (j != i) denom *= (roots[i] - roots[j]);
      }
      if (std::abs(denom) < 1e-300) denom = 1e-300;
      const std::complex<double> delta = eval(roots[i]) / denom;
      roots[i] -= delta;
      move = std::max(move, std::abs(delta));
    }
    if (move < 1e-13) break;
  }
  return roots;
}

}  // namespace detail

namespace detail {

struct FormantCandidate {
  double freq, bw;
};

// LP analysis of one window: pre-emphasis, Hann window, autocorrelation LPC,
// roots to (frequency, bandwidth) candidates sorted by frequency.
inline std::vector<FormantCandidate> lp_candidates(std::vector<double> x,
                                                   int sample_rate, int order,
                                                   double max_formant_hz) {
  const double pre = std::exp(-2.0 * M_PI * 50.0 / sample_rate);
  for (size_t i = x.size() - 1; i >= 1; --i) x[i] -= pre * x[i - 1];
  for (size_t i = 0; i < x.size(); ++i) {
    x[i] *= 0.5 - 0.5 * std::cos(2.0 * M_PI * i / (x.size() - 1));
  }
  std::vector<double> a = lpc_autocorrelation(x, order);
  std::vector<std::complex<double>> roots = polynomial_roots(a);

  std::vector<FormantCandidate> out;
  for (const auto& z : roots) {
    if (z.imag() <= 0.0) continue;
    const double mag = std::abs(z);
    if (mag >= 1.0 || mag < 1e-6) continue;
    const double freq = std::atan2(z.imag(), z.real()) / (2.0 * M_PI) * sample_rate;
    const double bw = -std::log(mag) * sample_rate / M_PI;
    if (freq < 50.0 || freq > max_formant_hz - 50.0) continue;
    out.push_back({freq, bw});
  }
  std::sort(out.begin(), out.end(),
            [](const FormantCandidate& l, const FormantCandidate& r) {
              return l.freq < r.freq;
            });
  return out;
}

inline std::vector<FormantCandidate> narrow_candidates(
    const std::vector<FormantCandidate>& all) {
  std::vector<FormantCandidate> out;
  for (const auto& c : all) {
    if (c.bw < kFormantBandwidthLimitHz) out.push_back(c);
  }
  return out;
}

}  // namespace detail

// LP-based formant estimate around the center of [t0, t1].
// The segment is resampled to 2*max_formant_hz and fit with an LP model of
// order 2*n_formants + 2 on two overlapping center windows; stable complex
// roots map to (frequency, bandwidth) pairs and the two lowest formants with
// bandwidth below 400 Hz are returned. The estimate is flagged low
// confidence when either window lacks two narrow-band roots or the windows
// disagree (an aperiodic segment produces unstable roots across windows).
inline FormantEstimate formants(const AudioBuffer& buf, double t0, double t1,
                                double max_formant_hz = kMaxFormantMaleHz,
                                int n_formants = 5) {
  const int sr = buf.sample_rate;
  const int n = static_cast<int>(buf.samples.size());
  if (t0 < 0.0 || t1 <= t0 || t1 > buf.duration() + 1e-9) {
    throw DataError("formants: segment outside buffer");
  }
  const int target_sr = static_cast<int>(std::lround(2.0 * max_formant_hz));
  if (sr < target_sr) throw DataError("formants: sample rate below 2*max_formant_hz");

  int s0 = std::max(0, static_cast<int>(std::lround(t0 * sr)));
  int s1 = std::min(n, static_cast<int>(std::lround(t1 * sr)));
  std::vector<double> seg(buf.samples.begin() + s0, buf.samples.begin() + s1);
  std::vector<double> x = detail::resample(seg, sr, target_sr);
  if (x.size() < 64) throw DataError("formants: segment too short");

  const int want = std::min<int>(static_cast<int>(x.size()),
                                 static_cast<int>(std::lround(0.05 * target_sr)));
  const int mid = static_cast<int>(x.size()) / 2;
  auto window_at = [&](int center) {
    int a = std::clamp(center - want / 2, 0, static_cast<int>(x.size()) - want);
    return std::vector<double>(x.begin() + a, x.begin() + a + want);
  };
  const int order = 2 * n_formants + 2;
  auto cand_a =
      detail::lp_candidates(window_at(mid), target_sr, order, max_formant_hz);
  auto cand_b = detail::lp_candidates(window_at(mid + want / 2), target_sr, order,
                                      max_formant_hz);
  auto good_a = detail::narrow_candidates(cand_a);
  auto good_b = detail::narrow_candidates(cand_b);

  FormantEstimate est;
  if (good_a.size() >= 2) {
    est = {good_a[0].freq, good_a[1].freq, good_a[0].bw, good_a[1].bw, false};
    est.confident = good_b.size() >= 2 &&
                    std::fabs(good_b[0].freq - est.f1) < 150.0 &&
                    std::fabs(good_b[1].freq - est.f2) < 200.0;
  } else if (cand_a.size() >= 2) {
    est = {cand_a[0].freq, cand_a[1].freq, cand_a[0].bw, cand_a[1].bw, false};
  } else if (cand_a.size() == 1) {
    est = {cand_a[0].freq, cand_a[0].freq, cand_a[0].bw, cand_a[0].bw, false};
  }
  return est;
}

}  // namespace dyskit::signal

#endif  // DYSKIT_FORMANT_HPP_
