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

// Shared test signal generators. These stay independent of the library's
// analysis path: each test knows the ground truth by construction.

#ifndef DYSKIT_TESTS_SUPPORT_HPP_
#define DYSKIT_TESTS_SUPPORT_HPP_

#include <cmath>
#include <random>
#include <vector>

#include "dyskit/wav.hpp"

namespace testsup {

inline dyskit::signal::AudioBuffer make_sine(double freq_hz, double seconds,
                                             int sr = 16000, double amp = 0.8) {
  dyskit::signal::AudioBuffer buf;
  buf.sample_rate = sr;
  const int n = static_cast<int>(seconds * sr);
  buf.samples.resize(n);
  for (int i = 0; i < n; ++i) {
    buf.samples[i] = amp * std::sin(2.0 * M_PI * freq_hz * i / sr);
  }
  return buf;
}

inline dyskit::signal::AudioBuffer make_noise(double seconds, unsigned seed,
                                              int sr = 16000, double amp = 0.5) {
  dyskit::signal::AudioBuffer buf;
  buf.sample_rate = sr;
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-amp, amp);
  const int n = static_cast<int>(seconds * sr);
  buf.samples.resize(n);
  for (int i = 0; i < n; ++i) buf.samples[i] = u(rng);
  return buf;
}

inline dyskit::signal::AudioBuffer make_silence(double seconds, int sr = 16000) {
  dyskit::signal::AudioBuffer buf;
  buf.sample_rate = sr;
  buf.samples.assign(static_cast<size_t>(seconds * sr), 0.0);
  return buf;
}

// Periodic glottal-like pulse train at rate f0 (one Hann bump per cycle).
inline dyskit::signal::AudioBuffer make_pulse_train(double f0, double seconds,
                                                    int sr = 16000,
                                                    double amp = 0.8) {
  dyskit::signal::AudioBuffer buf;
  buf.sample_rate = sr;
  const int n = static_cast<int>(seconds * sr);
  buf.samples.assign(n, 0.0);
  const double period = 1.0 / f0;
  const double width = 0.15 * period;  // narrow bumps keep harmonics dense
  for (double t = period; t + width < seconds; t += period) {
    const int c = static_cast<int>(t * sr);
    const int half = static_cast<int>(0.5 * width * sr);
    for (int k = -half; k <= half; ++k) {
      const int idx = c + k;
      if (idx < 0 || idx >= n) continue;
      buf.samples[idx] += amp * (0.5 + 0.5 * std::cos(M_PI * k / half));
    }
  }
  return buf;
}

// Two-resonance vowel: impulse train excitation through two 2nd-order
// resonators. Ground-truth formants are the resonator frequencies.
inline dyskit::signal::AudioBuffer make_vowel(double f0, double f1, double f2,
                                              double seconds, int sr = 16000,
                                              double bw1 = 60.0, double bw2 = 90.0) {
  dyskit::signal::AudioBuffer buf;
  buf.sample_rate = sr;
  const int n = static_cast<int>(seconds * sr);
  std::vector<double> x(n, 0.0);
  const int period = static_cast<int>(sr / f0);
  for (int i = 0; i < n; i += period) x[i] = 1.0;

  auto resonate = [&](std::vector<double> in, double fc, double bw) {
    const double r = std::exp(-M_PI * bw / sr);
    const double a1 = -2.0 * r * std::cos(2.0 * M_PI * fc / sr);
    const double a2 = r * r;
    std::vector<double> out(in.size(), 0.0);
    double y1 = 0.0, y2 = 0.0;
    for (size_t i = 0; i < in.size(); ++i) {
      double y = in[i] - a1 * y1 - a2 * y2;
      out[i] = y;
      y2 = y1;
      y1 = y;
    }
    return out;
  };
  x = resonate(x, f1, bw1);
  x = resonate(x, f2, bw2);
  double peak = 1e-9;
  for (double v : x) peak = std::max(peak, std::fabs(v));
  buf.samples.resize(n);
  for (int i = 0; i < n; ++i) buf.samples[i] = 0.8 * x[i] / peak;
  return buf;
}

inline dyskit::signal::AudioBuffer mix(const dyskit::signal::AudioBuffer& a,
                                       const dyskit::signal::AudioBuffer& b,
                                       double gain_b) {
  dyskit::signal::AudioBuffer out = a;
  for (size_t i = 0; i < out.samples.size() && i < b.samples.size(); ++i) {
    out.samples[i] += gain_b * b.samples[i];
  }
  return out;
}

}  // namespace testsup

#endif  // DYSKIT_TESTS_SUPPORT_HPP_
