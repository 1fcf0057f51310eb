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

#ifndef DYSKIT_SPECTRAL_HPP_
#define DYSKIT_SPECTRAL_HPP_

#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include "dyskit/fft.hpp"
#include "dyskit/pitch.hpp"

namespace dyskit::signal {

// HNR of one frame from its peak normalized autocorrelation r:
// periodic-to-noise balance 10*log10(r / (1 - r)). r = 0.5 gives 0 dB.
inline double hnr_from_correlation(double r) {
  r = std::clamp(r, 1e-12, 1.0 - 1e-12);
  return 10.0 * std::log10(r / (1.0 - r));
}

// Mean frame HNR pooled over several segments. A frame contributes when its
// autocorrelation has a usable interior peak; throws when no frame does
// (e.g. digital silence). Aperiodic but non-silent input yields a negative
// value.
inline double hnr_segments(const AudioBuffer& buf,
                           const std::vector<std::pair<double, double>>& segments,
                           double floor_hz = kDefaultPitchFloorHz,
                           double ceiling_hz = kDefaultPitchCeilingHz,
                           double frame_s = kDefaultFrameSec,
                           double shift_s = kDefaultShiftSec) {
  if (segments.empty()) throw DataError("hnr: no segments");
  const int sr = buf.sample_rate;
  const int n = static_cast<int>(buf.samples.size());
  const int frame_len = static_cast<int>(std::lround(frame_s * sr));
  const int shift = std::max(1, static_cast<int>(std::lround(shift_s * sr)));
  const int min_lag = std::max(2, static_cast<int>(std::floor(sr / ceiling_hz)));
  const int max_lag = std::min(frame_len - 2, static_cast<int>(std::ceil(sr / floor_hz)));

  double sum = 0.0;
  int count = 0;
  for (const auto& [t0, t1] : segments) {
    int s0 = std::max(0, static_cast<int>(std::lround(t0 * sr)));
    int s1 = std::min(n, static_cast<int>(std::lround(t1 * sr)));
    if (s1 - s0 < frame_len) s1 = std::min(n, s0 + frame_len);
    for (int start = s0; start + frame_len <= s1; start += shift) {
      detail::FrameAcf acf;
      acf.x.assign(buf.samples.begin() + start, buf.samples.begin() + start + frame_len);
      double m = mean(acf.x);
      for (double& v : acf.x) v -= m;
      std::vector<double> r(max_lag + 2, 0.0);
      for (int lag = min_lag - 1; lag <= max_lag + 1; ++lag) r[lag] = acf.at(lag);
      double best = 0.0;
      bool found = false;
      for (int lag = min_lag; lag <= max_lag; ++lag) {
        if (r[lag] > r[lag - 1] && r[lag] >= r[lag + 1] && r[lag] > best) {
          best = r[lag];
          found = true;
        }
      }
      if (!found || best <= 0.0) continue;
      sum += hnr_from_correlation(best);
      ++count;
    }
  }
  if (count == 0) throw DataError("hnr: no usable frames in segment");
  return sum / count;
}

inline double hnr(const AudioBuffer& buf, double t0, double t1,
                  double floor_hz = kDefaultPitchFloorHz,
                  double ceiling_hz = kDefaultPitchCeilingHz,
                  double frame_s = kDefaultFrameSec,
                  double shift_s = kDefaultShiftSec) {
  if (t1 <= t0) throw DataError("hnr: empty segment");
  return hnr_segments(buf, {{t0, t1}}, floor_hz, ceiling_hz, frame_s, shift_s);
}

namespace detail {

// Cepstrum of the log magnitude spectrum of a Hann-windowed frame, with each
// coefficient expressed in dB (Hillenbrand-style power cepstrum).
inline std::vector<double> db_cepstrum(const std::vector<double>& frame) {
  const size_t nfft = next_pow2(frame.size());
  std::vector<std::complex<double>> buf(nfft, {0.0, 0.0});
  for (size_t i = 0; i < frame.size() && i < nfft; ++i) {
    const double w =
        0.5 - 0.5 * std::cos(2.0 * M_PI * i / (frame.size() - 1));
    buf[i] = frame[i] * w;
  }
  fft(buf);
  for (auto& c : buf) {
    c = {std::log(std::abs(c) + 1e-12), 0.0};
  }
  fft(buf, /*inverse=*/true);
  std::vector<double> cep(nfft);
  for (size_t i = 0; i < nfft; ++i) {
    cep[i] = 10.0 * std::log10(buf[i].real() * buf[i].real() + 1e-30);
  }
  return cep;
}

}  // namespace detail

// Cepstral peak prominence: the dB cepstral peak inside the pitch quefrency
// band [1/ceiling, 1/floor] minus the linear regression of dB-cepstrum
// versus quefrency evaluated at the peak, averaged over frames of the given
// voiced segments.
inline double cpp(const AudioBuffer& buf,
                  const std::vector<std::pair<double, double>>& voiced_segments,
                  double floor_hz = kDefaultPitchFloorHz,
                  double quefrency_ceiling_hz = 500.0,
                  double frame_s = kDefaultFrameSec,
                  double shift_s = kDefaultShiftSec) {
  if (voiced_segments.empty()) throw DataError("cpp: no voiced segments");
  const int sr = buf.sample_rate;
  const int n = static_cast<int>(buf.samples.size());
  const int frame_len = static_cast<int>(std::lround(frame_s * sr));
  const int shift = std::max(1, static_cast<int>(std::lround(shift_s * sr)));

  double total = 0.0;
  int count = 0;
  for (const auto& [t0, t1] : voiced_segments) {
    int s0 = std::max(0, static_cast<int>(std::lround(t0 * sr)));
    int s1 = std::min(n, static_cast<int>(std::lround(t1 * sr)));
    for (int start = s0; start + frame_len <= s1; start += shift) {
      std::vector<double> frame(buf.samples.begin() + start,
                                buf.samples.begin() + start + frame_len);
      std::vector<double> cep = detail::db_cepstrum(frame);
      int qlo = static_cast<int>(std::ceil(sr / quefrency_ceiling_hz));
      int qhi = std::min<int>(static_cast<int>(cep.size()) / 2 - 1,
                              static_cast<int>(std::floor(sr / floor_hz)));
      if (qhi <= qlo + 2) continue;

      // regression of cepstral value on quefrency over the band
      double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
      const int m = qhi - qlo + 1;
      for (int q = qlo; q <= qhi; ++q) {
        const double qs = static_cast<double>(q) / sr;
        sx += qs;
        sy += cep[q];
        sxx += qs * qs;
        sxy += qs * cep[q];
      }
      const double denom = m * sxx - sx * sx;
      if (std::fabs(denom) < 1e-300) continue;
      const double slope = (m * sxy - sx * sy) / denom;
      const double intercept = (sy - slope * sx) / m;

      int q_peak = qlo;
      for (int q = qlo; q <= qhi; ++q) {
        if (cep[q] > cep[q_peak]) q_peak = q;
      }
      const double trend = intercept + slope * (static_cast<double>(q_peak) / sr);
      total += cep[q_peak] - trend;
      ++count;
    }
  }
  if (count == 0) throw DataError("cpp: voiced segments shorter than one frame");
  return total / count;
}

}  // namespace dyskit::signal

#endif  // DYSKIT_SPECTRAL_HPP_
