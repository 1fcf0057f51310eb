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

#ifndef DYSKIT_PITCH_HPP_
#define DYSKIT_PITCH_HPP_

#include <cmath>
#include <vector>

#include "dyskit/common.hpp"
#include "dyskit/wav.hpp"

namespace dyskit::signal {

// Default analysis windows. The phonation preset mirrors long-term
// perturbation analysis settings (100 ms frames, 80 ms shift).
inline constexpr double kDefaultFrameSec = 0.040;
inline constexpr double kDefaultShiftSec = 0.010;
inline constexpr double kPhonationFrameSec = 0.100;
inline constexpr double kPhonationShiftSec = 0.080;

inline constexpr double kDefaultPitchFloorHz = 70.0;
inline constexpr double kDefaultPitchCeilingHz = 500.0;
inline constexpr double kVoicingThreshold = 0.45;

// Per-frame fundamental frequency; 0 marks an unvoiced frame.
struct PitchContour {
  std::vector<double> frame_times;
  std::vector<double> f0;
  double floor_hz = kDefaultPitchFloorHz;
  double ceiling_hz = kDefaultPitchCeilingHz;

  int voiced_count() const {
    int n = 0;
    for (double v : f0) n += v > 0.0;
    return n;
  }
};

// Glottal pulse marks with per-pulse amplitudes.
struct PulseTrain {
  std::vector<double> times;       // seconds, strictly increasing
  std::vector<double> amplitudes;  // |waveform| at each pulse
  double total_duration = 0.0;

  std::vector<double> periods() const {
    std::vector<double> p;
    for (size_t i = 1; i < times.size(); ++i) p.push_back(times[i] - times[i - 1]);
    return p;
  }
};

struct EnergyContour {
  std::vector<double> frame_times;
  std::vector<double> energy;  // linear mean-square per frame
};

namespace detail {

// Peak refinement: parabola through the peak sample and its neighbors.
// Returns the sub-sample offset in [-0.5, 0.5] and the interpolated value.
inline void parabolic_peak(double ym1, double y0, double yp1, double* offset,
                           double* value) {
  const double denom = ym1 - 2.0 * y0 + yp1;
  if (std::fabs(denom) < 1e-300) {
    *offset = 0.0;
    *value = y0;
    return;
  }
  double d = 0.5 * (ym1 - yp1) / denom;
  d = std::clamp(d, -0.5, 0.5);
  *offset = d;
  *value = y0 - 0.25 * (ym1 - yp1) * d;
}

// Normalized cross-correlation of a mean-removed frame at integer lag.
struct FrameAcf {
  std::vector<double> x;  // mean-removed frame

  double at(int lag) const {
    const int n = static_cast<int>(x.size());
    if (lag <= 0 || lag >= n) return 0.0;
    double num = 0.0, e0 = 0.0, e1 = 0.0;
    for (int t = 0; t + lag < n; ++t) {
      num += x[t] * x[t + lag];
      e0 += x[t] * x[t];
      e1 += x[t + lag] * x[t + lag];
    }
    const double denom = std::sqrt(e0 * e1);
    if (denom < 1e-300) return 0.0;
    return num / denom;
  }
};

}  // namespace detail

// Autocorrelation pitch tracker. Frames below the voicing threshold are 0;
// the track is 3-point median smoothed. Candidate lags must form an interior
// correlation peak, and among near-equal peaks the shortest lag wins so that
// subharmonics do not capture pure tones.
inline PitchContour pitch_contour(const AudioBuffer& buf,
                                  double floor_hz = kDefaultPitchFloorHz,
                                  double ceiling_hz = kDefaultPitchCeilingHz,
                                  double frame_s = kDefaultFrameSec,
                                  double shift_s = kDefaultShiftSec,
                                  double voicing_threshold = kVoicingThreshold) {
  if (buf.samples.empty()) throw DataError("pitch_contour: empty buffer");
  if (!(floor_hz < ceiling_hz) || ceiling_hz > buf.sample_rate / 2.0) {
    throw ConfigError("pitch_contour: require floor < ceiling <= sample_rate/2");
  }
  const int sr = buf.sample_rate;
  const int frame_len = static_cast<int>(std::lround(frame_s * sr));
  const int shift = std::max(1, static_cast<int>(std::lround(shift_s * sr)));
  const int n = static_cast<int>(buf.samples.size());
  if (frame_len > n) throw DataError("pitch_contour: frame longer than signal");

  const int min_lag = std::max(2, static_cast<int>(std::floor(sr / ceiling_hz)));
  const int max_lag = std::min(frame_len - 2, static_cast<int>(std::ceil(sr / floor_hz)));

  PitchContour out;
  out.floor_hz = floor_hz;
  out.ceiling_hz = ceiling_hz;
  for (int start = 0; start + frame_len <= n; start += shift) {
    out.frame_times.push_back((start + 0.5 * frame_len) / sr);

    detail::FrameAcf acf;
    acf.x.assign(buf.samples.begin() + start, buf.samples.begin() + start + frame_len);
    double m = mean(acf.x);
    for (double& v : acf.x) v -= m;

    std::vector<double> r(max_lag + 2, 0.0);
    for (int lag = min_lag - 1; lag <= max_lag + 1; ++lag) {
      if (lag >= 1 && lag < frame_len) r[std::min<size_t>(lag, r.size() - 1)] = acf.at(lag);
    }

    // interior peaks only; a boundary maximum is the low-lag ramp, not pitch
    double best_r = -1.0;
    int best_lag = 0;
    for (int lag = min_lag; lag <= max_lag; ++lag) {
      if (r[lag] > r[lag - 1] && r[lag] >= r[lag + 1] && r[lag] > best_r) {
        best_r = r[lag];
        best_lag = lag;
      }
    }
    double f0 = 0.0;
    if (best_lag > 0 && best_r >= voicing_threshold) {
      int chosen = best_lag;
      for (int lag = min_lag; lag < best_lag; ++lag) {
        if (r[lag] > r[lag - 1] && r[lag] >= r[lag + 1] && r[lag] >= best_r - 0.005) {
          chosen = lag;  // shortest near-equal peak
          break;
        }
      }
      double off = 0.0, val = 0.0;
      detail::parabolic_peak(r[chosen - 1], r[chosen], r[chosen + 1], &off, &val);
      const double lag_refined = chosen + off;
      f0 = std::clamp(sr / lag_refined, floor_hz, ceiling_hz);
    }
    out.f0.push_back(f0);
  }
  if (out.f0.empty()) throw DataError("pitch_contour: no analysis frames");

  // 3-point median smoothing
  std::vector<double> smoothed = out.f0;
  for (size_t i = 1; i + 1 < out.f0.size(); ++i) {
    double a = out.f0[i - 1], b = out.f0[i], c = out.f0[i + 1];
    smoothed[i] = std::max(std::min(a, b), std::min(std::max(a, b), c));
  }
  out.f0 = std::move(smoothed);
  return out;
}

// Pulse marking inside voiced runs of the contour. The first pulse anchors
// on the strongest waveform peak of one period; each following pulse sits at
// the cross-correlation lag of the neighboring cycle (waveform matching), so
// period estimates stay unbiased even for asymmetric glottal shapes where a
// raw peak picker drifts. Amplitudes are local peak magnitudes.
inline PulseTrain pulse_train(const AudioBuffer& buf, const PitchContour& contour) {
  if (contour.voiced_count() == 0) throw DataError("pulse_train: no voiced frames");
  const int sr = buf.sample_rate;
  const int n = static_cast<int>(buf.samples.size());
  const auto& x = buf.samples;

  PulseTrain train;
  train.total_duration = buf.duration();

  auto local_f0 = [&](double t) {
    double best = 0.0, best_dt = 1e18;
    for (size_t i = 0; i < contour.frame_times.size(); ++i) {
      if (contour.f0[i] <= 0.0) continue;
      double dt = std::fabs(contour.frame_times[i] - t);
      if (dt < best_dt) {
        best_dt = dt;
        best = contour.f0[i];
      }
    }
    return best;
  };

  // peak of sign*x over sample window [a, b), parabolic-refined
  auto find_peak = [&](int a, int b, int sign, double* t_peak, double* amp) {
    a = std::max(a, 1);
    b = std::min(b, n - 1);
    if (a >= b) return false;
    int best = -1;
    double best_v = -1e300;
    for (int i = a; i < b; ++i) {
      double v = sign * x[i];
      if (v > best_v) {
        best_v = v;
        best = i;
      }
    }
    if (best < 0) return false;
    double off = 0.0, val = 0.0;
    detail::parabolic_peak(sign * x[best - 1], sign * x[best], sign * x[best + 1],
                           &off, &val);
    *t_peak = (best + off) / sr;
    *amp = std::fabs(val);
    return true;
  };

  // lag (samples, sub-sample refined) that best aligns the cycle around
  // `anchor` with the neighboring cycle in `direction` (+1 next, -1
  // previous). Fails on weak normalized correlation (run edges, decay).
  auto matched_lag = [&](double anchor_t, double period_s, int direction,
                         double* lag_s) {
    const int half = std::max(2, static_cast<int>(std::lround(0.45 * period_s * sr)));
    const int center = static_cast<int>(std::lround(anchor_t * sr));
    const int a = center - half;
    const int b = center + half;
    const int lag_lo = std::max(2, static_cast<int>(std::lround(0.7 * period_s * sr)));
    const int lag_hi = static_cast<int>(std::lround(1.3 * period_s * sr));
    if (a < 0 || b >= n) return false;
    if (direction > 0 ? b + lag_hi + 1 >= n : a - lag_hi - 1 < 0) return false;

    double e0 = 0.0;
    for (int t = a; t <= b; ++t) e0 += x[t] * x[t];
    if (e0 <= 0.0) return false;
    std::vector<double> c(lag_hi + 2, 0.0);
    for (int lag = lag_lo - 1; lag <= lag_hi + 1; ++lag) {
      double acc = 0.0;
      for (int t = a; t <= b; ++t) acc += x[t] * x[t + direction * lag];
      c[lag] = acc;
    }
    int best = -1;
    double best_v = -1e300;
    for (int lag = lag_lo; lag <= lag_hi; ++lag) {
      if (c[lag] > best_v) {
        best_v = c[lag];
        best = lag;
      }
    }
    if (best < 0 || best_v <= 0.0) return false;
    double e1 = 0.0;
    for (int t = a; t <= b; ++t) {
      e1 += x[t + direction * best] * x[t + direction * best];
    }
    if (e1 <= 0.0 || best_v / std::sqrt(e0 * e1) < 0.5) return false;
    double off = 0.0, val = 0.0;
    detail::parabolic_peak(c[best - 1], c[best], c[best + 1], &off, &val);
    *lag_s = (best + off) / sr;
    return true;
  };

  auto local_amplitude = [&](double t, double period_s, int sign) {
    double peak_t = 0.0, peak_a = 0.0;
    const int pa = static_cast<int>(std::floor((t - 0.25 * period_s) * sr));
    const int pb = static_cast<int>(std::ceil((t + 0.25 * period_s) * sr));
    if (find_peak(pa, pb, sign, &peak_t, &peak_a)) return peak_a;
    return std::fabs(x[std::clamp(static_cast<int>(std::lround(t * sr)), 0, n - 1)]);
  };

  size_t i = 0;
  const size_t nf = contour.f0.size();
  while (i < nf) {
    if (contour.f0[i] <= 0.0) {
      ++i;
      continue;
    }
    size_t j = i;
    while (j + 1 < nf && contour.f0[j + 1] > 0.0) ++j;
    // voiced run [i, j]: anchor on the strongest peak of the run, then walk
    // outward in both directions so onset/offset ramps cannot distort the
    // chain
    const double t_begin = contour.frame_times[i];
    const double t_end = contour.frame_times[j];
    const double period0 = 1.0 / contour.f0[(i + j) / 2];
    const int run_a = std::max(1, static_cast<int>(std::lround((t_begin - 0.5 * period0) * sr)));
    const int run_b = std::min(n - 1, static_cast<int>(std::lround((t_end + 0.5 * period0) * sr)));
    if (run_a >= run_b) {
      i = j + 1;
      continue;
    }
    int sign = 1;
    {
      double best_abs = -1.0;
      for (int k = run_a; k < run_b; ++k) {
        if (std::fabs(x[k]) > best_abs) {
          best_abs = std::fabs(x[k]);
          sign = x[k] >= 0.0 ? 1 : -1;
        }
      }
    }
    double anchor = 0.0, amp = 0.0;
    {
      // strongest signed peak of the run
      int best = -1;
      double best_v = -1e300;
      for (int k = run_a; k < run_b; ++k) {
        if (sign * x[k] > best_v) {
          best_v = sign * x[k];
          best = k;
        }
      }
      if (best < 1 || best >= n - 1) {
        i = j + 1;
        continue;
      }
      double off = 0.0, val = 0.0;
      detail::parabolic_peak(sign * x[best - 1], sign * x[best], sign * x[best + 1],
                             &off, &val);
      anchor = (best + off) / sr;
      amp = std::fabs(val);
    }

    std::vector<double> forward, backward;
    for (int direction : {+1, -1}) {
      double at = anchor;
      double period = period0;
      while (true) {
        const double f0 = local_f0(at + direction * 0.5 * period);
        if (f0 > 0.0) period = 1.0 / f0;
        // half a period of slack beyond the frame-quantized run edge
        const double bound = direction > 0 ? t_end + 0.5 * period : t_begin - 0.5 * period;
        if (direction > 0 ? at > bound : at < bound) break;
        double lag = 0.0;
        if (!matched_lag(at, period, direction, &lag)) break;
        at += direction * lag;
        (direction > 0 ? forward : backward).push_back(at);
      }
    }
    std::reverse(backward.begin(), backward.end());
    std::vector<double> run_times = std::move(backward);
    run_times.push_back(anchor);
    run_times.insert(run_times.end(), forward.begin(), forward.end());
    for (double t : run_times) {
      if (!train.times.empty() && t <= train.times.back() + 1e-9) continue;
      train.times.push_back(t);
      train.amplitudes.push_back(t == anchor ? amp : local_amplitude(t, period0, sign));
    }
    i = j + 1;
  }
  if (train.times.size() < 2) throw DataError("pulse_train: fewer than 2 pulses");
  return train;
}

// Mean squared amplitude per frame.
inline EnergyContour energy_contour(const AudioBuffer& buf,
                                    double frame_s = kDefaultFrameSec,
                                    double shift_s = kDefaultShiftSec) {
  if (frame_s <= 0.0 || shift_s <= 0.0) throw ConfigError("energy_contour: frame_s, shift_s > 0");
  if (buf.samples.empty()) throw DataError("energy_contour: empty buffer");
  const int sr = buf.sample_rate;
  const int frame_len = static_cast<int>(std::lround(frame_s * sr));
  const int shift = std::max(1, static_cast<int>(std::lround(shift_s * sr)));
  const int n = static_cast<int>(buf.samples.size());

  EnergyContour out;
  for (int start = 0; start + frame_len <= n; start += shift) {
    double ss = 0.0;
    for (int t = start; t < start + frame_len; ++t) ss += buf.samples[t] * buf.samples[t];
    out.frame_times.push_back((start + 0.5 * frame_len) / sr);
    out.energy.push_back(ss / frame_len);
  }
  return out;
}

}  // namespace dyskit::signal

#endif  // DYSKIT_PITCH_HPP_
