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

// The 35 clinical voice biomarkers for one utterance: 8 voice quality, 3
// phoneme accuracy, 5 vowel distortion, 4 fluency, 5 F0 statistics, 5 energy
// statistics, 5 rhythm. A feature that cannot be computed is MISSING, never
// an error: the downstream classifier routes missing values natively.
//
// Perturbation measures over pulse periods T_i and amplitudes A_i:
//   absJitter  = 1/(N-1) sum |T_i - T_(i-1)|
//   absShimmer = 1/(N-1) sum |A_i - A_(i-1)|
//   absPPQ     = sum_i |T_i - mean(T_(i-2)..T_(i+2))| / (N-4)
//   absAPQ     = likewise on amplitudes
// reported relative: abs / mean * 100.
//
// Vowel space from corner-vowel formants (i, u, a, ae):
//   VSAtri  = 1/2 |F1i(F2a-F2u) + F1a(F2u-F2i) + F1u(F2i-F2a)|
//   VSAquad = 1/2 |(F2i F1ae + F2ae F1a + F2a F1u + F2u F1i)
//                - (F1i F2ae + F1ae F2a + F1a F2u + F1u F2i)|
//   FCR = (F2u + F2a + F1i + F1u) / (F2i + F1a),  VAI = 1/FCR
//   F2ratio = F2i / F2u
//
// Rhythm over merged same-class interval durations d_k:
//   Varco = 100 * std/mean,  nPVI = 100/(m-1) sum |d_k - d_(k+1)| / midmean

#ifndef DYSKIT_BIOMARKERS_HPP_
#define DYSKIT_BIOMARKERS_HPP_

#include <map>
#include <string>
#include <vector>

#include "dyskit/formant.hpp"
#include "dyskit/phones.hpp"
#include "dyskit/pitch.hpp"
#include "dyskit/spectral.hpp"

namespace dyskit::biomarkers {

// Voice breaks: inter-pulse gap above 1.25 periods of the 70 Hz pitch floor.
inline constexpr double kVoiceBreakSec = 0.01786;
inline constexpr double kPauseThresholdSec = 0.2;

inline const std::vector<std::string>& feature_registry() {
  static const std::vector<std::string> names = {
      // voice quality
      "jitter", "ppq", "shimmer", "apq", "hnr", "cpp", "num_voice_breaks",
      "pct_voice_breaks",
      // phoneme accuracy
      "crr", "vrr", "prr",
      // vowel distortion
      "vsa_tri", "vsa_quad", "fcr", "vai", "f2_ratio",
      // fluency
      "speaking_rate", "articulation_rate", "num_pauses", "avg_pause_dur",
      // F0 statistics
      "f0_mean", "f0_median", "f0_std", "f0_min", "f0_max",
      // energy statistics
      "energy_mean", "energy_median", "energy_std", "energy_min", "energy_max",
      // rhythm
      "pct_v", "varco_v", "varco_c", "npvi_v", "npvi_c"};
  return names;
}

enum class Direction { kUp, kDown, kEither };

// Expected change with increasing severity, from the clinical feature table.
inline const std::map<std::string, Direction>& expected_directions() {
  static const std::map<std::string, Direction> dirs = {
      {"jitter", Direction::kUp},          {"ppq", Direction::kUp},
      {"shimmer", Direction::kUp},         {"apq", Direction::kUp},
      {"hnr", Direction::kDown},           {"cpp", Direction::kDown},
      {"num_voice_breaks", Direction::kUp},{"pct_voice_breaks", Direction::kUp},
      {"crr", Direction::kDown},           {"vrr", Direction::kDown},
      {"prr", Direction::kDown},           {"vsa_tri", Direction::kDown},
      {"vsa_quad", Direction::kDown},      {"fcr", Direction::kUp},
      {"vai", Direction::kDown},           {"f2_ratio", Direction::kDown},
      {"speaking_rate", Direction::kDown}, {"articulation_rate", Direction::kDown},
      {"num_pauses", Direction::kUp},      {"avg_pause_dur", Direction::kUp},
      {"f0_mean", Direction::kEither},     {"f0_median", Direction::kEither},
      {"f0_std", Direction::kDown},        {"f0_min", Direction::kEither},
      {"f0_max", Direction::kEither},      {"energy_mean", Direction::kDown},
      {"energy_median", Direction::kDown}, {"energy_std", Direction::kDown},
      {"energy_min", Direction::kEither},  {"energy_max", Direction::kEither},
      {"pct_v", Direction::kUp},           {"varco_v", Direction::kEither},
      {"varco_c", Direction::kEither},     {"npvi_v", Direction::kEither},
      {"npvi_c", Direction::kEither}};
  return dirs;
}

struct FeatureVector {
  std::map<std::string, Cell> values;

  void set(const std::string& name, Cell v) {
    if (expected_directions().find(name) == expected_directions().end()) {
      throw DataError("feature vector: unknown feature '" + name + "'");
    }
    if (v && !std::isfinite(*v)) v = std::nullopt;
    values[name] = v;
  }

  Cell get(const std::string& name) const {
    auto it = values.find(name);
    return it == values.end() ? Cell{} : it->second;
  }

  int present_count() const {
    int n = 0;
    for (const auto& [k, v] : values) n += v.has_value();
    return n;
  }
};

// ---- voice quality ----

struct VoiceQuality {
  Cell jitter, ppq, shimmer, apq;  // relative, percent
  Cell abs_jitter, abs_shimmer;    // kept for diagnostics
  Cell num_voice_breaks, pct_voice_breaks;
};

inline VoiceQuality voice_quality(const signal::PulseTrain& pulses,
                                  double break_threshold_s = kVoiceBreakSec) {
  VoiceQuality out;
  const std::vector<double> periods = pulses.periods();
  if (periods.empty()) return out;

  int breaks = 0;
  double break_time = 0.0;
  for (double t : periods) {
    if (t > break_threshold_s) {
      ++breaks;
      break_time += t;
    }
  }
  out.num_voice_breaks = static_cast<double>(breaks);
  if (pulses.total_duration > 0.0) {
    out.pct_voice_breaks = 100.0 * break_time / pulses.total_duration;
  }

  // perturbation statistics pool only inside voiced runs: maximal spans of
  // consecutive periods at or below the break threshold whose neighbor
  // ratio stays under the period factor (glottal analysis convention; a
  // vowel-onset glitch period must not pair with clean interior periods).
  // A_i is the amplitude of the pulse opening interval i.
  constexpr double kMaxPeriodFactor = 1.3;
  std::vector<std::vector<double>> period_runs;
  std::vector<std::vector<double>> amp_runs;
  std::vector<double> cur_p, cur_a;
  auto flush = [&]() {
    if (!cur_p.empty()) {
      period_runs.push_back(std::move(cur_p));
      amp_runs.push_back(std::move(cur_a));
      cur_p.clear();
      cur_a.clear();
    }
  };
  for (size_t i = 0; i < periods.size(); ++i) {
    if (periods[i] > break_threshold_s) {
      flush();
      continue;
    }
    if (!cur_p.empty()) {
      const double ratio = std::max(periods[i], cur_p.back()) /
                           std::min(periods[i], cur_p.back());
      if (ratio > kMaxPeriodFactor) flush();
    }
    cur_p.push_back(periods[i]);
    cur_a.push_back(pulses.amplitudes[i]);
  }
  flush();

  auto pooled_first_diff = [](const std::vector<std::vector<double>>& runs) -> Cell {
    double num = 0.0;
    int count = 0;
    for (const auto& run : runs) {
      for (size_t i = 1; i < run.size(); ++i) {
        num += std::fabs(run[i] - run[i - 1]);
        ++count;
      }
    }
    if (count == 0) return std::nullopt;
    return num / count;
  };
  auto pooled_window5 = [](const std::vector<std::vector<double>>& runs) -> Cell {
    double num = 0.0;
    int count = 0;
    for (const auto& run : runs) {
      for (size_t i = 2; i + 2 < run.size(); ++i) {
        const double local =
            (run[i - 2] + run[i - 1] + run[i] + run[i + 1] + run[i + 2]) / 5.0;
        num += std::fabs(run[i] - local);
        ++count;
      }
    }
    if (count == 0) return std::nullopt;
    return num / count;
  };
  auto pooled_mean = [](const std::vector<std::vector<double>>& runs) -> Cell {
    double sum = 0.0;
    int count = 0;
    for (const auto& run : runs) {
      for (double v : run) {
        sum += v;
        ++count;
      }
    }
    if (count == 0) return std::nullopt;
    return sum / count;
  };

  const Cell mean_t = pooled_mean(period_runs);
  const Cell mean_a = pooled_mean(amp_runs);
  out.abs_jitter = pooled_first_diff(period_runs);
  out.abs_shimmer = pooled_first_diff(amp_runs);
  if (out.abs_jitter && mean_t && *mean_t > 0.0) {
    out.jitter = 100.0 * *out.abs_jitter / *mean_t;
  }
  if (out.abs_shimmer && mean_a && *mean_a > 0.0) {
    out.shimmer = 100.0 * *out.abs_shimmer / *mean_a;
  }
  const Cell abs_ppq = pooled_window5(period_runs);
  if (abs_ppq && mean_t && *mean_t > 0.0) out.ppq = 100.0 * *abs_ppq / *mean_t;
  const Cell abs_apq = pooled_window5(amp_runs);
  if (abs_apq && mean_a && *mean_a > 0.0) out.apq = 100.0 * *abs_apq / *mean_a;
  return out;
}

// ---- phoneme accuracy ----

struct PhonemeAccuracy {
  Cell crr, vrr, prr;  // percent
};

// A pair counts as matched only when the labels are identical; rates are
// over the canonical side's scoreable (non-silence) phones.
inline PhonemeAccuracy phoneme_accuracy(const std::vector<alignment::AlignedPair>& pairs,
                                        const alignment::LanguageInventory& inv) {
  int consonants = 0, vowels = 0, consonant_hits = 0, vowel_hits = 0;
  for (const auto& p : pairs) {
    if (p.canonical == alignment::kGap) continue;
    const auto cls = inv.classify(p.canonical);
    if (cls == alignment::PhoneClass::kConsonant) {
      ++consonants;
      consonant_hits += p.is_match();
    } else if (cls == alignment::PhoneClass::kVowel) {
      ++vowels;
      vowel_hits += p.is_match();
    }
  }
  PhonemeAccuracy out;
  if (consonants > 0) out.crr = 100.0 * consonant_hits / consonants;
  if (vowels > 0) out.vrr = 100.0 * vowel_hits / vowels;
  if (consonants + vowels > 0) {
    out.prr = 100.0 * (consonant_hits + vowel_hits) / (consonants + vowels);
  }
  return out;
}

// ---- vowel distortion ----

struct CornerFormants {
  Cell f1_i, f2_i, f1_u, f2_u, f1_a, f2_a, f1_ae, f2_ae;
};

struct VowelSpace {
  Cell vsa_tri, vsa_quad, fcr, vai, f2_ratio;
};

inline VowelSpace vowel_space(const CornerFormants& c) {
  VowelSpace out;
  const bool iua = c.f1_i && c.f2_i && c.f1_u && c.f2_u && c.f1_a && c.f2_a;
  if (iua) {
    out.vsa_tri = 0.5 * std::fabs(*c.f1_i * (*c.f2_a - *c.f2_u) +
                                  *c.f1_a * (*c.f2_u - *c.f2_i) +
                                  *c.f1_u * (*c.f2_i - *c.f2_a));
    const double num = *c.f2_u + *c.f2_a + *c.f1_i + *c.f1_u;
    const double den = *c.f2_i + *c.f1_a;
    if (den > 0.0 && num > 0.0) {
      out.fcr = num / den;
      out.vai = den / num;
    }
    if (*c.f2_u > 0.0) out.f2_ratio = *c.f2_i / *c.f2_u;
  }
  if (iua && c.f1_ae && c.f2_ae) {
    out.vsa_quad =
        0.5 * std::fabs((*c.f2_i * *c.f1_ae + *c.f2_ae * *c.f1_a +
                         *c.f2_a * *c.f1_u + *c.f2_u * *c.f1_i) -
                        (*c.f1_i * *c.f2_ae + *c.f1_ae * *c.f2_a +
                         *c.f1_a * *c.f2_u + *c.f1_u * *c.f2_i));
  }
  return out;
}

// ---- fluency ----

struct Fluency {
  Cell speaking_rate, articulation_rate;  // syllables per second
  Cell num_pauses, avg_pause_dur;
};

inline Fluency fluency(const alignment::Alignment& grid,
                       const alignment::LanguageInventory& inv,
                       double pause_threshold_s = kPauseThresholdSec,
                       const std::string& phone_tier = "phones") {
  const alignment::Tier* tier = grid.find_tier(phone_tier);
  if (tier == nullptr) throw DataError("fluency: missing tier '" + phone_tier + "'");

  Fluency out;
  int syllables = 0, pauses = 0;
  double pause_time = 0.0;
  for (const auto& iv : tier->intervals) {
    const auto cls = inv.classify(iv.label);
    if (cls == alignment::PhoneClass::kVowel) ++syllables;
    if (cls == alignment::PhoneClass::kSilence) {
      const double d = iv.xmax - iv.xmin;
      if (d >= pause_threshold_s) {
        ++pauses;
        pause_time += d;
      }
    }
  }
  out.num_pauses = static_cast<double>(pauses);
  if (pauses > 0) out.avg_pause_dur = pause_time / pauses;
  const double total = grid.total_duration();
  if (total > 0.0) out.speaking_rate = syllables / total;
  const double speech = total - pause_time;
  if (speech > 0.0) out.articulation_rate = syllables / speech;
  return out;
}

// ---- contour statistics ----

struct ContourStats {
  Cell mean, median, std_dev, min, max;
};

// Statistics over nonzero frames only (zeros mark unvoiced/silent frames);
// population standard deviation.
inline ContourStats nonzero_stats(const std::vector<double>& values) {
  std::vector<double> kept;
  for (double v : values) {
    if (v != 0.0) kept.push_back(v);
  }
  ContourStats out;
  if (kept.empty()) return out;
  out.mean = dyskit::mean(kept);
  out.median = dyskit::median(kept);
  out.std_dev = population_std(kept);
  out.min = *std::min_element(kept.begin(), kept.end());
  out.max = *std::max_element(kept.begin(), kept.end());
  return out;
}

// ---- rhythm ----

struct Rhythm {
  Cell pct_v;  // fraction of vocalic time over vocalic + consonantal
  Cell varco_v, varco_c, npvi_v, npvi_c;
};

inline double rpvi(const std::vector<double>& durations) {
  if (durations.size() < 2) throw DataError("rpvi: need >= 2 intervals");
  double sum = 0.0;
  for (size_t k = 1; k < durations.size(); ++k) {
    sum += std::fabs(durations[k] - durations[k - 1]);
  }
  return sum / (durations.size() - 1);
}

inline double npvi(const std::vector<double>& durations) {
  if (durations.size() < 2) throw DataError("npvi: need >= 2 intervals");
  double sum = 0.0;
  for (size_t k = 1; k < durations.size(); ++k) {
    const double mid = 0.5 * (durations[k] + durations[k - 1]);
    if (mid > 0.0) sum += std::fabs(durations[k] - durations[k - 1]) / mid;
  }
  return 100.0 * sum / (durations.size() - 1);
}

// Vocalic/consonantal interval durations from merged runs of same-class
// phones (silence and other-class labels break a run).
inline void interval_durations(const alignment::Alignment& grid,
                               const alignment::LanguageInventory& inv,
                               std::vector<double>* vocalic,
                               std::vector<double>* consonantal,
                               const std::string& phone_tier = "phones") {
  const alignment::Tier* tier = grid.find_tier(phone_tier);
  if (tier == nullptr) throw DataError("rhythm: missing tier '" + phone_tier + "'");
  alignment::PhoneClass run_class = alignment::PhoneClass::kSilence;
  double run_len = 0.0;
  auto flush = [&]() {
    if (run_len <= 0.0) return;
    if (run_class == alignment::PhoneClass::kVowel) vocalic->push_back(run_len);
    if (run_class == alignment::PhoneClass::kConsonant) consonantal->push_back(run_len);
    run_len = 0.0;
  };
  for (const auto& iv : tier->intervals) {
    const auto cls = inv.classify(iv.label);
    if (cls != run_class) {
      flush();
      run_class = cls;
    }
    run_len += iv.xmax - iv.xmin;
  }
  flush();
}

inline Rhythm rhythm(const alignment::Alignment& grid,
                     const alignment::LanguageInventory& inv,
                     const std::string& phone_tier = "phones") {
  std::vector<double> vocalic, consonantal;
  interval_durations(grid, inv, &vocalic, &consonantal, phone_tier);

  Rhythm out;
  double tv = 0.0, tc = 0.0;
  for (double d : vocalic) tv += d;
  for (double d : consonantal) tc += d;
  if (tv + tc > 0.0) out.pct_v = tv / (tv + tc);
  if (vocalic.size() >= 2) {
    const double m = dyskit::mean(vocalic);
    if (m > 0.0) out.varco_v = 100.0 * population_std(vocalic) / m;
    out.npvi_v = npvi(vocalic);
  }
  if (consonantal.size() >= 2) {
    const double m = dyskit::mean(consonantal);
    if (m > 0.0) out.varco_c = 100.0 * population_std(consonantal) / m;
    out.npvi_c = npvi(consonantal);
  }
  return out;
}

// ---- whole-utterance extraction ----

struct ExtractConfig {
  double pitch_floor_hz = signal::kDefaultPitchFloorHz;
  double pitch_ceiling_hz = signal::kDefaultPitchCeilingHz;
  double frame_s = signal::kDefaultFrameSec;
  double shift_s = signal::kDefaultShiftSec;
  double voice_break_s = kVoiceBreakSec;
  // the clinical threshold is 200 ms; sub-millisecond pauses would be below
  // one analysis frame
  double pause_threshold_s = kPauseThresholdSec;
  double max_formant_male_hz = signal::kMaxFormantMaleHz;
  double max_formant_female_hz = signal::kMaxFormantFemaleHz;
  int n_formants = 5;
  std::string phone_tier = "phones";
};

struct UtteranceInputs {
  const signal::AudioBuffer* audio = nullptr;
  const alignment::Alignment* grid = nullptr;
  const alignment::LanguageInventory* inventory = nullptr;
  const std::vector<std::string>* decoded_phones = nullptr;  // may be null
  char sex = 'M';
  const CornerFormants* speaker_fallback = nullptr;  // corner imputation
};

// Mean formants over this utterance's instances of each corner vowel
// (confident estimates only).
inline CornerFormants measure_corners(const signal::AudioBuffer& audio,
                                      const alignment::Alignment& grid,
                                      const alignment::LanguageInventory& inv,
                                      char sex, const ExtractConfig& cfg = {}) {
  const alignment::Tier* tier = grid.find_tier(cfg.phone_tier);
  if (tier == nullptr) throw DataError("measure_corners: missing tier '" + cfg.phone_tier + "'");
  const double max_formant =
      sex == 'F' ? cfg.max_formant_female_hz : cfg.max_formant_male_hz;

  auto corner_mean = [&](const std::string& label, Cell* f1, Cell* f2) {
    double s1 = 0.0, s2 = 0.0;
    int count = 0;
    for (const auto& iv : tier->intervals) {
      if (iv.label != label) continue;
      try {
        const auto est = signal::formants(audio, iv.xmin, iv.xmax, max_formant,
                                          cfg.n_formants);
        if (!est.confident) continue;
        s1 += est.f1;
        s2 += est.f2;
        ++count;
      } catch (const DataError&) {
        // segment too short or outside the buffer: skip the instance
      }
    }
    if (count > 0) {
      *f1 = s1 / count;
      *f2 = s2 / count;
    }
  };
  CornerFormants out;
  corner_mean(inv.corners.i, &out.f1_i, &out.f2_i);
  corner_mean(inv.corners.u, &out.f1_u, &out.f2_u);
  corner_mean(inv.corners.a, &out.f1_a, &out.f2_a);
  corner_mean(inv.corners.ae, &out.f1_ae, &out.f2_ae);
  return out;
}

namespace detail {

inline void fill_missing_corner(Cell* dst, const Cell& fallback) {
  if (!dst->has_value() && fallback.has_value()) *dst = fallback;
}

}  // namespace detail

inline FeatureVector extract_all(const UtteranceInputs& in, const ExtractConfig& cfg = {}) {
  if (in.audio == nullptr || in.grid == nullptr || in.inventory == nullptr) {
    throw DataError("extract_all: audio, alignment, and inventory are required");
  }
  FeatureVector fv;
  for (const auto& name : feature_registry()) fv.set(name, std::nullopt);

  // pitch, energy, pulses
  signal::PitchContour contour;
  bool have_contour = false;
  try {
    contour = signal::pitch_contour(*in.audio, cfg.pitch_floor_hz, cfg.pitch_ceiling_hz,
                                    cfg.frame_s, cfg.shift_s);
    have_contour = true;
  } catch (const DataError&) {
  }

  if (have_contour && contour.voiced_count() > 0) {
    try {
      const auto pulses = signal::pulse_train(*in.audio, contour);
      const auto vq = voice_quality(pulses, cfg.voice_break_s);
      fv.set("jitter", vq.jitter);
      fv.set("ppq", vq.ppq);
      fv.set("shimmer", vq.shimmer);
      fv.set("apq", vq.apq);
      fv.set("num_voice_breaks", vq.num_voice_breaks);
      fv.set("pct_voice_breaks", vq.pct_voice_breaks);
    } catch (const DataError&) {
    }

    // voiced spans for HNR and CPP
    std::vector<std::pair<double, double>> voiced;
    size_t i = 0;
    while (i < contour.f0.size()) {
      if (contour.f0[i] <= 0.0) {
        ++i;
        continue;
      }
      size_t j = i;
      while (j + 1 < contour.f0.size() && contour.f0[j + 1] > 0.0) ++j;
      voiced.emplace_back(std::max(0.0, contour.frame_times[i] - 0.5 * cfg.frame_s),
                          std::min(in.audio->duration(),
                                   contour.frame_times[j] + 0.5 * cfg.frame_s));
      i = j + 1;
    }
    try {
      fv.set("hnr", signal::hnr_segments(*in.audio, voiced, cfg.pitch_floor_hz,
                                         cfg.pitch_ceiling_hz, cfg.frame_s, cfg.shift_s));
    } catch (const DataError&) {
    }
    try {
      fv.set("cpp", signal::cpp(*in.audio, voiced, cfg.pitch_floor_hz, 500.0,
                                cfg.frame_s, cfg.shift_s));
    } catch (const DataError&) {
    }

    const auto f0_stats = nonzero_stats(contour.f0);
    fv.set("f0_mean", f0_stats.mean);
    fv.set("f0_median", f0_stats.median);
    fv.set("f0_std", f0_stats.std_dev);
    fv.set("f0_min", f0_stats.min);
    fv.set("f0_max", f0_stats.max);
  }

  try {
    const auto energy = signal::energy_contour(*in.audio, cfg.frame_s, cfg.shift_s);
    const auto e_stats = nonzero_stats(energy.energy);
    fv.set("energy_mean", e_stats.mean);
    fv.set("energy_median", e_stats.median);
    fv.set("energy_std", e_stats.std_dev);
    fv.set("energy_min", e_stats.min);
    fv.set("energy_max", e_stats.max);
  } catch (const DataError&) {
  }

  // pronunciation
  if (in.decoded_phones != nullptr && !in.decoded_phones->empty()) {
    const alignment::Tier* tier = in.grid->find_tier(cfg.phone_tier);
    if (tier != nullptr) {
      std::vector<std::string> canonical;
      for (const auto& iv : tier->intervals) {
        if (in.inventory->classify(iv.label) != alignment::PhoneClass::kSilence) {
          canonical.push_back(iv.label);
        }
      }
      if (!canonical.empty()) {
        const auto pairs = alignment::align_sequences(
            alignment::PhoneSequence::from_labels(canonical, *in.inventory),
            alignment::PhoneSequence::from_labels(*in.decoded_phones, *in.inventory));
        const auto acc = phoneme_accuracy(pairs, *in.inventory);
        fv.set("crr", acc.crr);
        fv.set("vrr", acc.vrr);
        fv.set("prr", acc.prr);
      }
    }
  }

  // vowel space with speaker-level imputation
  CornerFormants corners =
      measure_corners(*in.audio, *in.grid, *in.inventory, in.sex, cfg);
  if (in.speaker_fallback != nullptr) {
    detail::fill_missing_corner(&corners.f1_i, in.speaker_fallback->f1_i);
    detail::fill_missing_corner(&corners.f2_i, in.speaker_fallback->f2_i);
    detail::fill_missing_corner(&corners.f1_u, in.speaker_fallback->f1_u);
    detail::fill_missing_corner(&corners.f2_u, in.speaker_fallback->f2_u);
    detail::fill_missing_corner(&corners.f1_a, in.speaker_fallback->f1_a);
    detail::fill_missing_corner(&corners.f2_a, in.speaker_fallback->f2_a);
    detail::fill_missing_corner(&corners.f1_ae, in.speaker_fallback->f1_ae);
    detail::fill_missing_corner(&corners.f2_ae, in.speaker_fallback->f2_ae);
  }
  const auto vs = vowel_space(corners);
  fv.set("vsa_tri", vs.vsa_tri);
  fv.set("vsa_quad", vs.vsa_quad);
  fv.set("fcr", vs.fcr);
  fv.set("vai", vs.vai);
  fv.set("f2_ratio", vs.f2_ratio);

  // fluency and rhythm
  try {
    const auto fl = fluency(*in.grid, *in.inventory, cfg.pause_threshold_s, cfg.phone_tier);
    fv.set("speaking_rate", fl.speaking_rate);
    fv.set("articulation_rate", fl.articulation_rate);
    fv.set("num_pauses", fl.num_pauses);
    fv.set("avg_pause_dur", fl.avg_pause_dur);
  } catch (const DataError&) {
  }
  try {
    const auto rh = rhythm(*in.grid, *in.inventory, cfg.phone_tier);
    fv.set("pct_v", rh.pct_v);
    fv.set("varco_v", rh.varco_v);
    fv.set("varco_c", rh.varco_c);
    fv.set("npvi_v", rh.npvi_v);
    fv.set("npvi_c", rh.npvi_c);
  } catch (const DataError&) {
  }
  return fv;
}

}  // namespace dyskit::biomarkers

#endif  // DYSKIT_BIOMARKERS_HPP_
