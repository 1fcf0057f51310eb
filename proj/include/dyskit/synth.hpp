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

// Synthetic corpora for desk-scale evaluation. The audio generator writes a
// full dataset (WAV + TextGrid + decoded phones + logits + segments +
// manifest) whose severity-controlled effects are realized physically:
// vowels are fractional-delay impulse trains through two resonators, so the
// requested jitter/shimmer/F0/pause/formant values survive re-measurement.
// The table generator plants severity effects directly in feature space for
// the classifier-level experiments.

#ifndef DYSKIT_SYNTH_HPP_
#define DYSKIT_SYNTH_HPP_

#include <cmath>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "dyskit/gop_io.hpp"
#include "dyskit/pipeline.hpp"
#include "dyskit/textgrid.hpp"
#include "dyskit/wav.hpp"

namespace dyskit::pipeline {

// ---- toy per-language phone inventories ----

inline alignment::LanguageInventory synth_inventory(const std::string& language) {
  alignment::LanguageInventory inv;
  inv.language = language;
  for (const char* v : {"ii", "aa", "uu", "ae"}) {
    inv.classes[v] = alignment::PhoneClass::kVowel;
  }
  std::vector<std::string> consonants;
  if (language == "en") {
    consonants = {"p", "t", "k", "s"};
  } else if (language == "ko") {
    consonants = {"t", "k", "m", "n"};
  } else if (language == "ta") {
    consonants = {"p", "t", "r", "l"};
  } else {
    consonants = {"p", "t", "k", "m"};
  }
  for (const auto& c : consonants) inv.classes[c] = alignment::PhoneClass::kConsonant;
  inv.corners = {"ii", "uu", "aa", "ae"};
  inv.validate();
  return inv;
}

inline nlohmann::json inventory_to_json(const alignment::LanguageInventory& inv) {
  nlohmann::json j;
  j["language"] = inv.language;
  nlohmann::json classes;
  for (const auto& [label, cls] : inv.classes) {
    classes[label] = cls == alignment::PhoneClass::kVowel       ? "vowel"
                     : cls == alignment::PhoneClass::kConsonant ? "consonant"
                     : cls == alignment::PhoneClass::kSilence   ? "silence"
                                                                : "other";
  }
  j["classes"] = classes;
  j["silence"] = inv.silence_labels;
  j["corner_vowels"] = {{"i", inv.corners.i},
                        {"u", inv.corners.u},
                        {"a", inv.corners.a},
                        {"ae", inv.corners.ae}};
  return j;
}

inline alignment::LanguageInventory inventory_from_json(const nlohmann::json& j) {
  alignment::LanguageInventory inv;
  try {
    inv.language = j.at("language").get<std::string>();
    for (const auto& [label, cls] : j.at("classes").items()) {
      const std::string c = cls.get<std::string>();
      inv.classes[label] = c == "vowel"       ? alignment::PhoneClass::kVowel
                           : c == "consonant" ? alignment::PhoneClass::kConsonant
                           : c == "silence"   ? alignment::PhoneClass::kSilence
                                              : alignment::PhoneClass::kOther;
    }
    if (j.contains("silence")) {
      inv.silence_labels.clear();
      for (const auto& s : j.at("silence")) inv.silence_labels.insert(s.get<std::string>());
    }
    const auto& corners = j.at("corner_vowels");
    inv.corners = {corners.at("i").get<std::string>(), corners.at("u").get<std::string>(),
                   corners.at("a").get<std::string>(), corners.at("ae").get<std::string>()};
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("inventory json: ") + e.what());
  }
  inv.validate();
  return inv;
}

// ---- audio-level corpus ----

struct SynthSpec {
  std::vector<std::string> languages = {"en", "ko", "ta"};
  int speakers_per_severity = 2;  // per language
  int utterances_per_speaker = 4;
  int phones_per_utterance = 8;
  uint64_t seed = 1;
  int sample_rate = 16000;

  // per-severity-step effect sizes (monotone in severity)
  double jitter_base = 0.002, jitter_step = 0.010;        // fraction of period
  double shimmer_base = 0.02, shimmer_step = 0.05;        // fraction of amplitude
  double f0_base_hz = 120.0, f0_step_hz = 12.0;           // elevated F0
  double amplitude_base = 0.5, amplitude_step = -0.06;    // softer voice
  double pause_base_s = 0.25, pause_step_s = 0.15;        // longer pauses
  double vowel_dur_base_s = 0.28, vowel_dur_step_s = 0.05;  // slower rate
  double consonant_dur_s = 0.10;
  double centralization_step = 0.10;    // vowel space shrink per step
  double substitution_base = 0.00, substitution_step = 0.15;  // decoded errors
  double logit_margin_base = 4.0, logit_margin_step = 1.2;    // GoP degradation
  double logit_frame_shift_s = 0.02;

  void validate() const {
    if (languages.empty()) throw ConfigError("synth: no languages");
    if (speakers_per_severity < 1 || utterances_per_speaker < 1) {
      throw ConfigError("synth: speakers and utterances must be positive");
    }
    if (phones_per_utterance < 2) throw ConfigError("synth: need >= 2 phones");
    if (f0_base_hz <= 50.0 || f0_base_hz + 3 * f0_step_hz >= 480.0) {
      throw ConfigError("synth: f0 outside the trackable band");
    }
    if (jitter_base < 0 || jitter_base + 3 * jitter_step >= 0.12) {
      throw ConfigError("synth: jitter fraction infeasible");
    }
    if (substitution_base < 0 || substitution_base + 3 * substitution_step > 1.0) {
      throw ConfigError("synth: substitution rate outside [0, 1]");
    }
    const double speech = (phones_per_utterance / 2.0) *
                          (vowel_dur_base_s + consonant_dur_s);
    const double worst_pause = pause_base_s + 3 * pause_step_s;
    if (worst_pause >= speech) {
      throw ConfigError("synth: pause longer than the utterance speech");
    }
    if (amplitude_base + 3 * amplitude_step <= 0.05) {
      throw ConfigError("synth: amplitude collapses at high severity");
    }
  }
};

namespace detail {

using trees::detail::SplitMix64;

struct SynthUtterance {
  std::vector<double> samples;
  alignment::Alignment grid;
  std::vector<std::string> decoded;
  gop::LogitMatrix logits;
  std::vector<gop::PhoneSegment> segments;
};

// fractional-position impulse: split across the two neighboring samples
inline void add_impulse(std::vector<double>* x, double pos, double amp) {
  const size_t lo = static_cast<size_t>(pos);
  const double frac = pos - lo;
  if (lo + 1 < x->size()) {
    (*x)[lo] += amp * (1.0 - frac);
    (*x)[lo + 1] += amp * frac;
  }
}

inline void resonate_in_place(std::vector<double>* x, double fc, double bw, int sr) {
  const double r = std::exp(-M_PI * bw / sr);
  const double a1 = -2.0 * r * std::cos(2.0 * M_PI * fc / sr);
  const double a2 = r * r;
  double y1 = 0.0, y2 = 0.0;
  for (double& v : *x) {
    const double y = v - a1 * y1 - a2 * y2;
    v = y;
    y2 = y1;
    y1 = y;
  }
}

struct CornerTarget {
  double f1, f2;
};

inline CornerTarget corner_target(const std::string& vowel, int severity,
                                  double centralization_step) {
  static const std::map<std::string, CornerTarget> base = {
      {"ii", {310.0, 2250.0}},
      {"aa", {780.0, 1280.0}},
      {"uu", {330.0, 880.0}},
      {"ae", {680.0, 1720.0}}};
  const CornerTarget b = base.at(vowel);
  // corners drift toward the chart center with severity
  const double cf1 = 500.0, cf2 = 1500.0;
  const double keep = std::max(0.2, 1.0 - centralization_step * severity);
  return {cf1 + (b.f1 - cf1) * keep, cf2 + (b.f2 - cf2) * keep};
}

inline SynthUtterance make_utterance(const SynthSpec& spec,
                                     const alignment::LanguageInventory& inv,
                                     int severity, SplitMix64& rng) {
  const int sr = spec.sample_rate;
  SynthUtterance out;
  alignment::Tier tier;
  tier.name = "phones";

  std::vector<std::string> vowels = {"ii", "aa", "uu", "ae"};
  std::vector<std::string> consonants;
  for (const auto& [label, cls] : inv.classes) {
    if (cls == alignment::PhoneClass::kConsonant) consonants.push_back(label);
  }

  const double f0 = spec.f0_base_hz + spec.f0_step_hz * severity;
  const double jitter = spec.jitter_base + spec.jitter_step * severity;
  const double shimmer = spec.shimmer_base + spec.shimmer_step * severity;
  const double amp = spec.amplitude_base + spec.amplitude_step * severity;
  const double vowel_dur = spec.vowel_dur_base_s + spec.vowel_dur_step_s * severity;
  const double pause_dur = spec.pause_base_s + spec.pause_step_s * severity;

  double t = 0.0;
  auto append_silence = [&](double seconds, const std::string& label) {
    const size_t n = static_cast<size_t>(std::lround(seconds * sr));
    out.samples.insert(out.samples.end(), n, 0.0);
    tier.intervals.push_back({t, t + n / double(sr), label});
    t += n / double(sr);
  };
  auto append_consonant = [&](const std::string& label) {
    const size_t n = static_cast<size_t>(std::lround(spec.consonant_dur_s * sr));
    std::vector<double> burst(n);
    for (double& v : burst) v = 0.12 * (2.0 * rng.uniform() - 1.0);
    out.samples.insert(out.samples.end(), burst.begin(), burst.end());
    tier.intervals.push_back({t, t + n / double(sr), label});
    t += n / double(sr);
  };
  auto append_vowel = [&](const std::string& label) {
    const size_t n = static_cast<size_t>(std::lround(vowel_dur * sr));
    std::vector<double> seg(n, 0.0);
    const double period0 = sr / f0;  // samples
    double pos = period0 * 0.5;
    // random cycle perturbation; an alternating pattern would be exactly
    // 2T-periodic (diplophonia) and trackers would lock the octave below.
    // E|u - v| = 2/3 for iid U[-1,1], hence the 1.5 factor realizes the
    // requested mean absolute successive difference.
    while (pos < n - 2) {
      const double uj = 2.0 * rng.uniform() - 1.0;
      const double us = 2.0 * rng.uniform() - 1.0;
      add_impulse(&seg, pos, 1.0 + 1.5 * shimmer * us);
      pos += period0 * (1.0 + 1.5 * jitter * uj);
    }
    const CornerTarget target = corner_target(label, severity, spec.centralization_step);
    resonate_in_place(&seg, target.f1, 170.0, sr);
    resonate_in_place(&seg, target.f2, 220.0, sr);
    double peak = 1e-9;
    for (double v : seg) peak = std::max(peak, std::fabs(v));
    for (double& v : seg) v *= amp / peak;
    out.samples.insert(out.samples.end(), seg.begin(), seg.end());
    tier.intervals.push_back({t, t + n / double(sr), label});
    t += n / double(sr);
  };

  // layout: sil [C V]... with a mid-utterance pause; every corner vowel
  // appears before reuse so the vowel-space features stay computable
  append_silence(0.2, "sil");
  std::vector<std::string> canonical;
  const int n_pairs = spec.phones_per_utterance / 2;
  for (int p = 0; p < n_pairs; ++p) {
    if (p == n_pairs / 2) append_silence(pause_dur, "sil");
    const std::string c = consonants[rng.below(consonants.size())];
    const std::string v = vowels[p % vowels.size()];
    append_consonant(c);
    canonical.push_back(c);
    append_vowel(v);
    canonical.push_back(v);
  }
  append_silence(0.2, "sil");

  out.grid.xmin = 0.0;
  out.grid.xmax = t;
  out.grid.tiers.push_back(tier);

  // decoded phones: canonical with severity-scaled substitutions
  const double p_sub = spec.substitution_base + spec.substitution_step * severity;
  std::vector<std::string> all_labels;
  for (const auto& [label, cls] : inv.classes) all_labels.push_back(label);
  for (const auto& phone : canonical) {
    if (rng.uniform() < p_sub) {
      std::string other = phone;
      while (other == phone) other = all_labels[rng.below(all_labels.size())];
      out.decoded.push_back(other);
    } else {
      out.decoded.push_back(phone);
    }
  }

  // frame-level logits with a severity-degraded target margin
  out.logits.class_labels = all_labels;
  out.logits.frame_shift = spec.logit_frame_shift_s;
  const double margin = spec.logit_margin_base - spec.logit_margin_step * severity;
  const size_t n_frames = static_cast<size_t>(t / spec.logit_frame_shift_s);
  out.logits.n_frames = n_frames;
  out.logits.data.assign(n_frames * all_labels.size(), 0.0);
  for (size_t f = 0; f < n_frames; ++f) {
    for (size_t q = 0; q < all_labels.size(); ++q) {
      out.logits.at(f, q) = 0.5 * (2.0 * rng.uniform() - 1.0);
    }
  }
  for (const auto& iv : tier.intervals) {
    if (inv.classify(iv.label) == alignment::PhoneClass::kSilence) continue;
    const size_t f0_frame = static_cast<size_t>(iv.xmin / spec.logit_frame_shift_s);
    size_t f1_frame = static_cast<size_t>(iv.xmax / spec.logit_frame_shift_s);
    f1_frame = std::min(f1_frame, n_frames);
    if (f0_frame >= f1_frame) continue;
    const int target = out.logits.class_index(iv.label);
    for (size_t f = f0_frame; f < f1_frame; ++f) {
      out.logits.at(f, static_cast<size_t>(target)) += margin;
    }
    gop::PhoneSegment seg;
    seg.phoneme = iv.label;
    seg.begin_frame = f0_frame;
    seg.end_frame = f1_frame;
    out.segments.push_back(seg);
  }
  return out;
}

}  // namespace detail

// Writes the corpus under out_dir and returns the manifest (paths relative
// to out_dir). Same spec and seed give byte-identical output.
inline DatasetManifest synth_corpus(const SynthSpec& spec, const std::string& out_dir) {
  spec.validate();
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  DatasetManifest manifest;
  for (const auto& language : spec.languages) {
    const auto inv = synth_inventory(language);
    io::write_file_atomic(out_dir + "/inventory_" + language + ".json",
                          inventory_to_json(inv).dump(2) + "\n");
    int speaker_counter = 0;
    for (int severity = 0; severity <= 3; ++severity) {
      for (int s = 0; s < spec.speakers_per_severity; ++s) {
        const std::string speaker =
            language + "_spk" + std::to_string(++speaker_counter) + "s" +
            std::to_string(severity);
        for (int u = 0; u < spec.utterances_per_speaker; ++u) {
          const std::string utt_id = speaker + "_u" + std::to_string(u);
          // one deterministic stream per utterance
          detail::SplitMix64 rng(spec.seed * 0x9E3779B97F4A7C15ULL +
                                 std::hash<std::string>{}(utt_id));
          auto utt = detail::make_utterance(spec, inv, severity, rng);

          const std::string base = utt_id;
          signal::write_wav(out_dir + "/" + base + ".wav", utt.samples, spec.sample_rate);
          io::write_file_atomic(out_dir + "/" + base + ".TextGrid",
                                alignment::serialize_textgrid(utt.grid));
          std::string phones_text;
          for (size_t i = 0; i < utt.decoded.size(); ++i) {
            if (i) phones_text += ' ';
            phones_text += utt.decoded[i];
          }
          io::write_file_atomic(out_dir + "/" + base + ".phones.txt", phones_text + "\n");
          gop::write_logit_matrix(out_dir + "/" + base + ".logits", utt.logits);
          gop::write_segments(out_dir + "/" + base + ".segments.csv", utt.segments);

          ManifestEntry e;
          e.utt_id = utt_id;
          e.speaker = speaker;
          e.language = language;
          e.severity = severity;
          e.sex = s % 2 == 0 ? 'M' : 'F';
          e.wav = base + ".wav";
          e.textgrid = base + ".TextGrid";
          e.phones = base + ".phones.txt";
          e.logits = base + ".logits";
          e.segments = base + ".segments.csv";
          manifest.entries.push_back(std::move(e));
        }
      }
    }
  }
  manifest.validate();
  io::write_file_atomic(out_dir + "/manifest.csv", manifest_to_csv(manifest));
  return manifest;
}

// ---- feature-space planted tables ----

struct PlantedTableSpec {
  std::vector<std::string> languages = {"en", "ko", "ta"};
  int speakers_per_severity = 2;  // per language
  int utterances_per_speaker = 4;
  int shared_features = 3;        // informative in every language
  int specific_per_language = 2;  // informative only in their own language
  int noise_features = 3;
  double shared_effect = 0.5;  // weak universal slope, in noise-std units
  double effect = 1.3;         // strong language-specific slope
  double speaker_std = 0.5;    // per-speaker random offset
  uint64_t seed = 1;
};

// Severity signal lives weakly in "shared_*" columns everywhere and
// strongly in "only_<lang>_*" columns for rows of that language alone
// (elsewhere those columns are pure noise). The language-specific columns
// therefore carry signal absent from the intersection set. The matching
// per-language feature sets are shared + own specifics.
inline FeatureTable planted_table(const PlantedTableSpec& spec) {
  detail::SplitMix64 rng(spec.seed * 0x2545F4914F6CDD1DULL + 99);
  auto gauss = [&]() {
    // Box-Muller on the deterministic stream
    const double u1 = std::max(rng.uniform(), 1e-12);
    const double u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  };

  FeatureTable t;
  for (int k = 0; k < spec.shared_features; ++k) {
    t.feature_names.push_back("shared_" + std::to_string(k));
  }
  for (const auto& lang : spec.languages) {
    for (int k = 0; k < spec.specific_per_language; ++k) {
      t.feature_names.push_back("only_" + lang + "_" + std::to_string(k));
    }
  }
  for (int k = 0; k < spec.noise_features; ++k) {
    t.feature_names.push_back("noise_" + std::to_string(k));
  }

  for (const auto& lang : spec.languages) {
    int speaker_counter = 0;
    for (int severity = 0; severity <= 3; ++severity) {
      for (int s = 0; s < spec.speakers_per_severity; ++s) {
        const std::string speaker =
            lang + "_spk" + std::to_string(++speaker_counter) + "s" + std::to_string(severity);
        std::vector<double> speaker_offset(t.feature_names.size());
        for (double& v : speaker_offset) v = spec.speaker_std * gauss();
        for (int u = 0; u < spec.utterances_per_speaker; ++u) {
          UtteranceKey key;
          key.utt_id = speaker + "_u" + std::to_string(u);
          key.speaker = speaker;
          key.language = lang;
          key.severity = severity;
          std::vector<Cell> row;
          for (size_t j = 0; j < t.feature_names.size(); ++j) {
            const std::string& name = t.feature_names[j];
            double v = speaker_offset[j] + gauss();
            if (name.rfind("shared_", 0) == 0) v += spec.shared_effect * severity;
            if (name.rfind("only_" + lang + "_", 0) == 0) v += spec.effect * severity;
            row.emplace_back(v);
          }
          t.rows.push_back(key);
          t.cells.push_back(std::move(row));
        }
      }
    }
  }
  return t;
}

inline std::map<std::string, std::vector<std::string>> planted_feature_sets(
    const PlantedTableSpec& spec) {
  std::map<std::string, std::vector<std::string>> sets;
  for (const auto& lang : spec.languages) {
    std::vector<std::string> features;
    for (int k = 0; k < spec.shared_features; ++k) {
      features.push_back("shared_" + std::to_string(k));
    }
    for (int k = 0; k < spec.specific_per_language; ++k) {
      features.push_back("only_" + lang + "_" + std::to_string(k));
    }
    sets[lang] = std::move(features);
  }
  return sets;
}

}  // namespace dyskit::pipeline

#endif  // DYSKIT_SYNTH_HPP_
