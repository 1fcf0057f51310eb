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

#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "dyskit/biomarkers.hpp"
#include "support.hpp"

using namespace dyskit;
using namespace dyskit::biomarkers;
using dyskit::alignment::AlignedPair;
using dyskit::alignment::kGap;

namespace {

signal::PulseTrain train_from_periods(const std::vector<double>& periods_s,
                                      const std::vector<double>& amps = {},
                                      double total = 0.0) {
  signal::PulseTrain t;
  double at = 0.0;
  t.times.push_back(at);
  for (double p : periods_s) {
    at += p;
    t.times.push_back(at);
  }
  t.amplitudes = amps.empty() ? std::vector<double>(t.times.size(), 1.0) : amps;
  t.total_duration = total > 0.0 ? total : at;
  return t;
}

alignment::LanguageInventory test_inventory() {
  alignment::LanguageInventory inv;
  inv.language = "en";
  for (const char* v : {"IY", "IH", "AH", "AW", "EH", "AY", "AO", "AE", "W", "UW", "AA"}) {
    inv.classes[v] = alignment::PhoneClass::kVowel;
  }
  for (const char* c : {"HH", "L", "R", "SH", "N", "S", "T", "K", "M", "P"}) {
    inv.classes[c] = alignment::PhoneClass::kConsonant;
  }
  inv.corners = {"IY", "UW", "AA", "AE"};
  inv.validate();
  return inv;
}

alignment::Alignment grid_of(const std::vector<std::pair<std::string, double>>& phones) {
  alignment::Alignment g;
  alignment::Tier tier;
  tier.name = "phones";
  double t = 0.0;
  for (const auto& [label, dur] : phones) {
    tier.intervals.push_back({t, t + dur, label});
    t += dur;
  }
  g.xmin = 0.0;
  g.xmax = t;
  g.tiers.push_back(tier);
  return g;
}

std::vector<AlignedPair> paper_alignment_table() {
  // the published worked example, gaps included
  const std::vector<std::string> canonical = {"HH", "IY", "W", "IH", "L", "AH", "L",
                                              "AW", "AH", kGap, "R", "EH", "L", "AY"};
  const std::vector<std::string> decoded = {"SH", "IY", "W", "AO", "L", "AH", "L",
                                            "AW", "AE", "N", "L", "IY", kGap, "AY"};
  std::vector<AlignedPair> pairs;
  for (size_t i = 0; i < canonical.size(); ++i) pairs.push_back({canonical[i], decoded[i]});
  return pairs;
}

}  // namespace

TEST_CASE("registry holds exactly the 35 features with directions") {
  REQUIRE(feature_registry().size() == 35);
  for (const auto& name : feature_registry()) {
    REQUIRE(expected_directions().count(name) == 1);
  }
}

TEST_CASE("jitter worked examples") {
  auto constant = voice_quality(train_from_periods({0.010, 0.010, 0.010}));
  REQUIRE(*constant.jitter == Catch::Approx(0.0).margin(1e-9));

  auto perturbed = voice_quality(train_from_periods({0.010, 0.011, 0.010}));
  REQUIRE(*perturbed.abs_jitter == Catch::Approx(0.001).epsilon(1e-12));
  REQUIRE(*perturbed.jitter == Catch::Approx(9.68).margin(0.005));

  auto flat_amp = voice_quality(train_from_periods({0.010, 0.010, 0.010}));
  REQUIRE(*flat_amp.shimmer == Catch::Approx(0.0).margin(1e-9));

  auto five_equal = voice_quality(train_from_periods(std::vector<double>(5, 0.008)));
  REQUIRE(*five_equal.ppq == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("too few pulses yield missing perturbation features") {
  auto two_pulses = voice_quality(train_from_periods({0.010}));
  REQUIRE_FALSE(two_pulses.jitter.has_value());
  REQUIRE_FALSE(two_pulses.shimmer.has_value());

  auto four_periods = voice_quality(train_from_periods({0.01, 0.01, 0.01, 0.01}));
  REQUIRE(four_periods.jitter.has_value());
  REQUIRE_FALSE(four_periods.ppq.has_value());  // needs a 5-period window
}

TEST_CASE("voice breaks counted and excluded from perturbation pooling") {
  // periods: 10, 10, 30 (break), 10 ms
  auto vq = voice_quality(train_from_periods({0.010, 0.010, 0.030, 0.010}, {}, 0.5));
  REQUIRE(*vq.num_voice_breaks == 1.0);
  REQUIRE(*vq.pct_voice_breaks == Catch::Approx(100.0 * 0.030 / 0.5));
  // runs are [10,10] and [10]; the only diff pair is |10-10|
  REQUIRE(*vq.jitter == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("jitter scale invariances") {
  std::vector<double> periods = {0.010, 0.012, 0.009, 0.011, 0.010, 0.0115};
  auto base = voice_quality(train_from_periods(periods));
  // multiplying all periods by k scales absJitter by k, relative unchanged
  std::vector<double> scaled;
  for (double p : periods) scaled.push_back(1.4 * p);
  auto vq = voice_quality(train_from_periods(scaled), 1.4 * kVoiceBreakSec);
  REQUIRE(*vq.abs_jitter == Catch::Approx(1.4 * *base.abs_jitter).epsilon(1e-9));
  REQUIRE(*vq.jitter == Catch::Approx(*base.jitter).epsilon(1e-9));

  // scaling amplitudes leaves relative shimmer unchanged
  std::vector<double> amps = {1.0, 0.8, 1.1, 0.9, 1.05, 0.95, 1.0};
  auto s1 = voice_quality(train_from_periods(periods, amps));
  std::vector<double> amps2;
  for (double a : amps) amps2.push_back(3.0 * a);
  auto s2 = voice_quality(train_from_periods(periods, amps2));
  REQUIRE(*s1.shimmer == Catch::Approx(*s2.shimmer).epsilon(1e-9));
}

TEST_CASE("injected period perturbation strictly increases relative jitter") {
  double prev = -1.0;
  for (double level : {0.001, 0.005, 0.01, 0.02, 0.04}) {
    std::vector<double> periods;
    for (int i = 0; i < 60; ++i) {
      periods.push_back(0.01 * (1.0 + (i % 2 ? level : -level)));
    }
    auto vq = voice_quality(train_from_periods(periods));
    REQUIRE(*vq.jitter > prev);
    prev = *vq.jitter;
  }
}

TEST_CASE("phoneme accuracy reproduces the published worked example") {
  auto inv = test_inventory();
  auto acc = phoneme_accuracy(paper_alignment_table(), inv);
  REQUIRE(*acc.crr == Catch::Approx(40.00).margin(1e-9));
  REQUIRE(*acc.vrr == Catch::Approx(62.50).margin(1e-9));
  REQUIRE(*acc.prr == Catch::Approx(53.85).margin(0.005));
}

TEST_CASE("phoneme accuracy end-to-end from the raw sequences") {
  auto inv = test_inventory();
  auto canonical = alignment::PhoneSequence::from_labels(
      {"HH", "IY", "W", "IH", "L", "AH", "L", "AW", "AH", "R", "EH", "L", "AY"}, inv);
  auto decoded = alignment::PhoneSequence::from_labels(
      {"SH", "IY", "W", "AO", "L", "AH", "L", "AW", "AE", "N", "L", "IY", "AY"}, inv);
  auto acc = phoneme_accuracy(alignment::align_sequences(canonical, decoded), inv);
  REQUIRE(*acc.crr == Catch::Approx(40.00).margin(1e-9));
  REQUIRE(*acc.vrr == Catch::Approx(62.50).margin(1e-9));
  REQUIRE(*acc.prr == Catch::Approx(53.85).margin(0.005));
}

TEST_CASE("phoneme accuracy extremes and missing rules") {
  auto inv = test_inventory();
  std::vector<AlignedPair> identical = {{"S", "S"}, {"IY", "IY"}, {"T", "T"}};
  auto acc = phoneme_accuracy(identical, inv);
  REQUIRE(*acc.crr == 100.0);
  REQUIRE(*acc.vrr == 100.0);
  REQUIRE(*acc.prr == 100.0);

  std::vector<AlignedPair> disjoint = {{"S", "T"}, {"IY", "AA"}, {"T", "K"}};
  auto none = phoneme_accuracy(disjoint, inv);
  REQUIRE(*none.crr == 0.0);
  REQUIRE(*none.vrr == 0.0);
  REQUIRE(*none.prr == 0.0);

  std::vector<AlignedPair> no_vowels = {{"S", "S"}, {"T", "K"}};
  auto nv = phoneme_accuracy(no_vowels, inv);
  REQUIRE(nv.crr.has_value());
  REQUIRE_FALSE(nv.vrr.has_value());
}

TEST_CASE("vowel space hand-derived cases") {
  CornerFormants c;
  c.f1_i = 300;
  c.f2_i = 2300;
  c.f1_a = 800;
  c.f2_a = 1300;
  c.f1_u = 300;
  c.f2_u = 800;
  auto vs = vowel_space(c);
  REQUIRE(*vs.vsa_tri == Catch::Approx(375000.0).margin(1e-6));
  REQUIRE(*vs.fcr == Catch::Approx(2700.0 / 3100.0).epsilon(1e-12));
  REQUIRE(*vs.vai == Catch::Approx(3100.0 / 2700.0).epsilon(1e-12));
  REQUIRE(*vs.f2_ratio == Catch::Approx(2.875).epsilon(1e-12));
  REQUIRE_FALSE(vs.vsa_quad.has_value());  // ae not provided

  c.f1_ae = 700;
  c.f2_ae = 1800;
  auto vs2 = vowel_space(c);
  REQUIRE(*vs2.vsa_quad == Catch::Approx(450000.0).margin(1e-6));
}

TEST_CASE("FCR times VAI is one for any valid corner set") {
  std::mt19937 rng(71);
  std::uniform_real_distribution<double> f1(200.0, 1000.0);
  std::uniform_real_distribution<double> f2(800.0, 2600.0);
  for (int trial = 0; trial < 1000; ++trial) {
    CornerFormants c;
    c.f1_i = f1(rng);
    c.f2_i = f2(rng);
    c.f1_u = f1(rng);
    c.f2_u = f2(rng);
    c.f1_a = f1(rng);
    c.f2_a = f2(rng);
    auto vs = vowel_space(c);
    REQUIRE(*vs.fcr * *vs.vai == Catch::Approx(1.0).margin(1e-9));
    REQUIRE(*vs.vsa_tri >= 0.0);
  }
}

TEST_CASE("VSA is invariant under cyclic rotation of the vertices") {
  std::mt19937 rng(73);
  std::uniform_real_distribution<double> f1(200.0, 1000.0);
  std::uniform_real_distribution<double> f2(800.0, 2600.0);
  for (int trial = 0; trial < 50; ++trial) {
    CornerFormants c;
    c.f1_i = f1(rng);
    c.f2_i = f2(rng);
    c.f1_u = f1(rng);
    c.f2_u = f2(rng);
    c.f1_a = f1(rng);
    c.f2_a = f2(rng);
    c.f1_ae = f1(rng);
    c.f2_ae = f2(rng);

    CornerFormants tri_rot = c;  // (i,a,u) -> (a,u,i)
    tri_rot.f1_i = c.f1_a;
    tri_rot.f2_i = c.f2_a;
    tri_rot.f1_a = c.f1_u;
    tri_rot.f2_a = c.f2_u;
    tri_rot.f1_u = c.f1_i;
    tri_rot.f2_u = c.f2_i;
    REQUIRE(*vowel_space(tri_rot).vsa_tri ==
            Catch::Approx(*vowel_space(c).vsa_tri).epsilon(1e-9));

    CornerFormants quad_rot = c;  // (i,ae,a,u) -> (ae,a,u,i)
    quad_rot.f1_i = c.f1_ae;
    quad_rot.f2_i = c.f2_ae;
    quad_rot.f1_ae = c.f1_a;
    quad_rot.f2_ae = c.f2_a;
    quad_rot.f1_a = c.f1_u;
    quad_rot.f2_a = c.f2_u;
    quad_rot.f1_u = c.f1_i;
    quad_rot.f2_u = c.f2_i;
    REQUIRE(*vowel_space(quad_rot).vsa_quad ==
            Catch::Approx(*vowel_space(c).vsa_quad).epsilon(1e-9));
  }
}

TEST_CASE("fluency worked examples") {
  auto inv = test_inventory();
  // 10 vowel intervals in 4 seconds, no pauses
  std::vector<std::pair<std::string, double>> phones(10, {"AA", 0.4});
  auto fl = fluency(grid_of(phones), inv);
  REQUIRE(*fl.speaking_rate == Catch::Approx(2.5));
  REQUIRE(*fl.articulation_rate == Catch::Approx(2.5));
  REQUIRE(*fl.num_pauses == 0.0);
  REQUIRE_FALSE(fl.avg_pause_dur.has_value());

  // same but one second of pause: articulation rate excludes it
  std::vector<std::pair<std::string, double>> with_pause(10, {"AA", 0.3});
  with_pause.push_back({"sil", 1.0});
  auto fp = fluency(grid_of(with_pause), inv);
  REQUIRE(*fp.speaking_rate == Catch::Approx(2.5));
  REQUIRE(*fp.articulation_rate == Catch::Approx(10.0 / 3.0));
  REQUIRE(*fp.num_pauses == 1.0);
  REQUIRE(*fp.avg_pause_dur == Catch::Approx(1.0));
  // speaking rate <= articulation rate when pauses exist
  REQUIRE(*fp.speaking_rate <= *fp.articulation_rate);

  // sub-threshold silences are not pauses
  std::vector<std::pair<std::string, double>> short_sil = {
      {"AA", 0.4}, {"sil", 0.1}, {"AA", 0.4}};
  auto fs = fluency(grid_of(short_sil), inv);
  REQUIRE(*fs.num_pauses == 0.0);
}

TEST_CASE("contour statistics exclude zero frames") {
  auto all_voiced = nonzero_stats({200, 200, 200});
  REQUIRE(*all_voiced.mean == 200.0);
  REQUIRE(*all_voiced.median == 200.0);
  REQUIRE(*all_voiced.min == 200.0);
  REQUIRE(*all_voiced.max == 200.0);
  REQUIRE(*all_voiced.std_dev == 0.0);

  auto with_zeros = nonzero_stats({100, 0, 300});
  REQUIRE(*with_zeros.mean == Catch::Approx(200.0));

  auto energy = nonzero_stats({1, 4});
  REQUIRE(*energy.std_dev == Catch::Approx(1.5));

  auto silent = nonzero_stats({0, 0, 0});
  REQUIRE_FALSE(silent.mean.has_value());
}

TEST_CASE("rhythm worked examples") {
  auto inv = test_inventory();
  // equal vocalic durations: VarcoV and nPVIV are zero
  auto eq = rhythm(grid_of({{"AA", 0.2}, {"T", 0.1}, {"IY", 0.2}, {"T", 0.1}, {"UW", 0.2}}), inv);
  REQUIRE(*eq.varco_v == Catch::Approx(0.0).margin(1e-9));
  REQUIRE(*eq.npvi_v == Catch::Approx(0.0).margin(1e-9));

  // vocalic durations 100 and 200 ms: nPVI = 100 * |100-200| / 150
  auto two = rhythm(grid_of({{"AA", 0.1}, {"T", 0.1}, {"IY", 0.2}}), inv);
  REQUIRE(*two.npvi_v == Catch::Approx(66.6667).margin(0.005));

  // vocalic 100, 200, 300 ms: VarcoV = 100 * std/mean = 40.82
  auto three =
      rhythm(grid_of({{"AA", 0.1}, {"T", 0.1}, {"IY", 0.2}, {"T", 0.1}, {"UW", 0.3}}), inv);
  REQUIRE(*three.varco_v == Catch::Approx(40.82).margin(0.005));

  // an all-vocalic utterance has %V = 1
  auto allv = rhythm(grid_of({{"AA", 0.3}, {"IY", 0.2}}), inv);
  REQUIRE(*allv.pct_v == Catch::Approx(1.0));

  // adjacent same-class intervals merge into one run
  auto merged = rhythm(grid_of({{"AA", 0.1}, {"IY", 0.1}, {"T", 0.1}, {"UW", 0.2}}), inv);
  // runs: [AA IY] = 0.2 and [UW] = 0.2 -> equal durations
  REQUIRE(*merged.npvi_v == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("nPVI stays in range and rPVI matches the direct loop") {
  std::mt19937 rng(79);
  std::uniform_real_distribution<double> dur(0.02, 0.5);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> d(2 + trial % 6);
    for (double& v : d) v = dur(rng);
    const double n = npvi(d);
    REQUIRE(n >= 0.0);
    REQUIRE(n < 200.0);
    double direct = 0.0;
    for (size_t k = 1; k < d.size(); ++k) direct += std::fabs(d[k] - d[k - 1]);
    direct /= (d.size() - 1);
    REQUIRE(rpvi(d) == Catch::Approx(direct).epsilon(1e-12));
  }
}

namespace {

// A clean synthetic utterance whose 35 features are all computable: four
// corner vowels as two-resonance sounds, two consonant noise bursts, and three
// clear pauses.
struct SyntheticUtterance {
  signal::AudioBuffer audio;
  alignment::Alignment grid;
  std::vector<std::string> decoded;
};

SyntheticUtterance make_clean_utterance() {
  const int sr = 16000;
  SyntheticUtterance out;
  out.audio.sample_rate = sr;
  alignment::Tier tier;
  tier.name = "phones";

  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  double t = 0.0;
  auto append = [&](const std::string& label, const std::vector<double>& samples) {
    tier.intervals.push_back({t, t + samples.size() / double(sr), label});
    out.audio.samples.insert(out.audio.samples.end(), samples.begin(), samples.end());
    t += samples.size() / double(sr);
    if (label != "sil") out.decoded.push_back(label);
  };
  auto vowel = [&](double f1, double f2) {
    return testsup::make_vowel(120.0, f1, f2, 0.35, sr).samples;
  };
  auto noise_burst = [&](double seconds) {
    std::vector<double> s(static_cast<size_t>(seconds * sr));
    for (double& v : s) v = u(rng);
    return s;
  };
  auto silence = [&](double seconds) {
    return std::vector<double>(static_cast<size_t>(seconds * sr), 0.0);
  };

  append("sil", silence(0.25));
  append("IY", vowel(300, 2300));
  append("T", noise_burst(0.12));
  append("AA", vowel(750, 1250));
  append("sil", silence(0.3));
  append("UW", vowel(320, 850));
  append("T", noise_burst(0.12));
  append("AE", vowel(680, 1750));
  append("sil", silence(0.2));

  out.grid.xmin = 0.0;
  out.grid.xmax = t;
  out.grid.tiers.push_back(tier);
  return out;
}

}  // namespace

TEST_CASE("extract_all produces all 35 features on a clean utterance") {
  auto utt = make_clean_utterance();
  auto inv = test_inventory();
  UtteranceInputs in;
  in.audio = &utt.audio;
  in.grid = &utt.grid;
  in.inventory = &inv;
  in.decoded_phones = &utt.decoded;
  auto fv = extract_all(in);
  std::vector<std::string> missing;
  for (const auto& name : feature_registry()) {
    if (!fv.get(name).has_value()) missing.push_back(name);
  }
  CAPTURE(missing);
  REQUIRE(fv.present_count() == 35);
  // decoded phones equal canonical: perfect recognition rates
  REQUIRE(*fv.get("crr") == 100.0);
  REQUIRE(*fv.get("prr") == 100.0);
  // clean synthesis: tiny jitter, two long pauses
  REQUIRE(*fv.get("jitter") < 1.0);
  REQUIRE(*fv.get("num_pauses") == 3.0);
  REQUIRE(*fv.get("f0_median") == Catch::Approx(120.0).margin(3.0));
}

TEST_CASE("extract_all without decoded phones misses exactly the accuracy rates") {
  auto utt = make_clean_utterance();
  auto inv = test_inventory();
  UtteranceInputs in;
  in.audio = &utt.audio;
  in.grid = &utt.grid;
  in.inventory = &inv;
  auto fv = extract_all(in);
  REQUIRE(fv.present_count() == 32);
  REQUIRE_FALSE(fv.get("crr").has_value());
  REQUIRE_FALSE(fv.get("vrr").has_value());
  REQUIRE_FALSE(fv.get("prr").has_value());
}

TEST_CASE("fully unvoiced audio misses voice-quality and F0 features") {
  auto noise = testsup::make_noise(1.5, 9);
  auto inv = test_inventory();
  auto grid = grid_of({{"T", 0.5}, {"S", 0.5}, {"K", 0.5}});
  UtteranceInputs in;
  in.audio = &noise;
  in.grid = &grid;
  in.inventory = &inv;
  auto fv = extract_all(in);
  for (const char* name : {"jitter", "ppq", "shimmer", "apq", "hnr", "cpp",
                           "num_voice_breaks", "pct_voice_breaks", "f0_mean",
                           "f0_median", "f0_std", "f0_min", "f0_max"}) {
    INFO(name);
    REQUIRE_FALSE(fv.get(name).has_value());
  }
  // energy statistics still present
  REQUIRE(fv.get("energy_mean").has_value());
}
