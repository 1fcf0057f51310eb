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
#include <filesystem>
#include <fstream>

#include "dyskit/extract.hpp"
#include "dyskit/gop_io.hpp"
#include "dyskit/synth.hpp"

using namespace dyskit;
using namespace dyskit::pipeline;
namespace fs = std::filesystem;

namespace {

std::string temp_dir(const std::string& name) {
  const std::string dir = (fs::temp_directory_path() / name).string();
  fs::remove_all(dir);
  return dir;
}

std::string file_bytes(const std::string& path) { return io::read_file(path); }

SynthSpec small_spec(uint64_t seed = 7) {
  SynthSpec spec;
  spec.languages = {"en"};
  spec.speakers_per_severity = 1;
  spec.utterances_per_speaker = 1;
  spec.phones_per_utterance = 8;
  spec.seed = seed;
  return spec;
}

std::map<std::string, alignment::LanguageInventory> inventories_for(
    const std::vector<std::string>& languages) {
  std::map<std::string, alignment::LanguageInventory> out;
  for (const auto& lang : languages) out[lang] = synth_inventory(lang);
  return out;
}

}  // namespace

TEST_CASE("inventory json round trip") {
  auto inv = synth_inventory("ko");
  auto back = inventory_from_json(inventory_to_json(inv));
  REQUIRE(back.language == inv.language);
  REQUIRE(back.classes == inv.classes);
  REQUIRE(back.silence_labels == inv.silence_labels);
  REQUIRE(back.corners.ae == inv.corners.ae);

  nlohmann::json bad = inventory_to_json(inv);
  bad["corner_vowels"]["i"] = "zz";
  REQUIRE_THROWS_AS(inventory_from_json(bad), Error);
}

TEST_CASE("synth corpus is byte-identical for the same seed") {
  const std::string dir_a = temp_dir("dyskit_synth_a");
  const std::string dir_b = temp_dir("dyskit_synth_b");
  auto spec = small_spec(42);
  auto manifest_a = synth_corpus(spec, dir_a);
  auto manifest_b = synth_corpus(spec, dir_b);
  REQUIRE(manifest_a.entries.size() == manifest_b.entries.size());
  REQUIRE(manifest_a.entries.size() == 4);  // 4 severities x 1 speaker x 1 utt
  for (const auto& e : manifest_a.entries) {
    for (const auto& f : {e.wav, e.textgrid, e.phones, e.logits, e.segments}) {
      INFO(f);
      REQUIRE(file_bytes(dir_a + "/" + f) == file_bytes(dir_b + "/" + f));
    }
  }
  REQUIRE(file_bytes(dir_a + "/manifest.csv") == file_bytes(dir_b + "/manifest.csv"));

  // different seed changes the audio
  auto spec2 = small_spec(43);
  const std::string dir_c = temp_dir("dyskit_synth_c");
  synth_corpus(spec2, dir_c);
  REQUIRE(file_bytes(dir_a + "/" + manifest_a.entries[0].wav) !=
          file_bytes(dir_c + "/" + manifest_a.entries[0].wav));
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  fs::remove_all(dir_c);
}

TEST_CASE("infeasible specs are rejected") {
  SynthSpec spec = small_spec();
  spec.pause_base_s = 60.0;  // pause longer than the utterance
  REQUIRE_THROWS_AS(spec.validate(), ConfigError);

  SynthSpec bad_f0 = small_spec();
  bad_f0.f0_base_hz = 460.0;
  REQUIRE_THROWS_AS(bad_f0.validate(), ConfigError);

  SynthSpec bad_sub = small_spec();
  bad_sub.substitution_base = 0.9;
  bad_sub.substitution_step = 0.2;
  REQUIRE_THROWS_AS(bad_sub.validate(), ConfigError);
}

TEST_CASE("severity-0 utterances measure clean jitter") {
  const std::string dir = temp_dir("dyskit_synth_clean");
  auto spec = small_spec(11);
  spec.utterances_per_speaker = 2;
  synth_corpus(spec, dir);
  auto manifest = manifest_from_csv(io::read_file(dir + "/manifest.csv"));
  auto outcome = extract_features(manifest, dir, inventories_for(spec.languages));
  REQUIRE(outcome.failures.empty());
  int checked = 0;
  for (size_t i = 0; i < outcome.table.n_rows(); ++i) {
    if (outcome.table.rows[i].severity != 0) continue;
    const int j = outcome.table.feature_index("jitter");
    REQUIRE(outcome.table.cells[i][j].has_value());
    INFO("utt " << outcome.table.rows[i].utt_id);
    REQUIRE(*outcome.table.cells[i][j] < 1.0);
    ++checked;
  }
  REQUIRE(checked == 2);
  fs::remove_all(dir);
}

TEST_CASE("measured jitter tracks the requested level within 10 percent") {
  // direct realization check on the vowel synthesizer via the DSP path
  for (double requested : {0.01, 0.02, 0.04}) {
    SynthSpec spec = small_spec(19);
    spec.jitter_base = requested;
    spec.jitter_step = 0.0;
    spec.vowel_dur_base_s = 0.6;  // long vowels, more periods
    spec.phones_per_utterance = 6;
    auto inv = synth_inventory("en");
    trees::detail::SplitMix64 rng(123);
    auto utt = pipeline::detail::make_utterance(spec, inv, 0, rng);
    signal::AudioBuffer buf;
    buf.sample_rate = spec.sample_rate;
    buf.samples = utt.samples;
    auto contour = signal::pitch_contour(buf);
    auto pulses = signal::pulse_train(buf, contour);
    auto vq = biomarkers::voice_quality(pulses);
    REQUIRE(vq.jitter.has_value());
    INFO("requested " << 100.0 * requested << " measured " << *vq.jitter);
    REQUIRE(*vq.jitter == Catch::Approx(100.0 * requested).epsilon(0.10));
  }
}

TEST_CASE("substitution rate 0.5 lands near PRR 50") {
  const std::string dir = temp_dir("dyskit_synth_sub");
  SynthSpec spec = small_spec(23);
  spec.substitution_base = 0.5;
  spec.substitution_step = 0.0;
  spec.utterances_per_speaker = 5;
  spec.phones_per_utterance = 10;
  synth_corpus(spec, dir);
  auto manifest = manifest_from_csv(io::read_file(dir + "/manifest.csv"));
  auto outcome = extract_features(manifest, dir, inventories_for(spec.languages));
  REQUIRE(outcome.failures.empty());
  const int j = outcome.table.feature_index("prr");
  double sum = 0.0;
  int count = 0;
  for (size_t i = 0; i < outcome.table.n_rows(); ++i) {
    REQUIRE(outcome.table.cells[i][j].has_value());
    sum += *outcome.table.cells[i][j];
    ++count;
  }
  REQUIRE(sum / count == Catch::Approx(50.0).margin(5.0));
  fs::remove_all(dir);
}

TEST_CASE("logit margins degrade monotonically with severity") {
  const std::string dir = temp_dir("dyskit_synth_gop");
  SynthSpec spec = small_spec(29);
  spec.utterances_per_speaker = 3;
  synth_corpus(spec, dir);
  auto manifest = manifest_from_csv(io::read_file(dir + "/manifest.csv"));

  gop::GopConfig cfg;
  cfg.method = gop::Method::kMaxLogit;
  std::map<int, std::vector<double>> by_severity;
  for (const auto& e : manifest.entries) {
    auto logits = gop::read_logit_matrix(dir + "/" + e.logits);
    auto segments = gop::read_segments(dir + "/" + e.segments);
    by_severity[e.severity].push_back(
        gop::score_utterance(logits, segments, cfg).utterance_score);
  }
  double prev = 1e300;
  for (int sev = 0; sev <= 3; ++sev) {
    const double m = mean(by_severity[sev]);
    REQUIRE(m < prev);
    prev = m;
  }
  fs::remove_all(dir);
}

TEST_CASE("planted table carries shared and language-specific signal") {
  PlantedTableSpec spec;
  spec.seed = 77;
  spec.utterances_per_speaker = 6;
  FeatureTable t = planted_table(spec);
  REQUIRE(t.n_rows() == 3 * 4 * 2 * 6);
  REQUIRE(t.feature_names.size() ==
          static_cast<size_t>(spec.shared_features + 3 * spec.specific_per_language +
                              spec.noise_features));

  auto tau_for = [&](const std::string& feature, const std::string& language) {
    std::vector<double> x, y;
    const int j = t.feature_index(feature);
    for (size_t i = 0; i < t.n_rows(); ++i) {
      if (t.rows[i].language != language) continue;
      x.push_back(*t.cells[i][j]);
      y.push_back(t.rows[i].severity);
    }
    return stats::kendall_tau(x, y).coefficient;
  };
  // shared features correlate with severity in every language
  for (const auto& lang : spec.languages) {
    REQUIRE(tau_for("shared_0", lang) > 0.3);
  }
  // language-specific features correlate only at home
  REQUIRE(tau_for("only_ko_0", "ko") > 0.3);
  REQUIRE(std::fabs(tau_for("only_ko_0", "en")) < 0.25);
  REQUIRE(std::fabs(tau_for("only_ko_0", "ta")) < 0.25);
  // noise correlates nowhere
  REQUIRE(std::fabs(tau_for("noise_0", "en")) < 0.25);

  // per-language sets pair with the table
  auto sets = planted_feature_sets(spec);
  REQUIRE(sets.at("en").size() ==
          static_cast<size_t>(spec.shared_features + spec.specific_per_language));

  // determinism
  FeatureTable again = planted_table(spec);
  REQUIRE(feature_table_to_csv(again) == feature_table_to_csv(t));
}
