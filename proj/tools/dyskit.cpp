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

// dyskit command line: synth / extract / gop / validate / select / train-eval.
//
// Exit codes: 0 success, 2 partial per-utterance failures, 64 usage,
// 65 invalid data or spec. Log level comes from DYSKIT_LOG
// (debug|info|warn|error|none).

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "dyskit/extract.hpp"
#include "dyskit/gop.hpp"
#include "dyskit/gop_io.hpp"
#include "dyskit/pipeline.hpp"
#include "dyskit/selection.hpp"
#include "dyskit/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dyskit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPartial = 2;
constexpr int kExitUsage = 64;
constexpr int kExitData = 65;

enum class LogLevel { kDebug = 0, kInfo, kWarn, kError, kNone };

LogLevel log_level() {
  const char* env = std::getenv("DYSKIT_LOG");
  if (env == nullptr) return LogLevel::kWarn;
  const std::string v = env;
  if (v == "debug") return LogLevel::kDebug;
  if (v == "info") return LogLevel::kInfo;
  if (v == "warn") return LogLevel::kWarn;
  if (v == "error") return LogLevel::kError;
  if (v == "none") return LogLevel::kNone;
  return LogLevel::kWarn;
}

void log_at(LogLevel level, const char* tag, const std::string& msg) {
  if (static_cast<int>(level) < static_cast<int>(log_level())) return;
  std::cerr << "dyskit " << tag << ": " << msg << "\n";
}

void log_info(const std::string& msg) { log_at(LogLevel::kInfo, "info", msg); }
void log_warn(const std::string& msg) { log_at(LogLevel::kWarn, "warn", msg); }
void log_error(const std::string& msg) { log_at(LogLevel::kError, "error", msg); }

std::string dirname_of(const std::string& path) {
  const auto parent = fs::path(path).parent_path();
  return parent.empty() ? std::string(".") : parent.string();
}

std::string replace_extension(const std::string& path, const std::string& suffix) {
  fs::path p(path);
  p.replace_extension();
  return p.string() + suffix;
}

// Resolved run configuration: JSON file merged with command-line overrides,
// echoed verbatim into every report's meta file.
struct RunConfig {
  json data = json::object();
  std::string config_dir = ".";

  static RunConfig load(const std::string& path) {
    RunConfig cfg;
    if (path.empty()) return cfg;
    try {
      cfg.data = json::parse(io::read_file(path));
    } catch (const json::exception& e) {
      throw ConfigError("config " + path + ": " + e.what());
    }
    cfg.config_dir = dirname_of(path);
    return cfg;
  }

  template <typename T>
  T get_or(const std::string& section, const std::string& key, T fallback) const {
    if (!data.contains(section) || !data[section].contains(key)) return fallback;
    try {
      return data[section][key].get<T>();
    } catch (const json::exception& e) {
      throw ConfigError("config [" + section + "." + key + "]: " + e.what());
    }
  }

  std::string resolve(const std::string& path) const {
    if (path.empty() || fs::path(path).is_absolute()) return path;
    return (fs::path(config_dir) / path).string();
  }
};

void write_meta(const std::string& out_path, const std::string& command,
                const RunConfig& cfg, const json& extra = json::object()) {
  json meta;
  meta["tool"] = "dyskit";
  meta["version"] = kVersion;
  meta["command"] = command;
  meta["config"] = cfg.data;
  for (const auto& [k, v] : extra.items()) meta[k] = v;
  io::write_file_atomic(out_path + ".meta.json", meta.dump(2) + "\n");
}

biomarkers::ExtractConfig extract_config(const RunConfig& cfg) {
  biomarkers::ExtractConfig ec;
  ec.pitch_floor_hz = cfg.get_or("extract", "pitch_floor_hz", ec.pitch_floor_hz);
  ec.pitch_ceiling_hz = cfg.get_or("extract", "pitch_ceiling_hz", ec.pitch_ceiling_hz);
  ec.frame_s = cfg.get_or("extract", "frame_s", ec.frame_s);
  ec.shift_s = cfg.get_or("extract", "shift_s", ec.shift_s);
  ec.voice_break_s = cfg.get_or("extract", "voice_break_s", ec.voice_break_s);
  ec.pause_threshold_s = cfg.get_or("extract", "pause_threshold_s", ec.pause_threshold_s);
  ec.max_formant_male_hz =
      cfg.get_or("extract", "max_formant_male_hz", ec.max_formant_male_hz);
  ec.max_formant_female_hz =
      cfg.get_or("extract", "max_formant_female_hz", ec.max_formant_female_hz);
  ec.n_formants = cfg.get_or("extract", "n_formants", ec.n_formants);
  ec.phone_tier = cfg.get_or("extract", "phone_tier", ec.phone_tier);
  return ec;
}

std::map<std::string, alignment::LanguageInventory> load_inventories(const RunConfig& cfg) {
  std::map<std::string, alignment::LanguageInventory> out;
  if (!cfg.data.contains("inventories")) {
    throw ConfigError("config: missing 'inventories' (language -> inventory json path)");
  }
  for (const auto& [lang, path] : cfg.data["inventories"].items()) {
    const std::string resolved = cfg.resolve(path.get<std::string>());
    out[lang] = pipeline::inventory_from_json(json::parse(io::read_file(resolved)));
  }
  return out;
}

// ---- synth ----

int cmd_synth(const std::string& out_dir, uint64_t seed, const RunConfig& cfg) {
  pipeline::SynthSpec spec;
  spec.seed = seed;
  spec.languages = cfg.get_or<std::vector<std::string>>("synth", "languages", spec.languages);
  spec.speakers_per_severity =
      cfg.get_or("synth", "speakers_per_severity", spec.speakers_per_severity);
  spec.utterances_per_speaker =
      cfg.get_or("synth", "utterances_per_speaker", spec.utterances_per_speaker);
  spec.phones_per_utterance =
      cfg.get_or("synth", "phones_per_utterance", spec.phones_per_utterance);
  spec.jitter_base = cfg.get_or("synth", "jitter_base", spec.jitter_base);
  spec.jitter_step = cfg.get_or("synth", "jitter_step", spec.jitter_step);
  spec.shimmer_base = cfg.get_or("synth", "shimmer_base", spec.shimmer_base);
  spec.shimmer_step = cfg.get_or("synth", "shimmer_step", spec.shimmer_step);
  spec.f0_base_hz = cfg.get_or("synth", "f0_base_hz", spec.f0_base_hz);
  spec.f0_step_hz = cfg.get_or("synth", "f0_step_hz", spec.f0_step_hz);
  spec.pause_base_s = cfg.get_or("synth", "pause_base_s", spec.pause_base_s);
  spec.pause_step_s = cfg.get_or("synth", "pause_step_s", spec.pause_step_s);
  spec.substitution_base = cfg.get_or("synth", "substitution_base", spec.substitution_base);
  spec.substitution_step = cfg.get_or("synth", "substitution_step", spec.substitution_step);
  spec.logit_margin_base = cfg.get_or("synth", "logit_margin_base", spec.logit_margin_base);
  spec.logit_margin_step = cfg.get_or("synth", "logit_margin_step", spec.logit_margin_step);

  pipeline::synth_corpus(spec, out_dir);

  // ready-to-use run config next to the corpus
  json corpus_cfg;
  for (const auto& lang : spec.languages) {
    corpus_cfg["inventories"][lang] = "inventory_" + lang + ".json";
  }
  io::write_file_atomic(out_dir + "/config.json", corpus_cfg.dump(2) + "\n");
  log_info("wrote corpus to " + out_dir);
  return kExitOk;
}

// ---- extract ----

int cmd_extract(const std::string& manifest_path, const RunConfig& cfg,
                const std::string& out_path, int jobs) {
  const auto manifest = pipeline::manifest_from_csv(io::read_file(manifest_path));
  const auto inventories = load_inventories(cfg);
  const auto outcome = pipeline::extract_features(manifest, dirname_of(manifest_path),
                                                  inventories, extract_config(cfg), jobs);

  // failed utterances keep a row (all cells NA) so the table stays aligned
  // with the manifest
  pipeline::FeatureTable table = outcome.table;
  for (const auto& [utt_id, reason] : outcome.failures) {
    for (const auto& e : manifest.entries) {
      if (e.utt_id != utt_id) continue;
      table.rows.push_back({e.utt_id, e.speaker, e.language, e.severity});
      table.cells.emplace_back(table.feature_names.size());
    }
  }
  table.sort_by_utt_id();
  io::write_file_atomic(out_path, pipeline::feature_table_to_csv(table));

  json extra;
  extra["n_utterances"] = manifest.entries.size();
  extra["n_failures"] = outcome.failures.size();
  json failures = json::array();
  for (const auto& [utt_id, reason] : outcome.failures) {
    failures.push_back({{"utt_id", utt_id}, {"reason", reason}});
    log_warn("extraction failed for " + utt_id + ": " + reason);
  }
  extra["failures"] = failures;
  write_meta(out_path, "extract", cfg, extra);
  return outcome.failures.empty() ? kExitOk : kExitPartial;
}

// ---- gop ----

int cmd_gop(const std::string& manifest_path, const RunConfig& cfg,
            const std::string& out_path) {
  const auto manifest = pipeline::manifest_from_csv(io::read_file(manifest_path));
  const std::string base = dirname_of(manifest_path);
  const double temperature = cfg.get_or("gop", "temperature", 2.0);

  struct Scored {
    const pipeline::ManifestEntry* entry;
    std::map<std::string, double> scores;  // "<method>_<norm>" -> utterance score
  };
  std::vector<Scored> scored;
  std::vector<std::pair<std::string, std::string>> failures;

  // priors from frame counts across the segment files (add-one smoothed)
  std::map<std::string, double> label_frames;
  std::vector<std::pair<const pipeline::ManifestEntry*, std::vector<gop::PhoneSegment>>>
      loaded;
  for (const auto& e : manifest.entries) {
    if (e.logits.empty() || e.segments.empty()) continue;
    try {
      auto segments = gop::read_segments(base + "/" + e.segments);
      for (const auto& s : segments) {
        label_frames[s.phoneme] += static_cast<double>(s.end_frame - s.begin_frame);
      }
      loaded.emplace_back(&e, std::move(segments));
    } catch (const Error& err) {
      failures.emplace_back(e.utt_id, err.what());
    }
  }

  for (auto& [entry, segments] : loaded) {
    try {
      const auto logits = gop::read_logit_matrix(base + "/" + entry->logits);
      std::vector<double> priors(logits.n_classes());
      double total = 0.0;
      for (size_t q = 0; q < logits.n_classes(); ++q) {
        auto it = label_frames.find(logits.class_labels[q]);
        priors[q] = 1.0 + (it != label_frames.end() ? it->second : 0.0);
        total += priors[q];
      }
      for (double& p : priors) p /= total;

      Scored s;
      s.entry = entry;
      for (auto method : gop::kAllMethods) {
        for (auto norm : gop::kAllNormalizations) {
          gop::GopConfig gc;
          gc.method = method;
          gc.normalization = norm;
          gc.temperature = temperature;
          gc.priors = priors;
          const std::string key = std::string(gop::method_name(method)) + "_" +
                                  gop::normalization_name(norm);
          s.scores[key] = gop::score_utterance(logits, segments, gc).utterance_score;
        }
      }
      scored.push_back(std::move(s));
    } catch (const Error& err) {
      failures.emplace_back(entry->utt_id, err.what());
    }
  }

  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    return a.entry->utt_id < b.entry->utt_id;
  });

  std::vector<std::string> columns;
  for (auto method : gop::kAllMethods) {
    for (auto norm : gop::kAllNormalizations) {
      columns.push_back(std::string(gop::method_name(method)) + "_" +
                        gop::normalization_name(norm));
    }
  }
  std::ostringstream out;
  out << "utt_id,speaker,language,severity";
  for (const auto& c : columns) out << ',' << c;
  out << '\n';
  for (const auto& s : scored) {
    out << s.entry->utt_id << ',' << s.entry->speaker << ',' << s.entry->language << ','
        << s.entry->severity;
    for (const auto& c : columns) out << ',' << io::format_double(s.scores.at(c));
    out << '\n';
  }
  io::write_file_atomic(out_path, out.str());

  // correlation report mirroring the method x normalization table layout
  std::ostringstream corr;
  corr << "method,normalization,tau,n\n";
  for (auto method : gop::kAllMethods) {
    for (auto norm : gop::kAllNormalizations) {
      const std::string key = std::string(gop::method_name(method)) + "_" +
                              gop::normalization_name(norm);
      std::vector<double> xs, sev;
      for (const auto& s : scored) {
        xs.push_back(s.scores.at(key));
        sev.push_back(s.entry->severity);
      }
      corr << gop::method_name(method) << ',' << gop::normalization_name(norm) << ',';
      if (xs.size() >= 2) {
        const Cell tau = gop::severity_correlation(xs, sev);
        corr << (tau ? io::format_fixed(*tau) : kMissingToken);
      } else {
        corr << kMissingToken;
      }
      corr << ',' << xs.size() << '\n';
    }
  }
  const std::string corr_path = replace_extension(out_path, ".correlation.csv");
  io::write_file_atomic(corr_path, corr.str());

  json extra;
  extra["n_scored"] = scored.size();
  extra["n_failures"] = failures.size();
  extra["correlation_report"] = corr_path;
  write_meta(out_path, "gop", cfg, extra);
  for (const auto& [utt, why] : failures) log_warn("gop failed for " + utt + ": " + why);
  return failures.empty() ? kExitOk : kExitPartial;
}

// ---- validate ----

int cmd_validate(const std::string& features_path, const RunConfig& cfg,
                 const std::string& out_path) {
  const auto table = pipeline::feature_table_from_csv(io::read_file(features_path));
  std::map<std::string, biomarkers::Direction> directions =
      biomarkers::expected_directions();
  if (cfg.data.contains("directions")) {
    for (const auto& [name, dir] : cfg.data["directions"].items()) {
      const std::string d = dir.get<std::string>();
      if (d == "up") {
        directions[name] = biomarkers::Direction::kUp;
      } else if (d == "down") {
        directions[name] = biomarkers::Direction::kDown;
      } else if (d == "either") {
        directions[name] = biomarkers::Direction::kEither;
      } else {
        throw ConfigError("directions." + name + ": bad value " + d);
      }
    }
  }
  const auto rows = pipeline::validate_features(table, directions);
  std::ostringstream out;
  out << "feature,h,h_p,tau,tau_p,status\n";
  auto cell = [](const Cell& c) {
    return c ? io::format_fixed(*c) : std::string(kMissingToken);
  };
  for (const auto& r : rows) {
    out << r.feature << ',' << cell(r.h) << ',' << cell(r.h_p) << ',' << cell(r.tau)
        << ',' << cell(r.tau_p) << ',' << pipeline::validation_symbol(r.status) << '\n';
  }
  io::write_file_atomic(out_path, out.str());
  write_meta(out_path, "validate", cfg);
  return kExitOk;
}

// ---- select ----

selection::Folds speaker_folds(const pipeline::FeatureTable& t) {
  std::map<std::string, std::vector<size_t>> by_speaker;
  for (size_t i = 0; i < t.n_rows(); ++i) by_speaker[t.rows[i].speaker].push_back(i);
  selection::Folds folds;
  for (auto& [speaker, rows] : by_speaker) folds.push_back(rows);
  return folds;
}

trees::TrainParams selection_trainer(const RunConfig& cfg) {
  trees::TrainParams p;
  p.rounds = cfg.get_or("selection", "rounds", 30);
  p.max_depth = cfg.get_or("selection", "max_depth", 3);
  p.learning_rate = cfg.get_or("selection", "learning_rate", 0.3);
  return p;
}

int cmd_select(const std::string& features_path, const std::string& method,
               const std::string& language, uint64_t seed, const RunConfig& cfg,
               const std::string& out_path) {
  auto table = pipeline::feature_table_from_csv(io::read_file(features_path));
  if (!language.empty()) {
    pipeline::FeatureTable filtered;
    filtered.feature_names = table.feature_names;
    for (size_t i = 0; i < table.n_rows(); ++i) {
      if (table.rows[i].language != language) continue;
      filtered.rows.push_back(table.rows[i]);
      filtered.cells.push_back(table.cells[i]);
    }
    table = std::move(filtered);
  }
  if (table.n_rows() == 0) throw DataError("select: no rows after the language filter");

  const trees::Matrix m = table.to_matrix();
  const std::vector<int> labels = table.severities();
  const std::vector<double> real_labels(labels.begin(), labels.end());
  const selection::Folds folds = speaker_folds(table);

  selection::SelectionResult result;
  if (method == "lasso") {
    result = selection::lasso_select(m, real_labels, folds);
  } else if (method == "elastic") {
    result = selection::elastic_net_select(m, real_labels, folds);
  } else if (method == "cluster") {
    const double cut = cfg.get_or("selection", "ward_cut", 0.5);
    result = selection::cluster_select(m, labels, cut, seed);
  } else if (method == "filter") {
    result = selection::filter_select(m, labels);
  } else if (method == "rfe") {
    result = selection::rfe_select(m, labels, folds, selection_trainer(cfg));
  } else if (method == "embedded") {
    result =
        selection::embedded_select(m, labels, cfg.get_or("selection", "top_k", 0), seed);
  } else if (method == "iterative") {
    result = selection::iterative_gain_select(m, labels, folds, selection_trainer(cfg));
  } else {
    throw ConfigError("unknown selection method '" + method + "'");
  }

  std::string listing;
  for (const auto& name : result.selected) listing += name + "\n";
  io::write_file_atomic(out_path, listing);

  std::ostringstream diag;
  diag << "feature,coefficient,cluster,importance,p_value,selected\n";
  for (const auto& d : result.diagnostics) {
    const bool sel = std::find(result.selected.begin(), result.selected.end(), d.name) !=
                     result.selected.end();
    diag << d.name << ',' << io::format_double(d.coefficient) << ',' << d.cluster << ','
         << io::format_double(d.importance) << ',' << io::format_double(d.p_value) << ','
         << (sel ? 1 : 0) << '\n';
  }
  io::write_file_atomic(replace_extension(out_path, ".diagnostics.csv"), diag.str());

  json extra;
  extra["method"] = result.method;
  extra["n_selected"] = result.selected.size();
  extra["warnings"] = result.warnings;
  if (!result.accuracy_curve.empty()) extra["accuracy_curve"] = result.accuracy_curve;
  write_meta(out_path, "select", cfg, extra);
  for (const auto& w : result.warnings) log_warn(w);
  return kExitOk;
}

// ---- train-eval ----

std::vector<std::string> read_featureset(const std::string& path) {
  std::istringstream in(io::read_file(path));
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

int cmd_train_eval(const std::string& features_path, const std::string& mode_name,
                   const std::vector<std::string>& featureset_args,
                   const std::string& language, bool distance, const RunConfig& cfg,
                   const std::string& out_path) {
  auto table = pipeline::feature_table_from_csv(io::read_file(features_path));

  std::map<std::string, std::vector<std::string>> sets;
  for (const auto& arg : featureset_args) {
    const size_t eq = arg.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("--featureset expects lang=path, got '" + arg + "'");
    }
    sets[arg.substr(0, eq)] = read_featureset(arg.substr(eq + 1));
  }
  if (sets.empty()) {
    // default: every language keeps every column
    std::set<std::string> langs;
    for (const auto& r : table.rows) langs.insert(r.language);
    for (const auto& l : langs) sets[l] = table.feature_names;
  }

  const auto mode = pipeline::assembly_mode_from_string(mode_name);
  pipeline::FeatureTable assembled = pipeline::assemble(sets, table, mode, language);
  if (distance) {
    assembled =
        pipeline::distance_transform(assembled, pipeline::HealthyStats::compute(assembled));
  }

  std::vector<trees::TrainParams> grid;
  const int rounds = cfg.get_or("train", "rounds", 300);
  const auto depths = cfg.get_or<std::vector<int>>("train", "depths", {4, 5, 6});
  const auto etas = cfg.get_or<std::vector<double>>("train", "etas", {0.3, 0.4, 0.5});
  for (int depth : depths) {
    for (double eta : etas) {
      trees::TrainParams p;
      p.rounds = rounds;
      p.max_depth = depth;
      p.learning_rate = eta;
      grid.push_back(p);
    }
  }
  const int inner = cfg.get_or("train", "inner_folds", 3);
  pipeline::CvReport report = pipeline::loso_cv(assembled, grid, inner);
  report.config_echo = cfg.data.dump();

  std::ostringstream out;
  out << "dyskit train-eval report\n";
  out << "version: " << kVersion << "\n";
  out << "mode: " << mode_name << (distance ? " (distance transform)" : "") << "\n";
  out << "config: " << report.config_echo << "\n";
  out << "speakers: " << report.metrics.speakers.size()
      << " utterances: " << assembled.n_rows() << "\n";
  out << "accuracy: " << io::format_fixed(report.metrics.accuracy) << "\n";
  out << "mean_weighted_f1: " << io::format_fixed(report.metrics.mean_weighted_f1) << "\n";

  std::map<std::string, std::pair<double, int>> by_language;
  {
    std::map<std::string, std::string> speaker_language;
    for (const auto& r : assembled.rows) speaker_language[r.speaker] = r.language;
    for (const auto& s : report.metrics.speakers) {
      auto& [sum, count] = by_language[speaker_language[s.speaker]];
      sum += s.weighted_f1;
      ++count;
    }
  }
  out << "per_language_weighted_f1:\n";
  for (const auto& [lang, agg] : by_language) {
    out << "  " << lang << ": " << io::format_fixed(agg.first / agg.second) << "\n";
  }
  out << "per_speaker:\n";
  for (const auto& s : report.metrics.speakers) {
    out << "  " << s.speaker << " f1=" << io::format_fixed(s.weighted_f1)
        << " n=" << s.n_utterances << " correct=" << s.n_correct << "\n";
  }
  out << "grid_choices:\n";
  for (const auto& c : report.fold_grid_choice) out << "  " << c << "\n";
  io::write_file_atomic(out_path, out.str());

  std::ostringstream csv;
  csv << "speaker,weighted_f1,n_utterances,n_correct\n";
  for (const auto& s : report.metrics.speakers) {
    csv << s.speaker << ',' << io::format_fixed(s.weighted_f1) << ',' << s.n_utterances
        << ',' << s.n_correct << '\n';
  }
  io::write_file_atomic(replace_extension(out_path, ".speakers.csv"), csv.str());

  // final model on all rows, with the most frequently chosen grid point
  std::map<std::string, int> votes;
  for (const auto& c : report.fold_grid_choice) {
    const size_t at = c.find(": ");
    if (at != std::string::npos) votes[c.substr(at + 2)] += 1;
  }
  trees::TrainParams final_params = grid[0];
  int best_votes = -1;
  for (const auto& p : grid) {
    const int v = votes[pipeline::detail::params_tag(p)];
    if (v > best_votes) {
      best_votes = v;
      final_params = p;
    }
  }
  final_params.n_classes = 4;
  auto ensemble = trees::train(assembled.to_matrix(), assembled.severities(), final_params);
  io::write_file_atomic(replace_extension(out_path, ".ensemble.txt"),
                        trees::serialize_ensemble(ensemble));

  json extra;
  extra["accuracy"] = report.metrics.accuracy;
  extra["mean_weighted_f1"] = report.metrics.mean_weighted_f1;
  extra["final_params"] = pipeline::detail::params_tag(final_params);
  write_meta(out_path, "train-eval", cfg, extra);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dyskit: speech biomarkers and multilingual dysarthria severity toolkit"};
  app.require_subcommand(1);

  std::string manifest, config_path, out, features, method, mode, language;
  std::vector<std::string> featuresets;
  uint64_t seed = 1;
  int jobs = 1;
  bool distance = false;

  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  synth->add_option("--out", out, "output directory")->required();
  synth->add_option("--seed", seed, "random seed");
  synth->add_option("--config", config_path, "config json");

  auto* extract = app.add_subcommand("extract", "extract the 35 biomarkers per utterance");
  extract->add_option("--manifest", manifest, "dataset manifest csv")->required();
  extract->add_option("--config", config_path, "config json with inventories")->required();
  extract->add_option("--out", out, "output features csv")->required();
  extract->add_option("--jobs", jobs, "parallel workers");

  auto* gop_cmd = app.add_subcommand("gop", "score pronunciations from logit files");
  gop_cmd->add_option("--manifest", manifest, "dataset manifest csv")->required();
  gop_cmd->add_option("--config", config_path, "config json");
  gop_cmd->add_option("--out", out, "output scores csv")->required();

  auto* validate = app.add_subcommand("validate", "statistical + clinical feature validation");
  validate->add_option("--features", features, "features csv")->required();
  validate->add_option("--config", config_path, "config json (optional directions)");
  validate->add_option("--out", out, "validation report csv")->required();

  auto* select = app.add_subcommand("select", "feature selection");
  select->add_option("--features", features, "features csv")->required();
  select
      ->add_option("--method", method, "lasso|elastic|cluster|filter|rfe|embedded|iterative")
      ->required()
      ->check(CLI::IsMember(
          {"lasso", "elastic", "cluster", "filter", "rfe", "embedded", "iterative"}));
  select->add_option("--language", language, "restrict to one language");
  select->add_option("--seed", seed, "random seed");
  select->add_option("--config", config_path, "config json");
  select->add_option("--out", out, "feature-set file (one name per line)")->required();

  auto* train_eval = app.add_subcommand("train-eval", "LOSO severity classification");
  train_eval->add_option("--features", features, "features csv")->required();
  train_eval->add_option("--mode", mode, "monolingual|intersection|union|proposed")
      ->required()
      ->check(CLI::IsMember({"monolingual", "intersection", "union", "proposed"}));
  train_eval->add_option("--featureset", featuresets,
                         "per-language feature set, lang=path (repeatable)");
  train_eval->add_option("--language", language, "language for monolingual mode");
  train_eval->add_flag("--distance", distance, "apply the healthy-distance transform");
  train_eval->add_option("--config", config_path, "config json");
  train_eval->add_option("--out", out, "report path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    const RunConfig cfg = RunConfig::load(config_path);
    if (synth->parsed()) return cmd_synth(out, seed, cfg);
    if (extract->parsed()) return cmd_extract(manifest, cfg, out, jobs);
    if (gop_cmd->parsed()) return cmd_gop(manifest, cfg, out);
    if (validate->parsed()) return cmd_validate(features, cfg, out);
    if (select->parsed()) return cmd_select(features, method, language, seed, cfg, out);
    if (train_eval->parsed()) {
      return cmd_train_eval(features, mode, featuresets, language, distance, cfg, out);
    }
  } catch (const Error& e) {
    log_error(e.what());
    std::cerr << "dyskit: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
