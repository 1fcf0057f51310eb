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

// Dataset model and the classification pipeline: healthy-distance transform,
// statistical+clinical feature validation, multilingual table assembly
// (intersection / union / proposed), leave-one-speaker-out cross-validation,
// and speaker-averaged weighted-F1 metrics.

#ifndef DYSKIT_PIPELINE_HPP_
#define DYSKIT_PIPELINE_HPP_

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dyskit/biomarkers.hpp"
#include "dyskit/gbdt.hpp"
#include "dyskit/io.hpp"
#include "dyskit/stats.hpp"

namespace dyskit::pipeline {

struct UtteranceKey {
  std::string utt_id;
  std::string speaker;
  std::string language;
  int severity = 0;  // 0 healthy, 1 mild, 2 moderate, 3 severe
};

struct FeatureTable {
  std::vector<std::string> feature_names;
  std::vector<UtteranceKey> rows;
  std::vector<std::vector<Cell>> cells;  // row-major [row][feature]

  size_t n_rows() const { return rows.size(); }
  size_t n_features() const { return feature_names.size(); }

  int feature_index(const std::string& name) const {
    for (size_t j = 0; j < feature_names.size(); ++j) {
      if (feature_names[j] == name) return static_cast<int>(j);
    }
    return -1;
  }

  std::vector<Cell> column(size_t j) const {
    std::vector<Cell> out(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) out[i] = cells[i][j];
    return out;
  }

  std::vector<int> severities() const {
    std::vector<int> out(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) out[i] = rows[i].severity;
    return out;
  }

  trees::Matrix to_matrix() const {
    trees::Matrix m;
    m.feature_names = feature_names;
    m.columns.resize(feature_names.size());
    for (size_t j = 0; j < feature_names.size(); ++j) m.columns[j] = column(j);
    return m;
  }

  void validate() const {
    std::set<std::string> seen;
    for (const auto& r : rows) {
      if (!seen.insert(r.utt_id).second) {
        throw DataError("feature table: duplicate utterance id " + r.utt_id);
      }
    }
    for (const auto& row : cells) {
      if (row.size() != feature_names.size()) throw DataError("feature table: ragged row");
    }
  }

  void sort_by_utt_id() {
    std::vector<size_t> order(rows.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      return rows[a].utt_id < rows[b].utt_id;
    });
    std::vector<UtteranceKey> new_rows;
    std::vector<std::vector<Cell>> new_cells;
    for (size_t i : order) {
      new_rows.push_back(rows[i]);
      new_cells.push_back(cells[i]);
    }
    rows = std::move(new_rows);
    cells = std::move(new_cells);
  }
};

// ---- CSV round trip ("NA" is the missing marker) ----

inline std::string feature_table_to_csv(const FeatureTable& t) {
  std::ostringstream out;
  out << "utt_id,speaker,language,severity";
  for (const auto& name : t.feature_names) {
    io::check_csv_field(name);
    out << ',' << name;
  }
  out << '\n';
  for (size_t i = 0; i < t.n_rows(); ++i) {
    const auto& r = t.rows[i];
    io::check_csv_field(r.utt_id);
    io::check_csv_field(r.speaker);
    io::check_csv_field(r.language);
    out << r.utt_id << ',' << r.speaker << ',' << r.language << ',' << r.severity;
    for (const auto& cell : t.cells[i]) {
      out << ',' << (cell ? io::format_double(*cell) : kMissingToken);
    }
    out << '\n';
  }
  return out.str();
}

inline FeatureTable feature_table_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("feature table: empty csv");
  auto header = io::split_csv_line(line);
  if (header.size() < 5 || header[0] != "utt_id" || header[1] != "speaker" ||
      header[2] != "language" || header[3] != "severity") {
    throw FormatError("feature table: bad header");
  }
  FeatureTable t;
  t.feature_names.assign(header.begin() + 4, header.end());
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = io::split_csv_line(line);
    if (fields.size() != header.size()) {
      throw FormatError("feature table line " + std::to_string(line_no) +
                        ": wrong column count");
    }
    UtteranceKey key;
    key.utt_id = fields[0];
    key.speaker = fields[1];
    key.language = fields[2];
    key.severity = static_cast<int>(
        io::parse_long(fields[3], "feature table line " + std::to_string(line_no)));
    std::vector<Cell> row;
    for (size_t j = 4; j < fields.size(); ++j) {
      if (fields[j] == kMissingToken) {
        row.emplace_back();
      } else {
        row.emplace_back(io::parse_double(
            fields[j], "feature table line " + std::to_string(line_no)));
      }
    }
    t.rows.push_back(std::move(key));
    t.cells.push_back(std::move(row));
  }
  t.validate();
  return t;
}

// ---- dataset manifest ----

struct ManifestEntry {
  std::string utt_id, speaker, language;
  int severity = 0;
  char sex = 'M';
  std::string wav, textgrid, phones, logits, segments;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;

  void validate() const {
    std::set<std::string> ids;
    std::map<std::string, std::pair<std::string, int>> speaker_info;
    for (const auto& e : entries) {
      if (!ids.insert(e.utt_id).second) {
        throw DataError("manifest: duplicate utterance id " + e.utt_id);
      }
      if (e.severity < 0 || e.severity > 3) {
        throw DataError("manifest: severity out of range for " + e.utt_id);
      }
      auto [it, inserted] =
          speaker_info.try_emplace(e.speaker, std::make_pair(e.language, e.severity));
      if (!inserted && it->second != std::make_pair(e.language, e.severity)) {
        throw DataError("manifest: speaker " + e.speaker +
                        " has inconsistent language/severity");
      }
    }
  }
};

inline std::string manifest_to_csv(const DatasetManifest& m) {
  std::ostringstream out;
  out << "utt_id,speaker,language,severity,sex,wav,textgrid,phones,logits,segments\n";
  for (const auto& e : m.entries) {
    for (const auto& f : {e.utt_id, e.speaker, e.language, e.wav, e.textgrid, e.phones,
                          e.logits, e.segments}) {
      io::check_csv_field(f);
    }
    out << e.utt_id << ',' << e.speaker << ',' << e.language << ',' << e.severity << ','
        << e.sex << ',' << e.wav << ',' << e.textgrid << ',' << e.phones << ','
        << e.logits << ',' << e.segments << '\n';
  }
  return out.str();
}

inline DatasetManifest manifest_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("manifest: empty csv");
  const auto header = io::split_csv_line(line);
  if (header.size() != 10 || header[0] != "utt_id") {
    throw FormatError("manifest: bad header");
  }
  DatasetManifest m;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = io::split_csv_line(line);
    if (f.size() != 10) {
      throw FormatError("manifest line " + std::to_string(line_no) + ": wrong column count");
    }
    ManifestEntry e;
    e.utt_id = f[0];
    e.speaker = f[1];
    e.language = f[2];
    e.severity = static_cast<int>(
        io::parse_long(f[3], "manifest line " + std::to_string(line_no)));
    if (f[4] != "M" && f[4] != "F") {
      throw FormatError("manifest line " + std::to_string(line_no) + ": sex must be M or F");
    }
    e.sex = f[4][0];
    e.wav = f[5];
    e.textgrid = f[6];
    e.phones = f[7];
    e.logits = f[8];
    e.segments = f[9];
    m.entries.push_back(std::move(e));
  }
  m.validate();
  return m;
}

// ---- healthy-distance transform ----

struct HealthyStats {
  // (language, feature) -> (mean, population std) over severity-0 rows
  std::map<std::pair<std::string, std::string>, std::pair<double, double>> stats;

  static HealthyStats compute(const FeatureTable& t) {
    HealthyStats hs;
    std::map<std::pair<std::string, std::string>, std::vector<double>> pools;
    for (size_t i = 0; i < t.n_rows(); ++i) {
      if (t.rows[i].severity != 0) continue;
      for (size_t j = 0; j < t.n_features(); ++j) {
        if (t.cells[i][j]) {
          pools[{t.rows[i].language, t.feature_names[j]}].push_back(*t.cells[i][j]);
        }
      }
    }
    for (const auto& [key, values] : pools) {
      hs.stats[key] = {mean(values), population_std(values)};
    }
    return hs;
  }
};

// Distance from the healthy distribution: sigma/|f - mu| beyond one healthy
// standard deviation, 1 inside it. Outputs in (0, 1]; missing stays missing.
inline FeatureTable distance_transform(const FeatureTable& t, const HealthyStats& hs) {
  FeatureTable out = t;
  for (size_t i = 0; i < t.n_rows(); ++i) {
    for (size_t j = 0; j < t.n_features(); ++j) {
      if (!t.cells[i][j]) continue;
      const auto key = std::make_pair(t.rows[i].language, t.feature_names[j]);
      auto it = hs.stats.find(key);
      if (it == hs.stats.end()) {
        throw DataError("distance_transform: no healthy stats for (" + key.first + ", " +
                        key.second + ")");
      }
      const auto [mu, sigma] = it->second;
      const double dev = std::fabs(*t.cells[i][j] - mu);
      out.cells[i][j] = dev > sigma ? sigma / dev : 1.0;
    }
  }
  return out;
}

// ---- feature validation (statistical + clinical) ----

enum class ValidationStatus { kX, kTriangle, kO };

inline char validation_symbol(ValidationStatus s) {
  switch (s) {
    case ValidationStatus::kX: return 'X';
    case ValidationStatus::kTriangle: return 'T';
    case ValidationStatus::kO: return 'O';
  }
  return '?';
}

struct ValidationRow {
  std::string feature;
  Cell h, h_p;      // Kruskal-Wallis
  Cell tau, tau_p;  // Kendall
  ValidationStatus status = ValidationStatus::kX;
};

// X when either test misses significance (or is undefined); O when both are
// significant and the tau sign matches the expected direction; TRIANGLE when
// significant but clinically misdirected.
inline std::vector<ValidationRow> validate_features(
    const FeatureTable& t,
    const std::map<std::string, biomarkers::Direction>& directions,
    double p_threshold = 0.05) {
  std::vector<ValidationRow> out;
  for (size_t j = 0; j < t.n_features(); ++j) {
    const std::string& name = t.feature_names[j];
    auto dir_it = directions.find(name);
    if (dir_it == directions.end()) {
      throw ConfigError("validate_features: no expected direction for '" + name + "'");
    }
    ValidationRow row;
    row.feature = name;

    std::vector<double> values, sev;
    std::map<int, std::vector<double>> groups;
    for (size_t i = 0; i < t.n_rows(); ++i) {
      if (!t.cells[i][j]) continue;
      values.push_back(*t.cells[i][j]);
      sev.push_back(t.rows[i].severity);
      groups[t.rows[i].severity].push_back(*t.cells[i][j]);
    }
    if (groups.size() < 2) {
      out.push_back(row);  // X: not testable
      continue;
    }
    try {
      std::vector<std::vector<double>> gv;
      for (auto& [s, g] : groups) gv.push_back(g);
      const auto kw = stats::kruskal_wallis(gv);
      row.h = kw.h;
      row.h_p = kw.p_value;
      const auto kt = stats::kendall_tau(values, sev);
      row.tau = kt.coefficient;
      row.tau_p = kt.p_value;
      if (*row.h_p < p_threshold && *row.tau_p < p_threshold) {
        const auto dir = dir_it->second;
        const bool matches = dir == biomarkers::Direction::kEither ||
                             (dir == biomarkers::Direction::kUp && *row.tau > 0.0) ||
                             (dir == biomarkers::Direction::kDown && *row.tau < 0.0);
        row.status = matches ? ValidationStatus::kO : ValidationStatus::kTriangle;
      }
    } catch (const DataError&) {
      // constant feature: stays X
    }
    out.push_back(row);
  }
  return out;
}

// ---- multilingual assembly ----

enum class AssemblyMode { kIntersection, kUnion, kProposed, kMonolingual };

inline AssemblyMode assembly_mode_from_string(const std::string& s) {
  if (s == "intersection") return AssemblyMode::kIntersection;
  if (s == "union") return AssemblyMode::kUnion;
  if (s == "proposed") return AssemblyMode::kProposed;
  if (s == "monolingual") return AssemblyMode::kMonolingual;
  throw ConfigError("unknown assembly mode '" + s + "'");
}

// Builds the experiment table from per-language feature sets. PROPOSED keeps
// the union of columns but blanks a cell to MISSING when the feature is not
// in the row's language set.
inline FeatureTable assemble(
    const std::map<std::string, std::vector<std::string>>& per_language,
    const FeatureTable& full, AssemblyMode mode, const std::string& mono_language = "") {
  if (per_language.empty()) throw DataError("assemble: no language feature sets");
  for (const auto& [lang, features] : per_language) {
    if (features.empty()) throw DataError("assemble: empty feature set for language " + lang);
    for (const auto& f : features) {
      if (full.feature_index(f) < 0) {
        throw DataError("assemble: unknown feature '" + f + "' for language " + lang);
      }
    }
  }

  // column order follows the full table for determinism
  std::set<std::string> union_set, inter_set;
  for (const auto& [lang, features] : per_language) {
    union_set.insert(features.begin(), features.end());
  }
  if (!per_language.empty()) {
    inter_set = std::set<std::string>(per_language.begin()->second.begin(),
                                      per_language.begin()->second.end());
    for (const auto& [lang, features] : per_language) {
      std::set<std::string> fs(features.begin(), features.end());
      std::set<std::string> kept;
      for (const auto& f : inter_set) {
        if (fs.count(f)) kept.insert(f);
      }
      inter_set = std::move(kept);
    }
  }

  FeatureTable out;
  const std::set<std::string>* wanted = nullptr;
  std::set<std::string> mono_set;
  switch (mode) {
    case AssemblyMode::kIntersection:
      if (inter_set.empty()) {
        std::string langs;
        for (const auto& [lang, f] : per_language) langs += (langs.empty() ? "" : ", ") + lang;
        throw DataError("assemble: empty intersection across languages: " + langs);
      }
      wanted = &inter_set;
      break;
    case AssemblyMode::kUnion:
    case AssemblyMode::kProposed:
      wanted = &union_set;
      break;
    case AssemblyMode::kMonolingual: {
      auto it = per_language.find(mono_language);
      if (it == per_language.end()) {
        throw DataError("assemble: no feature set for language " + mono_language);
      }
      mono_set = std::set<std::string>(it->second.begin(), it->second.end());
      wanted = &mono_set;
      break;
    }
  }
  for (const auto& name : full.feature_names) {
    if (wanted->count(name)) out.feature_names.push_back(name);
  }

  for (size_t i = 0; i < full.n_rows(); ++i) {
    const auto& key = full.rows[i];
    if (mode == AssemblyMode::kMonolingual && key.language != mono_language) continue;
    const std::vector<std::string>* lang_set = nullptr;
    if (mode == AssemblyMode::kProposed) {
      auto it = per_language.find(key.language);
      if (it == per_language.end()) {
        throw DataError("assemble: no feature set for language " + key.language);
      }
      lang_set = &it->second;
    }
    std::vector<Cell> row;
    for (const auto& name : out.feature_names) {
      Cell v = full.cells[i][full.feature_index(name)];
      if (lang_set != nullptr &&
          std::find(lang_set->begin(), lang_set->end(), name) == lang_set->end()) {
        v = std::nullopt;
      }
      row.push_back(v);
    }
    out.rows.push_back(key);
    out.cells.push_back(std::move(row));
  }
  return out;
}

// ---- metrics ----

struct SpeakerScore {
  std::string speaker;
  int n_utterances = 0;
  int n_correct = 0;
  double weighted_f1 = 0.0;  // percent
};

struct MetricsReport {
  std::vector<SpeakerScore> speakers;
  double mean_weighted_f1 = 0.0;  // percent, unweighted mean over speakers
  double accuracy = 0.0;          // percent, over utterances
};

// Class-support-weighted F1 for one speaker's utterances.
inline double weighted_f1_percent(const std::vector<int>& truth,
                                  const std::vector<int>& pred) {
  if (truth.empty() || truth.size() != pred.size()) {
    throw DataError("weighted_f1: empty or mismatched inputs");
  }
  std::set<int> classes(truth.begin(), truth.end());
  double f1_sum = 0.0;
  for (int c : classes) {
    int tp = 0, fp = 0, fn = 0, support = 0;
    for (size_t i = 0; i < truth.size(); ++i) {
      const bool t = truth[i] == c, p = pred[i] == c;
      tp += t && p;
      fp += !t && p;
      fn += t && !p;
      support += t;
    }
    const double precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
    const double recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
    const double f1 =
        precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    f1_sum += f1 * support / truth.size();
  }
  return 100.0 * f1_sum;
}

// Groups per-utterance predictions by speaker; the headline number is the
// unweighted mean of per-speaker weighted F1.
inline MetricsReport metrics(const std::vector<UtteranceKey>& keys,
                             const std::vector<int>& truth, const std::vector<int>& pred) {
  if (keys.empty() || keys.size() != truth.size() || keys.size() != pred.size()) {
    throw DataError("metrics: empty or mismatched inputs");
  }
  std::map<std::string, std::vector<size_t>> by_speaker;
  for (size_t i = 0; i < keys.size(); ++i) by_speaker[keys[i].speaker].push_back(i);

  MetricsReport rep;
  int correct = 0;
  for (const auto& [speaker, idx] : by_speaker) {
    std::vector<int> t, p;
    SpeakerScore s;
    s.speaker = speaker;
    for (size_t i : idx) {
      t.push_back(truth[i]);
      p.push_back(pred[i]);
      s.n_correct += truth[i] == pred[i];
    }
    s.n_utterances = static_cast<int>(idx.size());
    s.weighted_f1 = weighted_f1_percent(t, p);
    rep.mean_weighted_f1 += s.weighted_f1;
    correct += s.n_correct;
    rep.speakers.push_back(std::move(s));
  }
  rep.mean_weighted_f1 /= by_speaker.size();
  rep.accuracy = 100.0 * correct / keys.size();
  return rep;
}

// ---- leave-one-speaker-out cross-validation ----

struct CvReport {
  MetricsReport metrics;
  std::vector<int> predictions;  // aligned with the table's rows
  std::string config_echo;
  std::vector<std::string> fold_grid_choice;  // per speaker fold
};

namespace detail {

inline trees::Matrix matrix_rows(const FeatureTable& t, const std::vector<size_t>& rows) {
  trees::Matrix m;
  m.feature_names = t.feature_names;
  m.columns.resize(t.n_features());
  for (size_t j = 0; j < t.n_features(); ++j) {
    m.columns[j].reserve(rows.size());
    for (size_t i : rows) m.columns[j].push_back(t.cells[i][j]);
  }
  return m;
}

inline std::string params_tag(const trees::TrainParams& p) {
  std::ostringstream out;
  out << "rounds=" << p.rounds << ",depth=" << p.max_depth << ",eta=" << p.learning_rate;
  return out.str();
}

// inner speaker-grouped CV accuracy of one grid point
inline double inner_cv_accuracy(const FeatureTable& t, const std::vector<size_t>& rows,
                                const trees::TrainParams& params, int n_inner) {
  std::vector<std::string> speakers;
  for (size_t i : rows) {
    if (std::find(speakers.begin(), speakers.end(), t.rows[i].speaker) == speakers.end()) {
      speakers.push_back(t.rows[i].speaker);
    }
  }
  const int k = std::min<int>(n_inner, static_cast<int>(speakers.size()));
  if (k < 2) return 0.0;
  int hits = 0, total = 0;
  for (int fold = 0; fold < k; ++fold) {
    std::set<std::string> held;
    for (size_t s = fold; s < speakers.size(); s += k) held.insert(speakers[s]);
    std::vector<size_t> train_rows, test_rows;
    for (size_t i : rows) {
      (held.count(t.rows[i].speaker) ? test_rows : train_rows).push_back(i);
    }
    if (train_rows.empty() || test_rows.empty()) continue;
    std::vector<int> train_y;
    for (size_t i : train_rows) train_y.push_back(t.rows[i].severity);
    auto ens = trees::train(matrix_rows(t, train_rows), train_y, params);
    for (size_t i : test_rows) {
      std::vector<Cell> row = t.cells[i];
      hits += ens.predict_class(row) == t.rows[i].severity;
      ++total;
    }
  }
  return total > 0 ? static_cast<double>(hits) / total : 0.0;
}

}  // namespace detail

// LOSO: each speaker is held out once; the grid point is chosen by nested
// speaker-grouped CV inside the training speakers (no test leakage into the
// grid choice). Fold disjointness is asserted on every fold.
inline CvReport loso_cv(const FeatureTable& t, const std::vector<trees::TrainParams>& grid,
                        int n_inner_folds = 3, int n_classes = 4) {
  t.validate();
  if (grid.empty()) throw ConfigError("loso_cv: empty parameter grid");
  std::vector<std::string> speakers;
  for (const auto& r : t.rows) {
    if (std::find(speakers.begin(), speakers.end(), r.speaker) == speakers.end()) {
      speakers.push_back(r.speaker);
    }
  }
  if (speakers.size() < 2) throw DataError("loso_cv: need >= 2 speakers");

  CvReport report;
  report.predictions.assign(t.n_rows(), -1);
  for (const auto& heldout : speakers) {
    std::vector<size_t> train_rows, test_rows;
    for (size_t i = 0; i < t.n_rows(); ++i) {
      (t.rows[i].speaker == heldout ? test_rows : train_rows).push_back(i);
    }
    // speaker-disjointness invariant
    for (size_t i : train_rows) {
      if (t.rows[i].speaker == heldout) throw DataError("loso_cv: fold leakage");
    }

    trees::TrainParams best = grid[0];
    if (grid.size() > 1) {
      double best_acc = -1.0;
      for (const auto& params : grid) {
        trees::TrainParams p = params;
        p.n_classes = n_classes;
        const double acc = detail::inner_cv_accuracy(t, train_rows, p, n_inner_folds);
        if (acc > best_acc) {
          best_acc = acc;
          best = params;
        }
      }
    }
    best.n_classes = n_classes;
    report.fold_grid_choice.push_back(heldout + ": " + detail::params_tag(best));

    std::vector<int> train_y;
    for (size_t i : train_rows) train_y.push_back(t.rows[i].severity);
    auto ens = trees::train(detail::matrix_rows(t, train_rows), train_y, best);
    for (size_t i : test_rows) {
      report.predictions[i] = ens.predict_class(t.cells[i]);
    }
  }
  report.metrics = metrics(t.rows, t.severities(), report.predictions);
  return report;
}

}  // namespace dyskit::pipeline

#endif  // DYSKIT_PIPELINE_HPP_
