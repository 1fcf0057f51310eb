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

// Manifest-driven feature extraction: reads each utterance's files, computes
// the 35 biomarkers with speaker-level corner-vowel imputation, and returns
// a feature table ordered by utterance id. Utterance failures are collected,
// not thrown. Rows extract independently, optionally across threads.

#ifndef DYSKIT_EXTRACT_HPP_
#define DYSKIT_EXTRACT_HPP_

#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dyskit/biomarkers.hpp"
#include "dyskit/pipeline.hpp"
#include "dyskit/textgrid.hpp"
#include "dyskit/wav.hpp"

namespace dyskit::pipeline {

struct ExtractionOutcome {
  FeatureTable table;
  std::vector<std::pair<std::string, std::string>> failures;  // utt_id, reason
};

namespace detail {

inline std::string resolve_path(const std::string& base_dir, const std::string& path) {
  if (path.empty()) return path;
  std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(base_dir) / p).string();
}

inline std::vector<std::string> read_phones_file(const std::string& path) {
  std::istringstream in(io::read_file(path));
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

struct UtteranceScratch {
  bool ok = false;
  std::string error;
  signal::AudioBuffer audio;
  alignment::Alignment grid;
  std::vector<std::string> decoded;
  biomarkers::CornerFormants corners;
};

inline Cell mean_cell(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  return mean(v);
}

}  // namespace detail

inline ExtractionOutcome extract_features(
    const DatasetManifest& manifest, const std::string& base_dir,
    const std::map<std::string, alignment::LanguageInventory>& inventories,
    const biomarkers::ExtractConfig& cfg = {}, int jobs = 1) {
  manifest.validate();
  const size_t n = manifest.entries.size();
  std::vector<detail::UtteranceScratch> scratch(n);

  auto load_one = [&](size_t i) {
    const auto& e = manifest.entries[i];
    auto& s = scratch[i];
    try {
      auto inv_it = inventories.find(e.language);
      if (inv_it == inventories.end()) {
        throw ConfigError("no inventory for language " + e.language);
      }
      s.audio = signal::read_wav(detail::resolve_path(base_dir, e.wav));
      s.grid = alignment::parse_textgrid(
          io::read_file(detail::resolve_path(base_dir, e.textgrid)));
      if (!e.phones.empty()) {
        s.decoded = detail::read_phones_file(detail::resolve_path(base_dir, e.phones));
      }
      s.corners = biomarkers::measure_corners(s.audio, s.grid, inv_it->second, e.sex, cfg);
      s.ok = true;
    } catch (const Error& err) {
      s.error = err.what();
    }
  };

  if (jobs <= 1) {
    for (size_t i = 0; i < n; ++i) load_one(i);
  } else {
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    for (int w = 0; w < jobs; ++w) {
      pool.emplace_back([&]() {
        for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) load_one(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  // speaker-level corner means for imputation
  std::map<std::string, std::vector<const biomarkers::CornerFormants*>> by_speaker;
  for (size_t i = 0; i < n; ++i) {
    if (scratch[i].ok) by_speaker[manifest.entries[i].speaker].push_back(&scratch[i].corners);
  }
  std::map<std::string, biomarkers::CornerFormants> speaker_corners;
  for (const auto& [speaker, list] : by_speaker) {
    auto collect = [&](auto member) {
      std::vector<double> vals;
      for (const auto* c : list) {
        if ((*c).*member) vals.push_back(*((*c).*member));
      }
      return detail::mean_cell(vals);
    };
    biomarkers::CornerFormants m;
    m.f1_i = collect(&biomarkers::CornerFormants::f1_i);
    m.f2_i = collect(&biomarkers::CornerFormants::f2_i);
    m.f1_u = collect(&biomarkers::CornerFormants::f1_u);
    m.f2_u = collect(&biomarkers::CornerFormants::f2_u);
    m.f1_a = collect(&biomarkers::CornerFormants::f1_a);
    m.f2_a = collect(&biomarkers::CornerFormants::f2_a);
    m.f1_ae = collect(&biomarkers::CornerFormants::f1_ae);
    m.f2_ae = collect(&biomarkers::CornerFormants::f2_ae);
    speaker_corners[speaker] = m;
  }

  ExtractionOutcome out;
  out.table.feature_names = biomarkers::feature_registry();
  std::vector<std::vector<Cell>> rows(n);
  std::vector<bool> extracted(n, false);

  auto extract_one = [&](size_t i) {
    if (!scratch[i].ok) return;
    const auto& e = manifest.entries[i];
    try {
      biomarkers::UtteranceInputs in;
      in.audio = &scratch[i].audio;
      in.grid = &scratch[i].grid;
      in.inventory = &inventories.at(e.language);
      in.decoded_phones = scratch[i].decoded.empty() ? nullptr : &scratch[i].decoded;
      in.sex = e.sex;
      in.speaker_fallback = &speaker_corners.at(e.speaker);
      auto fv = biomarkers::extract_all(in, cfg);
      std::vector<Cell> row;
      for (const auto& name : biomarkers::feature_registry()) row.push_back(fv.get(name));
      rows[i] = std::move(row);
      extracted[i] = true;
    } catch (const Error& err) {
      scratch[i].ok = false;
      scratch[i].error = err.what();
    }
  };
  if (jobs <= 1) {
    for (size_t i = 0; i < n; ++i) extract_one(i);
  } else {
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    for (int w = 0; w < jobs; ++w) {
      pool.emplace_back([&]() {
        for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) extract_one(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  for (size_t i = 0; i < n; ++i) {
    const auto& e = manifest.entries[i];
    if (extracted[i]) {
      out.table.rows.push_back({e.utt_id, e.speaker, e.language, e.severity});
      out.table.cells.push_back(std::move(rows[i]));
    } else {
      out.failures.emplace_back(e.utt_id, scratch[i].error);
    }
  }
  out.table.sort_by_utt_id();
  return out;
}

}  // namespace dyskit::pipeline

#endif  // DYSKIT_EXTRACT_HPP_
