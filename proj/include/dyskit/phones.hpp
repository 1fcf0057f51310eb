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

#ifndef DYSKIT_PHONES_HPP_
#define DYSKIT_PHONES_HPP_

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dyskit/common.hpp"
#include "dyskit/textgrid.hpp"

namespace dyskit::alignment {

enum class PhoneClass { kVowel, kConsonant, kSilence, kOther };

// Gap symbol used in alignment pairs and reports.
inline constexpr const char* kGap = "*";

// Per-language phone classification plus the corner-vowel labels used by the
// vowel-space features.
struct LanguageInventory {
  std::string language;
  std::map<std::string, PhoneClass> classes;
  std::set<std::string> silence_labels = {"", "sil", "sp"};
  struct Corners {
    std::string i, u, a, ae;
  } corners;

  PhoneClass classify(const std::string& label) const {
    if (silence_labels.count(label)) return PhoneClass::kSilence;
    auto it = classes.find(label);
    if (it == classes.end()) {
      throw DataError("inventory '" + language + "': unclassified phone label '" +
                      label + "'");
    }
    return it->second;
  }

  void validate() const {
    for (const std::string& c : {corners.i, corners.u, corners.a, corners.ae}) {
      auto it = classes.find(c);
      if (it == classes.end() || it->second != PhoneClass::kVowel) {
        throw ConfigError("inventory '" + language + "': corner vowel '" + c +
                          "' missing or not a vowel");
      }
    }
  }
};

struct PhoneSequence {
  std::vector<std::string> labels;
  std::vector<PhoneClass> classes;

  static PhoneSequence from_labels(const std::vector<std::string>& labels,
                                   const LanguageInventory& inv) {
    PhoneSequence seq;
    seq.labels = labels;
    seq.classes.reserve(labels.size());
    for (const auto& l : labels) seq.classes.push_back(inv.classify(l));
    return seq;
  }

  size_t size() const { return labels.size(); }
};

// One column of a global alignment; kGap on exactly one side marks an
// insertion or deletion.
struct AlignedPair {
  std::string canonical;
  std::string decoded;

  bool is_match() const { return canonical == decoded; }
};

// Global edit-distance alignment with unit costs (match 0, substitution 1,
// insertion 1, deletion 1). Equal-cost traces resolve in the order
// match > substitution > deletion > insertion.
inline std::vector<AlignedPair> align_sequences(const PhoneSequence& canonical,
                                                const PhoneSequence& decoded) {
  const size_t n = canonical.size();
  const size_t m = decoded.size();
  if (n == 0 || m == 0) throw DataError("align_sequences: empty sequence");

  std::vector<std::vector<int>> d(n + 1, std::vector<int>(m + 1, 0));
  for (size_t i = 0; i <= n; ++i) d[i][0] = static_cast<int>(i);
  for (size_t j = 0; j <= m; ++j) d[0][j] = static_cast<int>(j);
  for (size_t i = 1; i <= n; ++i) {
    for (size_t j = 1; j <= m; ++j) {
      const int sub =
          d[i - 1][j - 1] + (canonical.labels[i - 1] == decoded.labels[j - 1] ? 0 : 1);
      d[i][j] = std::min({sub, d[i - 1][j] + 1, d[i][j - 1] + 1});
    }
  }

  std::vector<AlignedPair> pairs;
  size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && canonical.labels[i - 1] == decoded.labels[j - 1] &&
        d[i][j] == d[i - 1][j - 1]) {
      pairs.push_back({canonical.labels[i - 1], decoded.labels[j - 1]});
      --i, --j;
    } else if (i > 0 && j > 0 && d[i][j] == d[i - 1][j - 1] + 1) {
      pairs.push_back({canonical.labels[i - 1], decoded.labels[j - 1]});
      --i, --j;
    } else if (i > 0 && d[i][j] == d[i - 1][j] + 1) {
      pairs.push_back({canonical.labels[i - 1], kGap});
      --i;
    } else {
      pairs.push_back({kGap, decoded.labels[j - 1]});
      --j;
    }
  }
  std::reverse(pairs.begin(), pairs.end());
  return pairs;
}

inline int alignment_cost(const std::vector<AlignedPair>& pairs) {
  int cost = 0;
  for (const auto& p : pairs) cost += p.is_match() ? 0 : 1;
  return cost;
}

// Syllable count of the phone tier: one syllable per vowel nucleus.
inline int syllable_count(const Alignment& grid, const LanguageInventory& inv,
                          const std::string& phone_tier = "phones") {
  const Tier* tier = grid.find_tier(phone_tier);
  if (tier == nullptr) throw DataError("syllable_count: missing tier '" + phone_tier + "'");
  int n = 0;
  for (const auto& iv : tier->intervals) {
    n += inv.classify(iv.label) == PhoneClass::kVowel;
  }
  return n;
}

}  // namespace dyskit::alignment

#endif  // DYSKIT_PHONES_HPP_
