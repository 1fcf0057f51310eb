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

#ifndef DYSKIT_TEXTGRID_HPP_
#define DYSKIT_TEXTGRID_HPP_

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "dyskit/common.hpp"

namespace dyskit::alignment {

struct Interval {
  double xmin = 0.0;
  double xmax = 0.0;
  std::string label;

  bool operator==(const Interval&) const = default;
};

struct Tier {
  std::string name;
  std::vector<Interval> intervals;

  bool operator==(const Tier&) const = default;
};

// Parsed TextGrid: interval tiers only (point tiers are skipped on read).
struct Alignment {
  double xmin = 0.0;
  double xmax = 0.0;
  std::vector<Tier> tiers;

  bool operator==(const Alignment&) const = default;

  double total_duration() const { return xmax - xmin; }

  const Tier* find_tier(const std::string& name) const {
    for (const auto& t : tiers) {
      if (t.name == name) return &t;
    }
    return nullptr;
  }
};

namespace detail {

// Uniform token stream over the long and short TextGrid dialects. Long-form
// structural lines ("item [1]:", "intervals: size = 3") collapse to their
// embedded value or nothing; "key = value" lines yield the value; short-form
// lines are bare values.
class GridScanner {
 public:
  explicit GridScanner(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      std::string t = trim(line);
      if (t.empty()) continue;
      // pure structural headers carry no value
      if (t.back() == ':' && t.find('=') == std::string::npos) continue;
      const size_t eq = t.find('=');
      std::string value = eq == std::string::npos ? t : trim(t.substr(eq + 1));
      if (value.find("<exists>") != std::string::npos) value = "<exists>";
      if (value.empty()) continue;
      tokens_.push_back({value, line_no});
    }
  }

  bool done() const { return pos_ >= tokens_.size(); }
  int line() const {
    return pos_ < tokens_.size() ? tokens_[pos_].line : last_line_;
  }

  std::string next_string(const char* what) {
    if (done()) throw FormatError(std::string("textgrid: unexpected end of input, expected ") + what);
    std::string v = tokens_[pos_].text;
    last_line_ = tokens_[pos_].line;
    ++pos_;
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') {
      v = v.substr(1, v.size() - 2);
      // Praat escapes embedded quotes by doubling them
      std::string out;
      for (size_t i = 0; i < v.size(); ++i) {
        if (v[i] == '"' && i + 1 < v.size() && v[i + 1] == '"') ++i;
        out.push_back(v[i]);
      }
      return out;
    }
    return v;
  }

  double next_number(const char* what) {
    const int at = line();
    std::string v = next_string(what);
    try {
      size_t used = 0;
      double x = std::stod(v, &used);
      if (used == 0) throw std::invalid_argument(v);
      return x;
    } catch (const std::exception&) {
      throw FormatError("textgrid line " + std::to_string(at) + ": expected number for " +
                        what + ", got '" + v + "'");
    }
  }

 private:
  struct Token {
    std::string text;
    int line;
  };

  static std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
  }

  std::vector<Token> tokens_;
  size_t pos_ = 0;
  int last_line_ = 0;
};

}  // namespace detail

// Parses long- or short-form TextGrid text. Interval tiers are kept, point
// tiers skipped. Structural problems raise FormatError with a line number.
inline Alignment parse_textgrid(const std::string& text) {
  if (text.find("ooTextFile") == std::string::npos ||
      text.find("TextGrid") == std::string::npos) {
    throw FormatError("textgrid line 1: missing ooTextFile/TextGrid header");
  }
  detail::GridScanner scan(text);
  // skip header values ("ooTextFile", "TextGrid")
  scan.next_string("file type");
  scan.next_string("object class");

  Alignment grid;
  grid.xmin = scan.next_number("grid xmin");
  grid.xmax = scan.next_number("grid xmax");
  if (grid.xmax < grid.xmin) {
    throw FormatError("textgrid line " + std::to_string(scan.line()) + ": grid xmin > xmax");
  }
  std::string exists = scan.next_string("tiers flag");
  if (exists != "<exists>") throw FormatError("textgrid: expected <exists> tiers flag");
  const int n_tiers = static_cast<int>(scan.next_number("tier count"));
  for (int t = 0; t < n_tiers; ++t) {
    const std::string cls = scan.next_string("tier class");
    Tier tier;
    tier.name = scan.next_string("tier name");
    scan.next_number("tier xmin");
    scan.next_number("tier xmax");
    const int count_line = scan.line();
    const int n_items = static_cast<int>(scan.next_number("item count"));
    if (n_items < 0) {
      throw FormatError("textgrid line " + std::to_string(count_line) + ": negative item count");
    }
    if (cls == "IntervalTier") {
      for (int i = 0; i < n_items; ++i) {
        Interval iv;
        const int at = scan.line();
        iv.xmin = scan.next_number("interval xmin");
        iv.xmax = scan.next_number("interval xmax");
        iv.label = scan.next_string("interval text");
        if (iv.xmin > iv.xmax) {
          throw FormatError("textgrid line " + std::to_string(at) + ": interval xmin > xmax");
        }
        if (!tier.intervals.empty() && iv.xmin < tier.intervals.back().xmax - 1e-9) {
          throw FormatError("textgrid line " + std::to_string(at) +
                            ": overlapping intervals in tier '" + tier.name + "'");
        }
        tier.intervals.push_back(iv);
      }
      grid.tiers.push_back(std::move(tier));
    } else if (cls == "TextTier") {
      for (int i = 0; i < n_items; ++i) {
        scan.next_number("point time");
        scan.next_string("point mark");
      }
    } else {
      throw FormatError("textgrid line " + std::to_string(scan.line()) +
                        ": unknown tier class '" + cls + "'");
    }
  }
  return grid;
}

namespace detail {

inline std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    out.push_back(c);
    if (c == '"') out.push_back('"');
  }
  out.push_back('"');
  return out;
}

inline std::string format_time(double t) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", t);
  return buf;
}

}  // namespace detail

// Long-form serialization; parse(serialize(g)) == g.
inline std::string serialize_textgrid(const Alignment& grid) {
  std::ostringstream out;
  out << "File type = \"ooTextFile\"\n";
  out << "Object class = \"TextGrid\"\n\n";
  out << "xmin = " << detail::format_time(grid.xmin) << "\n";
  out << "xmax = " << detail::format_time(grid.xmax) << "\n";
  out << "tiers? <exists>\n";
  out << "size = " << grid.tiers.size() << "\n";
  out << "item []:\n";
  for (size_t t = 0; t < grid.tiers.size(); ++t) {
    const Tier& tier = grid.tiers[t];
    out << "    item [" << (t + 1) << "]:\n";
    out << "        class = \"IntervalTier\"\n";
    out << "        name = " << detail::quote(tier.name) << "\n";
    out << "        xmin = " << detail::format_time(grid.xmin) << "\n";
    out << "        xmax = " << detail::format_time(grid.xmax) << "\n";
    out << "        intervals: size = " << tier.intervals.size() << "\n";
    for (size_t i = 0; i < tier.intervals.size(); ++i) {
      const Interval& iv = tier.intervals[i];
      out << "        intervals [" << (i + 1) << "]:\n";
      out << "            xmin = " << detail::format_time(iv.xmin) << "\n";
      out << "            xmax = " << detail::format_time(iv.xmax) << "\n";
      out << "            text = " << detail::quote(iv.label) << "\n";
    }
  }
  return out.str();
}

}  // namespace dyskit::alignment

#endif  // DYSKIT_TEXTGRID_HPP_
