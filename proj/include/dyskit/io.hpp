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

#ifndef DYSKIT_IO_HPP_
#define DYSKIT_IO_HPP_

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dyskit/common.hpp"

namespace dyskit::io {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open file: " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// All output files go through temp-then-rename so readers never observe a
// partial write.
inline void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write file: " + tmp);
    out << content;
    if (!out) throw FormatError("short write: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw FormatError("cannot rename " + tmp + " -> " + path);
  }
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      out.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  out.push_back(field);
  return out;
}

// Fields must stay comma- and newline-free; the table formats here never
// need quoting.
inline void check_csv_field(const std::string& field) {
  if (field.find(',') != std::string::npos || field.find('\n') != std::string::npos) {
    throw DataError("csv field may not contain comma or newline: '" + field + "'");
  }
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Fixed 6-decimal form for report files where diff-stability matters more
// than full precision.
inline std::string format_fixed(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

inline double parse_double(const std::string& s, const std::string& context) {
  try {
    size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw FormatError(context + ": expected number, got '" + s + "'");
  }
}

inline long parse_long(const std::string& s, const std::string& context) {
  try {
    size_t used = 0;
    long v = std::stol(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw FormatError(context + ": expected integer, got '" + s + "'");
  }
}

}  // namespace dyskit::io

#endif  // DYSKIT_IO_HPP_
