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

// Logit matrix files are a CSV of frame rows with a JSON sidecar
// (<path>.json) carrying the class labels and frame shift. Segment files are
// CSV with a "label,begin_frame,end_frame" header.

#ifndef DYSKIT_GOP_IO_HPP_
#define DYSKIT_GOP_IO_HPP_

#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dyskit/gop.hpp"
#include "dyskit/io.hpp"

namespace dyskit::gop {

inline void write_logit_matrix(const std::string& path, const LogitMatrix& m) {
  nlohmann::json meta;
  meta["class_labels"] = m.class_labels;
  meta["frame_shift"] = m.frame_shift;
  io::write_file_atomic(path + ".json", meta.dump(2) + "\n");

  std::ostringstream out;
  for (size_t f = 0; f < m.n_frames; ++f) {
    for (size_t c = 0; c < m.n_classes(); ++c) {
      if (c) out << ',';
      out << io::format_double(m.at(f, c));
    }
    out << '\n';
  }
  io::write_file_atomic(path, out.str());
}

inline LogitMatrix read_logit_matrix(const std::string& path) {
  LogitMatrix m;
  try {
    nlohmann::json meta = nlohmann::json::parse(io::read_file(path + ".json"));
    m.class_labels = meta.at("class_labels").get<std::vector<std::string>>();
    m.frame_shift = meta.at("frame_shift").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("logit sidecar " + path + ".json: " + e.what());
  }
  std::istringstream in(io::read_file(path));
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = io::split_csv_line(line);
    if (fields.size() != m.class_labels.size()) {
      throw FormatError("logit file " + path + " line " + std::to_string(line_no) +
                        ": expected " + std::to_string(m.class_labels.size()) +
                        " columns, got " + std::to_string(fields.size()));
    }
    for (const auto& f : fields) {
      m.data.push_back(io::parse_double(f, path + " line " + std::to_string(line_no)));
    }
    ++m.n_frames;
  }
  m.validate();
  return m;
}

inline void write_segments(const std::string& path,
                           const std::vector<PhoneSegment>& segments) {
  std::ostringstream out;
  out << "label,begin_frame,end_frame\n";
  for (const auto& s : segments) {
    io::check_csv_field(s.phoneme);
    out << s.phoneme << ',' << s.begin_frame << ',' << s.end_frame << '\n';
  }
  io::write_file_atomic(path, out.str());
}

inline std::vector<PhoneSegment> read_segments(const std::string& path) {
  std::istringstream in(io::read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw FormatError("segments " + path + ": empty file");
  std::vector<PhoneSegment> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = io::split_csv_line(line);
    if (fields.size() != 3) {
      throw FormatError("segments " + path + " line " + std::to_string(line_no) +
                        ": expected 3 columns");
    }
    PhoneSegment seg;
    seg.phoneme = fields[0];
    const std::string ctx = path + " line " + std::to_string(line_no);
    seg.begin_frame = static_cast<size_t>(io::parse_long(fields[1], ctx));
    seg.end_frame = static_cast<size_t>(io::parse_long(fields[2], ctx));
    out.push_back(seg);
  }
  return out;
}

}  // namespace dyskit::gop

#endif  // DYSKIT_GOP_IO_HPP_
