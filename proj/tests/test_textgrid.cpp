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

#include "dyskit/textgrid.hpp"

using namespace dyskit;
using namespace dyskit::alignment;

namespace {

const char* kMinimalLong = R"(File type = "ooTextFile"
Object class = "TextGrid"

xmin = 0
xmax = 1.0
tiers? <exists>
size = 1
item []:
    item [1]:
        class = "IntervalTier"
        name = "phones"
        xmin = 0
        xmax = 1.0
        intervals: size = 2
        intervals [1]:
            xmin = 0
            xmax = 0.5
            text = "a"
        intervals [2]:
            xmin = 0.5
            xmax = 1.0
            text = ""
)";

const char* kMinimalShort = R"(File type = "ooTextFile"
Object class = "TextGrid"

0
1.0
<exists>
1
"IntervalTier"
"phones"
0
1.0
2
0
0.5
"a"
0.5
1.0
""
)";

Alignment random_grid(std::mt19937& rng) {
  std::uniform_int_distribution<int> n_tiers(1, 3);
  std::uniform_int_distribution<int> n_ivs(1, 8);
  std::uniform_real_distribution<double> dur(0.05, 0.8);
  const std::vector<std::string> labels = {"a", "sil", "p", "t \"x\"", "", "iy"};
  std::uniform_int_distribution<size_t> lab(0, labels.size() - 1);

  Alignment g;
  g.xmin = 0.0;
  const int nt = n_tiers(rng);
  double grid_max = 0.0;
  for (int t = 0; t < nt; ++t) {
    Tier tier;
    tier.name = "tier" + std::to_string(t);
    double cursor = 0.0;
    const int ni = n_ivs(rng);
    for (int i = 0; i < ni; ++i) {
      Interval iv;
      iv.xmin = cursor;
      cursor += dur(rng);
      iv.xmax = cursor;
      iv.label = labels[lab(rng)];
      tier.intervals.push_back(iv);
    }
    grid_max = std::max(grid_max, cursor);
    g.tiers.push_back(tier);
  }
  g.xmax = grid_max;
  return g;
}

}  // namespace

TEST_CASE("parse minimal long-form grid") {
  Alignment g = parse_textgrid(kMinimalLong);
  REQUIRE(g.tiers.size() == 1);
  REQUIRE(g.tiers[0].name == "phones");
  REQUIRE(g.tiers[0].intervals.size() == 2);
  REQUIRE(g.tiers[0].intervals[0].label == "a");
  REQUIRE(g.tiers[0].intervals[1].label == "");
  REQUIRE(g.total_duration() == Catch::Approx(1.0));
}

TEST_CASE("parse minimal short-form grid") {
  Alignment g = parse_textgrid(kMinimalShort);
  REQUIRE(g == parse_textgrid(kMinimalLong));
}

TEST_CASE("point tiers are skipped") {
  std::string text = R"(File type = "ooTextFile"
Object class = "TextGrid"

0
2
<exists>
2
"TextTier"
"events"
0
2
1
0.7
"click"
"IntervalTier"
"phones"
0
2
1
0
2
"a"
)";
  Alignment g = parse_textgrid(text);
  REQUIRE(g.tiers.size() == 1);
  REQUIRE(g.tiers[0].name == "phones");
}

TEST_CASE("serialize then parse is identity") {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    Alignment g = random_grid(rng);
    Alignment back = parse_textgrid(serialize_textgrid(g));
    REQUIRE(back == g);
    REQUIRE(parse_textgrid(serialize_textgrid(back)) == g);
  }
}

TEST_CASE("overlapping intervals raise a parse error with line number") {
  std::string bad = kMinimalLong;
  // move the second interval start before the first interval end
  size_t pos = bad.rfind("xmin = 0.5");
  bad.replace(pos, 10, "xmin = 0.4");
  try {
    parse_textgrid(bad);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    REQUIRE(std::string(e.what()).find("line") != std::string::npos);
    REQUIRE(std::string(e.what()).find("overlap") != std::string::npos);
  }
}

TEST_CASE("interval with xmin > xmax raises a parse error") {
  std::string bad = kMinimalLong;
  size_t pos = bad.find("xmax = 0.5");
  bad.replace(pos, 10, "xmax = -1.");
  REQUIRE_THROWS_AS(parse_textgrid(bad), FormatError);
}

TEST_CASE("malformed header raises a parse error") {
  REQUIRE_THROWS_AS(parse_textgrid("not a textgrid at all"), FormatError);
  REQUIRE_THROWS_AS(parse_textgrid(""), FormatError);
}
