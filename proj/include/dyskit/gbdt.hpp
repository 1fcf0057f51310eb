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

// Gradient-boosted trees with softmax objective and sparsity-aware missing
// handling: every candidate split tries routing the node's missing rows left
// and right, and the gain-maximizing side is stored as the default
// direction. Split search is exact greedy over present values (thresholds at
// midpoints of consecutive distinct values). Ties resolve to the first
// feature index, then the lowest threshold, then default LEFT, which keeps
// training bit-reproducible.

#ifndef DYSKIT_GBDT_HPP_
#define DYSKIT_GBDT_HPP_

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "dyskit/common.hpp"
#include "dyskit/io.hpp"

namespace dyskit::trees {

// Feature-major table: columns[feature][row], missing cells allowed.
struct Matrix {
  std::vector<std::string> feature_names;
  std::vector<std::vector<Cell>> columns;

  size_t n_features() const { return columns.size(); }
  size_t n_rows() const { return columns.empty() ? 0 : columns[0].size(); }

  std::vector<Cell> row(size_t r) const {
    std::vector<Cell> out(columns.size());
    for (size_t c = 0; c < columns.size(); ++c) out[c] = columns[c][r];
    return out;
  }

  void validate() const {
    if (feature_names.size() != columns.size()) {
      throw DataError("matrix: name/column count mismatch");
    }
    for (const auto& col : columns) {
      if (col.size() != n_rows()) throw DataError("matrix: ragged columns");
    }
  }
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  bool default_left = true;
  int left = -1;
  int right = -1;
  double leaf_value = 0.0;
  double gain = 0.0;

  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double score(const std::vector<Cell>& row) const {
    int at = 0;
    while (!nodes[at].is_leaf()) {
      const TreeNode& n = nodes[at];
      const Cell& v = row[n.feature];
      bool go_left;
      if (!v.has_value()) {
        go_left = n.default_left;
      } else {
        go_left = *v < n.threshold;
      }
      at = go_left ? n.left : n.right;
    }
    return nodes[at].leaf_value;
  }
};

struct TrainParams {
  int rounds = 50;
  int max_depth = 4;
  double learning_rate = 0.3;
  double min_child_weight = 1.0;
  double lambda_reg = 1.0;
  double min_split_gain = 0.0;
  int n_classes = 0;  // 0 = infer from labels
};

struct TreeEnsemble {
  std::vector<std::string> feature_names;
  int n_classes = 0;
  double learning_rate = 0.3;
  std::vector<Tree> trees;  // round-major: trees[round * n_classes + class]
  std::vector<double> train_logloss;  // per boosting round

  int n_rounds() const {
    return n_classes == 0 ? 0 : static_cast<int>(trees.size()) / n_classes;
  }

  std::vector<double> raw_scores(const std::vector<Cell>& row) const {
    std::vector<double> s(n_classes, 0.0);
    for (size_t t = 0; t < trees.size(); ++t) {
      s[t % n_classes] += trees[t].score(row);
    }
    return s;
  }

  // class probability vector (softmax over accumulated leaf scores)
  std::vector<double> predict(const std::vector<Cell>& row) const {
    if (row.size() != feature_names.size()) {
      throw DataError("predict: row width does not match training registry");
    }
    std::vector<double> s = raw_scores(row);
    const double mx = *std::max_element(s.begin(), s.end());
    double sum = 0.0;
    for (double& v : s) {
      v = std::exp(v - mx);
      sum += v;
    }
    for (double& v : s) v /= sum;
    return s;
  }

  // name-checked prediction for callers holding loose feature maps
  std::vector<double> predict_mapped(const std::map<std::string, Cell>& cells) const {
    std::vector<Cell> row(feature_names.size());
    for (const auto& [name, value] : cells) {
      auto it = std::find(feature_names.begin(), feature_names.end(), name);
      if (it == feature_names.end()) {
        throw DataError("predict: unknown feature name '" + name + "'");
      }
      row[it - feature_names.begin()] = value;
    }
    return predict(row);
  }

  int predict_class(const std::vector<Cell>& row) const {
    std::vector<double> p = predict(row);
    return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
  }
};

namespace detail {

struct SplitChoice {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  bool missing_left = true;
  double gain = 0.0;
};

// Distinct candidates can induce the identical row partition and therefore
// mathematically equal gains; gains within this relative band count as tied
// and the first candidate in policy order (feature index, then threshold,
// then missing-LEFT) stands.
inline constexpr double kSplitTieTolerance = 1e-10;

inline bool beats(double gain, const SplitChoice& best) {
  if (!best.found) return gain > 0.0;
  return gain > best.gain + kSplitTieTolerance * (1.0 + std::fabs(best.gain));
}

inline double leaf_objective(double g, double h, double lambda) {
  return g * g / (h + lambda);
}

// Exact greedy search over one node's rows. grad/hess are per-row for the
// current class tree.
inline SplitChoice find_best_split(const Matrix& m, const std::vector<size_t>& rows,
                                   const std::vector<double>& grad,
                                   const std::vector<double>& hess,
                                   const TrainParams& params) {
  double g_total = 0.0, h_total = 0.0;
  for (size_t r : rows) {
    g_total += grad[r];
    h_total += hess[r];
  }
  const double lambda = params.lambda_reg;
  const double parent_obj = leaf_objective(g_total, h_total, lambda);

  SplitChoice best;
  std::vector<std::pair<double, size_t>> present;
  for (size_t f = 0; f < m.n_features(); ++f) {
    const auto& col = m.columns[f];
    present.clear();
    double g_miss = 0.0, h_miss = 0.0;
    for (size_t r : rows) {
      if (col[r].has_value()) {
        present.emplace_back(*col[r], r);
      } else {
        g_miss += grad[r];
        h_miss += hess[r];
      }
    }
    if (present.size() < 2) continue;
    std::sort(present.begin(), present.end());

    double g_left = 0.0, h_left = 0.0;
    for (size_t i = 0; i + 1 < present.size(); ++i) {
      g_left += grad[present[i].second];
      h_left += hess[present[i].second];
      if (present[i].first == present[i + 1].first) continue;
      const double threshold = 0.5 * (present[i].first + present[i + 1].first);
      const double g_right = g_total - g_miss - g_left;
      const double h_right = h_total - h_miss - h_left;
      // missing rows tried on both sides; LEFT first so ties keep LEFT
      for (bool missing_left : {true, false}) {
        const double gl = g_left + (missing_left ? g_miss : 0.0);
        const double hl = h_left + (missing_left ? h_miss : 0.0);
        const double gr = g_right + (missing_left ? 0.0 : g_miss);
        const double hr = h_right + (missing_left ? 0.0 : h_miss);
        if (hl < params.min_child_weight || hr < params.min_child_weight) continue;
        const double gain =
            0.5 * (leaf_objective(gl, hl, lambda) + leaf_objective(gr, hr, lambda) -
                   parent_obj) -
            params.min_split_gain;
        if (beats(gain, best)) {
          best = {true, static_cast<int>(f), threshold, missing_left, gain};
        }
      }
    }
  }
  return best;
}

inline int build_node(Tree& tree, const Matrix& m, std::vector<size_t>& rows,
                      const std::vector<double>& grad, const std::vector<double>& hess,
                      const TrainParams& params, int depth) {
  double g = 0.0, h = 0.0;
  for (size_t r : rows) {
    g += grad[r];
    h += hess[r];
  }
  const int id = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  if (depth < params.max_depth && rows.size() >= 2) {
    SplitChoice split = find_best_split(m, rows, grad, hess, params);
    if (split.found && split.gain > 0.0) {
      std::vector<size_t> left_rows, right_rows;
      const auto& col = m.columns[split.feature];
      for (size_t r : rows) {
        const bool go_left = col[r].has_value() ? *col[r] < split.threshold
                                                : split.missing_left;
        (go_left ? left_rows : right_rows).push_back(r);
      }
      rows.clear();
      rows.shrink_to_fit();
      const int left = build_node(tree, m, left_rows, grad, hess, params, depth + 1);
      const int right = build_node(tree, m, right_rows, grad, hess, params, depth + 1);
      tree.nodes[id].feature = split.feature;
      tree.nodes[id].threshold = split.threshold;
      tree.nodes[id].default_left = split.missing_left;
      tree.nodes[id].gain = split.gain;
      tree.nodes[id].left = left;
      tree.nodes[id].right = right;
      return id;
    }
  }
  tree.nodes[id].leaf_value =
      params.learning_rate * (-g / (h + params.lambda_reg));
  return id;
}

}  // namespace detail

// Trains a softmax-objective boosted ensemble, one tree per class per round.
// Deterministic: no sampling anywhere in the exact greedy path.
inline TreeEnsemble train(const Matrix& m, const std::vector<int>& labels,
                          const TrainParams& params) {
  m.validate();
  const size_t n = m.n_rows();
  if (labels.size() != n || n == 0) throw DataError("train: labels/rows mismatch");

  int k = params.n_classes;
  for (int y : labels) {
    if (y < 0) throw DataError("train: negative label");
    k = std::max(k, y + 1);
  }
  k = std::max(k, 2);

  TreeEnsemble ens;
  ens.feature_names = m.feature_names;
  ens.n_classes = k;
  ens.learning_rate = params.learning_rate;

  std::vector<std::vector<double>> score(n, std::vector<double>(k, 0.0));
  std::vector<double> grad(n), hess(n);
  std::vector<std::vector<double>> prob(n, std::vector<double>(k));

  for (int round = 0; round < params.rounds; ++round) {
    for (size_t i = 0; i < n; ++i) {
      const double mx = *std::max_element(score[i].begin(), score[i].end());
      double sum = 0.0;
      for (int c = 0; c < k; ++c) {
        prob[i][c] = std::exp(score[i][c] - mx);
        sum += prob[i][c];
      }
      for (int c = 0; c < k; ++c) prob[i][c] /= sum;
    }
    for (int c = 0; c < k; ++c) {
      for (size_t i = 0; i < n; ++i) {
        const double p = prob[i][c];
        grad[i] = p - (labels[i] == c ? 1.0 : 0.0);
        hess[i] = std::max(p * (1.0 - p), 1e-16);
      }
      Tree tree;
      std::vector<size_t> all(n);
      std::iota(all.begin(), all.end(), 0);
      detail::build_node(tree, m, all, grad, hess, params, 0);
      for (size_t i = 0; i < n; ++i) score[i][c] += tree.score(m.row(i));
      ens.trees.push_back(std::move(tree));
    }
    double loss = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double mx = *std::max_element(score[i].begin(), score[i].end());
      double sum = 0.0;
      for (int c = 0; c < k; ++c) sum += std::exp(score[i][c] - mx);
      loss -= score[i][labels[i]] - mx - std::log(sum);
    }
    ens.train_logloss.push_back(loss / n);
  }
  return ens;
}

struct ImportanceReport {
  std::map<std::string, double> gain;
  std::map<std::string, double> permutation;  // mean accuracy drop
};

// Total split gain per feature across all trees; unused features report 0.
inline ImportanceReport gain_importance(const TreeEnsemble& ens) {
  ImportanceReport rep;
  for (const auto& name : ens.feature_names) rep.gain[name] = 0.0;
  for (const auto& tree : ens.trees) {
    for (const auto& node : tree.nodes) {
      if (!node.is_leaf()) rep.gain[ens.feature_names[node.feature]] += node.gain;
    }
  }
  return rep;
}

namespace detail {

inline double accuracy_of(const std::vector<int>& pred, const std::vector<int>& truth) {
  size_t hits = 0;
  for (size_t i = 0; i < pred.size(); ++i) hits += pred[i] == truth[i];
  return static_cast<double>(hits) / pred.size();
}

// Minimal deterministic PRNG (splitmix64) so shuffles reproduce across
// standard libraries.
struct SplitMix64 {
  uint64_t state;
  explicit SplitMix64(uint64_t seed) : state(seed) {}
  uint64_t next() {
    uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  // uniform integer in [0, bound)
  uint64_t below(uint64_t bound) { return next() % bound; }
  double uniform() { return (next() >> 11) * 0x1.0p-53; }
};

template <typename T>
void shuffle(std::vector<T>& v, SplitMix64& rng) {
  for (size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.below(i)]);
  }
}

}  // namespace detail

// Mean accuracy drop over n_repeats seeded column shuffles, per feature.
template <typename Model>
ImportanceReport permutation_importance(const Model& model, const Matrix& m,
                                        const std::vector<int>& labels, int n_repeats,
                                        uint64_t seed) {
  std::vector<int> base_pred(m.n_rows());
  for (size_t r = 0; r < m.n_rows(); ++r) base_pred[r] = model.predict_class(m.row(r));
  const double base_acc = detail::accuracy_of(base_pred, labels);

  ImportanceReport rep;
  for (size_t f = 0; f < m.n_features(); ++f) {
    double drop_sum = 0.0;
    for (int rep_i = 0; rep_i < n_repeats; ++rep_i) {
      detail::SplitMix64 rng(seed * 0x9E3779B9ULL + f * 1000003ULL + rep_i);
      std::vector<Cell> shuffled = m.columns[f];
      detail::shuffle(shuffled, rng);
      Matrix permuted = m;
      permuted.columns[f] = shuffled;
      std::vector<int> pred(m.n_rows());
      for (size_t r = 0; r < m.n_rows(); ++r) pred[r] = model.predict_class(permuted.row(r));
      drop_sum += base_acc - detail::accuracy_of(pred, labels);
    }
    rep.permutation[m.feature_names[f]] = drop_sum / n_repeats;
  }
  return rep;
}

// ---- versioned text serialization (bit-exact round trip) ----

namespace detail {

inline std::string hex_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

inline double parse_hex_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) throw FormatError("ensemble: bad float '" + s + "'");
  return v;
}

}  // namespace detail

inline std::string serialize_ensemble(const TreeEnsemble& ens) {
  std::ostringstream out;
  out << "dyskit-ensemble v1\n";
  out << "n_classes " << ens.n_classes << "\n";
  out << "learning_rate " << detail::hex_double(ens.learning_rate) << "\n";
  out << "features " << ens.feature_names.size();
  for (const auto& f : ens.feature_names) out << ' ' << f;
  out << "\n";
  out << "trees " << ens.trees.size() << "\n";
  for (const auto& tree : ens.trees) {
    out << "tree " << tree.nodes.size() << "\n";
    for (size_t i = 0; i < tree.nodes.size(); ++i) {
      const TreeNode& n = tree.nodes[i];
      if (n.is_leaf()) {
        out << i << " leaf " << detail::hex_double(n.leaf_value) << "\n";
      } else {
        out << i << " split " << n.feature << ' ' << detail::hex_double(n.threshold)
            << ' ' << (n.default_left ? 'L' : 'R') << ' ' << n.left << ' ' << n.right
            << ' ' << detail::hex_double(n.gain) << "\n";
      }
    }
  }
  return out.str();
}

inline TreeEnsemble parse_ensemble(const std::string& text) {
  std::istringstream in(text);
  std::string word;
  auto expect = [&](const char* tag) {
    if (!(in >> word) || word != tag) {
      throw FormatError(std::string("ensemble: expected '") + tag + "', got '" + word + "'");
    }
  };
  in >> word;
  if (word != "dyskit-ensemble") throw FormatError("ensemble: bad magic");
  in >> word;
  if (word != "v1") throw FormatError("ensemble: unsupported version " + word);

  TreeEnsemble ens;
  expect("n_classes");
  in >> ens.n_classes;
  expect("learning_rate");
  in >> word;
  ens.learning_rate = detail::parse_hex_double(word);
  expect("features");
  size_t n_features = 0;
  in >> n_features;
  ens.feature_names.resize(n_features);
  for (auto& f : ens.feature_names) in >> f;
  expect("trees");
  size_t n_trees = 0;
  in >> n_trees;
  for (size_t t = 0; t < n_trees; ++t) {
    expect("tree");
    size_t n_nodes = 0;
    in >> n_nodes;
    Tree tree;
    tree.nodes.resize(n_nodes);
    for (size_t i = 0; i < n_nodes; ++i) {
      size_t id;
      in >> id >> word;
      if (id >= n_nodes) throw FormatError("ensemble: node id out of range");
      TreeNode& n = tree.nodes[id];
      if (word == "leaf") {
        in >> word;
        n.leaf_value = detail::parse_hex_double(word);
      } else if (word == "split") {
        std::string thr, gain;
        char dir;
        in >> n.feature >> thr >> dir >> n.left >> n.right >> gain;
        n.threshold = detail::parse_hex_double(thr);
        n.gain = detail::parse_hex_double(gain);
        n.default_left = dir == 'L';
        if (dir != 'L' && dir != 'R') throw FormatError("ensemble: bad default direction");
      } else {
        throw FormatError("ensemble: bad node kind '" + word + "'");
      }
    }
    if (!in) throw FormatError("ensemble: truncated tree");
    ens.trees.push_back(std::move(tree));
  }
  return ens;
}

}  // namespace dyskit::trees

#endif  // DYSKIT_GBDT_HPP_
