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

// Extra-randomized forest (random split thresholds, Gini impurity, majority
// vote) for embedded feature selection, plus the kNN sanity baseline.

#ifndef DYSKIT_FOREST_HPP_
#define DYSKIT_FOREST_HPP_

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "dyskit/gbdt.hpp"

namespace dyskit::trees {

struct ForestParams {
  int n_trees = 100;
  int max_depth = 10;
  int min_samples_split = 2;
  int max_features = 0;  // 0 = round(sqrt(p))
  uint64_t seed = 0;
};

struct ForestNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int leaf_class = 0;

  bool is_leaf() const { return feature < 0; }
};

struct RandomForest {
  std::vector<std::string> feature_names;
  int n_classes = 0;
  std::vector<std::vector<ForestNode>> trees;
  std::map<std::string, double> impurity_importance;

  int tree_class(const std::vector<ForestNode>& tree, const std::vector<Cell>& row) const {
    int at = 0;
    while (!tree[at].is_leaf()) {
      const ForestNode& n = tree[at];
      // missing feature values route left
      const bool go_left = !row[n.feature].has_value() || *row[n.feature] < n.threshold;
      at = go_left ? n.left : n.right;
    }
    return tree[at].leaf_class;
  }

  int predict_class(const std::vector<Cell>& row) const {
    std::vector<int> votes(n_classes, 0);
    for (const auto& tree : trees) ++votes[tree_class(tree, row)];
    return static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
  }
};

namespace detail {

inline double gini(const std::vector<int>& counts, int total) {
  if (total == 0) return 0.0;
  double g = 1.0;
  for (int c : counts) {
    const double p = static_cast<double>(c) / total;
    g -= p * p;
  }
  return g;
}

struct ForestBuilder {
  const Matrix& m;
  const std::vector<int>& labels;
  const ForestParams& params;
  int n_classes;
  int k_features;
  SplitMix64 rng;
  std::vector<ForestNode>* tree;
  std::map<std::string, double>* importance;

  int build(std::vector<size_t>& rows, int depth) {
    std::vector<int> counts(n_classes, 0);
    for (size_t r : rows) ++counts[labels[r]];
    const int id = static_cast<int>(tree->size());
    tree->emplace_back();
    const int majority =
        static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    (*tree)[id].leaf_class = majority;

    const double node_gini = gini(counts, static_cast<int>(rows.size()));
    if (depth >= params.max_depth || node_gini == 0.0 ||
        static_cast<int>(rows.size()) < params.min_samples_split) {
      return id;
    }

    // candidate features: k distinct random picks
    std::vector<size_t> features(m.n_features());
    std::iota(features.begin(), features.end(), 0);
    shuffle(features, rng);
    features.resize(std::min<size_t>(k_features, features.size()));

    int best_feature = -1;
    double best_threshold = 0.0, best_score = -1.0;
    for (size_t f : features) {
      double lo = 1e300, hi = -1e300;
      for (size_t r : rows) {
        if (!m.columns[f][r].has_value()) continue;
        lo = std::min(lo, *m.columns[f][r]);
        hi = std::max(hi, *m.columns[f][r]);
      }
      if (lo >= hi) continue;
      const double threshold = lo + (hi - lo) * rng.uniform();
      std::vector<int> lc(n_classes, 0), rc(n_classes, 0);
      int ln = 0, rn = 0;
      for (size_t r : rows) {
        const bool go_left =
            !m.columns[f][r].has_value() || *m.columns[f][r] < threshold;
        if (go_left) {
          ++lc[labels[r]];
          ++ln;
        } else {
          ++rc[labels[r]];
          ++rn;
        }
      }
      if (ln == 0 || rn == 0) continue;
      const double child =
          (ln * gini(lc, ln) + rn * gini(rc, rn)) / rows.size();
      const double score = node_gini - child;
      if (score > best_score) {
        best_score = score;
        best_feature = static_cast<int>(f);
        best_threshold = threshold;
      }
    }
    if (best_feature < 0 || best_score <= 0.0) return id;

    std::vector<size_t> left_rows, right_rows;
    for (size_t r : rows) {
      const bool go_left = !m.columns[best_feature][r].has_value() ||
                           *m.columns[best_feature][r] < best_threshold;
      (go_left ? left_rows : right_rows).push_back(r);
    }
    (*importance)[m.feature_names[best_feature]] +=
        best_score * static_cast<double>(rows.size());
    rows.clear();
    rows.shrink_to_fit();
    const int left = build(left_rows, depth + 1);
    const int right = build(right_rows, depth + 1);
    (*tree)[id].feature = best_feature;
    (*tree)[id].threshold = best_threshold;
    (*tree)[id].left = left;
    (*tree)[id].right = right;
    return id;
  }
};

}  // namespace detail

inline RandomForest random_forest_train(const Matrix& m, const std::vector<int>& labels,
                                        const ForestParams& params) {
  m.validate();
  if (labels.size() != m.n_rows() || m.n_rows() == 0) {
    throw DataError("random_forest_train: labels/rows mismatch");
  }
  RandomForest forest;
  forest.feature_names = m.feature_names;
  for (int y : labels) forest.n_classes = std::max(forest.n_classes, y + 1);
  forest.n_classes = std::max(forest.n_classes, 2);
  for (const auto& name : m.feature_names) forest.impurity_importance[name] = 0.0;

  const int k = params.max_features > 0
                    ? params.max_features
                    : std::max(1, static_cast<int>(std::lround(
                                      std::sqrt(static_cast<double>(m.n_features())))));
  for (int t = 0; t < params.n_trees; ++t) {
    detail::ForestBuilder builder{m,
                                  labels,
                                  params,
                                  forest.n_classes,
                                  k,
                                  detail::SplitMix64(params.seed * 6364136223846793005ULL +
                                                     t + 1),
                                  nullptr,
                                  &forest.impurity_importance};
    std::vector<ForestNode> tree;
    builder.tree = &tree;
    std::vector<size_t> all(m.n_rows());
    std::iota(all.begin(), all.end(), 0);
    builder.build(all, 0);
    forest.trees.push_back(std::move(tree));
  }
  // normalize importances to sum 1 where any split happened
  double total = 0.0;
  for (const auto& [name, v] : forest.impurity_importance) total += v;
  if (total > 0.0) {
    for (auto& [name, v] : forest.impurity_importance) v /= total;
  }
  return forest;
}

enum class KnnMetric { kEuclidean, kManhattan };
enum class KnnWeights { kUniform, kDistance };

// Complete-case kNN vote. Any missing cell in the inputs is a schema error.
inline int knn_predict(const Matrix& train, const std::vector<int>& labels,
                       const std::vector<Cell>& query, int k,
                       KnnMetric metric = KnnMetric::kEuclidean,
                       KnnWeights weights = KnnWeights::kUniform) {
  train.validate();
  if (train.n_rows() == 0 || labels.size() != train.n_rows()) {
    throw DataError("knn: labels/rows mismatch");
  }
  if (query.size() != train.n_features()) throw DataError("knn: query width mismatch");
  for (const auto& col : train.columns) {
    for (const auto& cell : col) {
      if (!cell.has_value()) throw DataError("knn: training data contains missing values");
    }
  }
  for (const auto& cell : query) {
    if (!cell.has_value()) throw DataError("knn: query contains missing values");
  }
  k = std::min<int>(k, static_cast<int>(train.n_rows()));
  if (k < 1) throw DataError("knn: k must be positive");

  std::vector<std::pair<double, size_t>> dist(train.n_rows());
  for (size_t r = 0; r < train.n_rows(); ++r) {
    double d = 0.0;
    for (size_t f = 0; f < train.n_features(); ++f) {
      const double diff = *train.columns[f][r] - *query[f];
      d += metric == KnnMetric::kEuclidean ? diff * diff : std::fabs(diff);
    }
    dist[r] = {metric == KnnMetric::kEuclidean ? std::sqrt(d) : d, r};
  }
  std::sort(dist.begin(), dist.end());

  int n_classes = 0;
  for (int y : labels) n_classes = std::max(n_classes, y + 1);
  std::vector<double> votes(n_classes, 0.0);

  // exact matches dominate distance weighting
  if (weights == KnnWeights::kDistance && dist[0].first == 0.0) {
    for (int i = 0; i < k && dist[i].first == 0.0; ++i) {
      votes[labels[dist[i].second]] += 1.0;
    }
  } else {
    for (int i = 0; i < k; ++i) {
      const double w =
          weights == KnnWeights::kUniform ? 1.0 : 1.0 / std::max(dist[i].first, 1e-12);
      votes[labels[dist[i].second]] += w;
    }
  }
  return static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

}  // namespace dyskit::trees

#endif  // DYSKIT_FOREST_HPP_
