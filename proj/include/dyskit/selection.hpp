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

// Two-step feature selection: multicollinearity mitigation (lasso, elastic
// net, Ward clustering on 1-|rho|) followed by filter / wrapper / embedded
// selection, plus the iterative gain-based subset search.

#ifndef DYSKIT_SELECTION_HPP_
#define DYSKIT_SELECTION_HPP_

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "dyskit/forest.hpp"
#include "dyskit/gbdt.hpp"
#include "dyskit/linear_model.hpp"
#include "dyskit/stats.hpp"

namespace dyskit::selection {

struct FeatureDiagnostic {
  std::string name;
  double coefficient = 0.0;
  int cluster = -1;
  double importance = 0.0;
  double p_value = 1.0;
};

struct SelectionResult {
  std::string method;
  std::vector<std::string> selected;  // strongest first
  std::vector<FeatureDiagnostic> diagnostics;
  std::vector<std::string> warnings;
  std::vector<double> accuracy_curve;  // iterative methods only
};

// Row-index groups used as held-out test sets (speaker folds for LOSO).
using Folds = std::vector<std::vector<size_t>>;

namespace detail {

struct DenseProblem {
  std::vector<std::string> names;                 // surviving columns
  std::vector<size_t> original_index;             // into the input matrix
  std::vector<std::vector<double>> columns;       // dense values
  std::vector<std::string> dropped;               // constant/missing columns
};

// Lasso-style solvers need dense, varying columns. Missing cells fall back
// to the column mean; constant columns are dropped with a warning.
inline DenseProblem densify(const trees::Matrix& m) {
  DenseProblem out;
  for (size_t j = 0; j < m.n_features(); ++j) {
    std::vector<double> present;
    for (const auto& cell : m.columns[j]) {
      if (cell) present.push_back(*cell);
    }
    if (present.empty()) {
      out.dropped.push_back(m.feature_names[j]);
      continue;
    }
    const double fill = mean(present);
    std::vector<double> col(m.n_rows());
    for (size_t i = 0; i < m.n_rows(); ++i) {
      col[i] = m.columns[j][i] ? *m.columns[j][i] : fill;
    }
    if (population_std(col) <= 0.0) {
      out.dropped.push_back(m.feature_names[j]);
      continue;
    }
    out.names.push_back(m.feature_names[j]);
    out.original_index.push_back(j);
    out.columns.push_back(std::move(col));
  }
  return out;
}

inline std::vector<size_t> complement_rows(size_t n, const std::vector<size_t>& held_out) {
  std::vector<char> mask(n, 0);
  for (size_t r : held_out) mask[r] = 1;
  std::vector<size_t> out;
  for (size_t r = 0; r < n; ++r) {
    if (!mask[r]) out.push_back(r);
  }
  return out;
}

inline std::vector<std::vector<double>> take_rows(
    const std::vector<std::vector<double>>& columns, const std::vector<size_t>& rows) {
  std::vector<std::vector<double>> out(columns.size());
  for (size_t j = 0; j < columns.size(); ++j) {
    out[j].reserve(rows.size());
    for (size_t r : rows) out[j].push_back(columns[j][r]);
  }
  return out;
}

template <typename T>
std::vector<T> take(const std::vector<T>& v, const std::vector<size_t>& rows) {
  std::vector<T> out;
  out.reserve(rows.size());
  for (size_t r : rows) out.push_back(v[r]);
  return out;
}

struct EnetCv {
  double alpha = 0.0;
  double l1_ratio = 1.0;
  double cv_error = 0.0;
  std::vector<std::vector<double>> fold_coefficients;  // per fold, dense space
};

// Chooses (l1_ratio, alpha) by mean held-out squared error pooled across the
// folds, then refits each fold's training half at the winner.
inline EnetCv enet_cross_validate(const DenseProblem& prob, const std::vector<double>& y,
                                  const std::vector<double>& l1_ratios,
                                  std::vector<double> alpha_grid, const Folds& folds) {
  EnetCv best;
  best.cv_error = 1e300;
  for (double ratio : l1_ratios) {
    std::vector<double> grid = alpha_grid;
    if (grid.empty()) grid = default_alpha_grid(Standardizer::fit(prob.columns).apply(prob.columns), y, ratio);
    for (double alpha : grid) {
      double err = 0.0;
      size_t count = 0;
      for (const auto& test_rows : folds) {
        const auto train_rows = complement_rows(y.size(), test_rows);
        if (train_rows.empty() || test_rows.empty()) continue;
        auto train_cols = take_rows(prob.columns, train_rows);
        const auto scaler = Standardizer::fit(train_cols);
        auto fit = elastic_net_fit(scaler.apply(train_cols), take(y, train_rows), alpha, ratio);
        for (size_t r : test_rows) {
          double pred = fit.intercept;
          for (size_t j = 0; j < prob.columns.size(); ++j) {
            if (scaler.stds[j] <= 0.0) continue;
            pred += fit.coefficients[j] * (prob.columns[j][r] - scaler.means[j]) / scaler.stds[j];
          }
          err += (pred - y[r]) * (pred - y[r]);
          ++count;
        }
      }
      if (count == 0) continue;
      err /= count;
      if (err < best.cv_error - 1e-15) {
        best.cv_error = err;
        best.alpha = alpha;
        best.l1_ratio = ratio;
      }
    }
  }
  for (const auto& test_rows : folds) {
    const auto train_rows = complement_rows(y.size(), test_rows);
    auto train_cols = take_rows(prob.columns, train_rows);
    const auto scaler = Standardizer::fit(train_cols);
    auto fit = elastic_net_fit(scaler.apply(train_cols), take(y, train_rows), best.alpha,
                               best.l1_ratio);
    best.fold_coefficients.push_back(fit.coefficients);
  }
  return best;
}

inline SelectionResult from_enet(const trees::Matrix& m, const std::vector<double>& labels,
                                 const std::vector<double>& l1_ratios,
                                 const std::vector<double>& alpha_grid, const Folds& folds,
                                 const std::string& method) {
  if (folds.size() < 2) throw DataError(method + ": need >= 2 folds");
  DenseProblem prob = densify(m);
  if (prob.columns.empty()) throw DataError(method + ": no usable columns");

  SelectionResult result;
  result.method = method;
  for (const auto& name : prob.dropped) {
    result.warnings.push_back("dropped constant/empty feature: " + name);
  }
  EnetCv cv = enet_cross_validate(prob, labels, l1_ratios, alpha_grid, folds);

  constexpr double kCoefficientFloor = 0.001;
  std::vector<std::pair<double, std::string>> picked;
  for (size_t j = 0; j < prob.columns.size(); ++j) {
    double min_abs = 1e300, mean_coef = 0.0;
    for (const auto& coefs : cv.fold_coefficients) {
      min_abs = std::min(min_abs, std::fabs(coefs[j]));
      mean_coef += coefs[j];
    }
    mean_coef /= cv.fold_coefficients.size();
    FeatureDiagnostic diag;
    diag.name = prob.names[j];
    diag.coefficient = mean_coef;
    result.diagnostics.push_back(diag);
    if (min_abs > kCoefficientFloor) picked.emplace_back(-std::fabs(mean_coef), prob.names[j]);
  }
  std::sort(picked.begin(), picked.end());
  for (const auto& [neg, name] : picked) result.selected.push_back(name);
  return result;
}

}  // namespace detail

// Lasso over a leave-one-speaker-out split: alpha by pooled CV error, then a
// feature survives only when |coef| > 0.001 in every fold's refit.
inline SelectionResult lasso_select(const trees::Matrix& m, const std::vector<double>& labels,
                                    const Folds& folds,
                                    const std::vector<double>& alpha_grid = {}) {
  return detail::from_enet(m, labels, {1.0}, alpha_grid, folds, "lasso");
}

inline SelectionResult elastic_net_select(
    const trees::Matrix& m, const std::vector<double>& labels, const Folds& folds,
    const std::vector<double>& l1_ratios = {0.1, 0.3, 0.5, 0.7, 0.9},
    const std::vector<double>& alpha_grid = {}) {
  return detail::from_enet(m, labels, l1_ratios, alpha_grid, folds, "elastic_net");
}

namespace detail {

struct WardStep {
  int a = -1, b = -1;   // merged cluster ids (original or intermediate)
  double height = 0.0;  // merge distance
};

// Agglomerative Ward linkage by the Lance-Williams recurrence on squared
// distances; heights are reported in the input distance scale.
struct WardResult {
  std::vector<WardStep> steps;
  std::vector<int> cluster_of;  // per feature, after cutting at threshold
  int n_clusters = 0;
};

inline WardResult ward_cluster(std::vector<std::vector<double>> dist, double cut_threshold) {
  const size_t p = dist.size();
  for (auto& row : dist) {
    for (double& v : row) v = v * v;  // work on squared distances
  }
  std::vector<int> size(p, 1);
  std::vector<bool> alive(p, true);
  std::vector<int> id(p);  // dendrogram node id of each active cluster
  std::iota(id.begin(), id.end(), 0);
  std::vector<int> parent(2 * p, -1);

  WardResult out;
  int next_id = static_cast<int>(p);
  for (size_t merge = 0; merge + 1 < p; ++merge) {
    double best = 1e300;
    size_t bi = 0, bj = 0;
    for (size_t i = 0; i < p; ++i) {
      if (!alive[i]) continue;
      for (size_t j = i + 1; j < p; ++j) {
        if (!alive[j]) continue;
        if (dist[i][j] < best) {
          best = dist[i][j];
          bi = i;
          bj = j;
        }
      }
    }
    const double height = std::sqrt(std::max(0.0, best));
    if (height > cut_threshold) break;
    out.steps.push_back({id[bi], id[bj], height});
    // Lance-Williams Ward update into slot bi
    for (size_t k = 0; k < p; ++k) {
      if (!alive[k] || k == bi || k == bj) continue;
      const double nk = size[k], ni = size[bi], nj = size[bj];
      dist[bi][k] = dist[k][bi] =
          ((ni + nk) * dist[bi][k] + (nj + nk) * dist[bj][k] - nk * dist[bi][bj]) /
          (ni + nj + nk);
    }
    parent[id[bi]] = next_id;
    parent[id[bj]] = next_id;
    size[bi] += size[bj];
    alive[bj] = false;
    id[bi] = next_id++;
  }

  // resolve final cluster of each leaf
  std::map<int, int> root_to_cluster;
  out.cluster_of.resize(p);
  for (size_t f = 0; f < p; ++f) {
    int at = static_cast<int>(f);
    while (parent[at] >= 0) at = parent[at];
    auto [it, inserted] = root_to_cluster.try_emplace(at, out.n_clusters);
    if (inserted) ++out.n_clusters;
    out.cluster_of[f] = it->second;
  }
  return out;
}

}  // namespace detail

// Ward clustering on distance 1 - |spearman rho|, cut at the threshold; one
// representative per cluster, the feature with the highest forest
// permutation importance.
inline SelectionResult cluster_select(const trees::Matrix& m, const std::vector<int>& labels,
                                      double cut_threshold = 0.5, uint64_t seed = 0) {
  m.validate();
  const size_t p = m.n_features();
  SelectionResult result;
  result.method = "cluster";
  if (p == 0) throw DataError("cluster_select: empty table");
  if (p == 1) {
    result.selected = {m.feature_names[0]};
    return result;
  }

  auto rho = stats::spearman_matrix(m.columns);
  std::vector<std::vector<double>> dist(p, std::vector<double>(p, 0.0));
  for (size_t i = 0; i < p; ++i) {
    for (size_t j = 0; j < p; ++j) {
      if (i == j) continue;
      dist[i][j] = rho[i][j] ? 1.0 - std::fabs(*rho[i][j]) : 1.0;
    }
  }
  auto ward = detail::ward_cluster(dist, cut_threshold);

  trees::ForestParams fp;
  fp.seed = seed;
  trees::RandomForest forest = trees::random_forest_train(m, labels, fp);
  auto importance = trees::permutation_importance(forest, m, labels, 5, seed);

  std::map<int, std::pair<double, std::string>> rep;  // cluster -> (imp, name)
  for (size_t f = 0; f < p; ++f) {
    const double imp = importance.permutation[m.feature_names[f]];
    FeatureDiagnostic diag;
    diag.name = m.feature_names[f];
    diag.cluster = ward.cluster_of[f];
    diag.importance = imp;
    result.diagnostics.push_back(diag);
    auto it = rep.find(ward.cluster_of[f]);
    if (it == rep.end() || imp > it->second.first) {
      rep[ward.cluster_of[f]] = {imp, m.feature_names[f]};
    }
  }
  std::vector<std::pair<double, std::string>> picked;
  for (const auto& [cluster, best] : rep) picked.emplace_back(-best.first, best.second);
  std::sort(picked.begin(), picked.end());
  for (const auto& [neg, name] : picked) result.selected.push_back(name);
  return result;
}

// Kendall filter: keep features whose tau-vs-label p-value clears 0.05.
inline SelectionResult filter_select(const trees::Matrix& m, const std::vector<int>& labels,
                                     double p_threshold = 0.05) {
  m.validate();
  SelectionResult result;
  result.method = "filter";
  std::vector<double> y(labels.begin(), labels.end());
  std::vector<std::pair<double, std::string>> picked;
  for (size_t j = 0; j < m.n_features(); ++j) {
    std::vector<double> x, yy;
    for (size_t i = 0; i < m.n_rows(); ++i) {
      if (m.columns[j][i]) {
        x.push_back(*m.columns[j][i]);
        yy.push_back(y[i]);
      }
    }
    FeatureDiagnostic diag;
    diag.name = m.feature_names[j];
    try {
      auto corr = stats::kendall_tau(x, yy);
      diag.coefficient = corr.coefficient;
      diag.p_value = corr.p_value;
      if (corr.p_value < p_threshold) picked.emplace_back(corr.p_value, diag.name);
    } catch (const DataError&) {
      diag.p_value = 1.0;
      result.warnings.push_back("excluded constant feature: " + diag.name);
    }
    result.diagnostics.push_back(diag);
  }
  std::sort(picked.begin(), picked.end());
  for (const auto& [pv, name] : picked) result.selected.push_back(name);
  return result;
}

namespace detail {

inline trees::Matrix subset_matrix(const trees::Matrix& m,
                                   const std::vector<std::string>& keep) {
  trees::Matrix out;
  for (const auto& name : keep) {
    auto it = std::find(m.feature_names.begin(), m.feature_names.end(), name);
    if (it == m.feature_names.end()) throw DataError("unknown feature: " + name);
    out.feature_names.push_back(name);
    out.columns.push_back(m.columns[it - m.feature_names.begin()]);
  }
  return out;
}

inline double cv_accuracy(const trees::Matrix& m, const std::vector<int>& labels,
                          const Folds& folds, const trees::TrainParams& params) {
  size_t hits = 0, total = 0;
  for (const auto& test_rows : folds) {
    const auto train_rows = complement_rows(labels.size(), test_rows);
    if (train_rows.empty()) continue;
    trees::Matrix train_m;
    train_m.feature_names = m.feature_names;
    train_m.columns.resize(m.n_features());
    for (size_t j = 0; j < m.n_features(); ++j) {
      train_m.columns[j] = take(m.columns[j], train_rows);
    }
    auto ens = trees::train(train_m, take(labels, train_rows), params);
    for (size_t r : test_rows) {
      hits += ens.predict_class(m.row(r)) == labels[r];
      ++total;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(hits) / total;
}

inline std::map<std::string, double> fold_mean_gain(const trees::Matrix& m,
                                                    const std::vector<int>& labels,
                                                    const Folds& folds,
                                                    const trees::TrainParams& params) {
  std::map<std::string, double> acc;
  for (const auto& name : m.feature_names) acc[name] = 0.0;
  for (const auto& test_rows : folds) {
    const auto train_rows = complement_rows(labels.size(), test_rows);
    trees::Matrix train_m;
    train_m.feature_names = m.feature_names;
    for (size_t j = 0; j < m.n_features(); ++j) {
      train_m.columns.push_back(take(m.columns[j], train_rows));
    }
    auto rep = trees::gain_importance(trees::train(train_m, take(labels, train_rows), params));
    for (const auto& [name, gain] : rep.gain) acc[name] += gain;
  }
  for (auto& [name, gain] : acc) gain /= folds.size();
  return acc;
}

// Shared engine for RFE and the iterative gain-based search: repeatedly drop
// the least important feature, record CV accuracy, return the subset at the
// accuracy maximum (ties prefer fewer features).
inline SelectionResult backward_elimination(const trees::Matrix& m,
                                            const std::vector<int>& labels,
                                            const Folds& folds,
                                            const trees::TrainParams& params,
                                            const std::string& method) {
  if (m.n_features() == 0) throw DataError(method + ": empty table");
  SelectionResult result;
  result.method = method;

  std::vector<std::string> current = m.feature_names;
  std::vector<std::pair<double, std::vector<std::string>>> trace;
  while (!current.empty()) {
    trees::Matrix sub = subset_matrix(m, current);
    const double acc = cv_accuracy(sub, labels, folds, params);
    trace.emplace_back(acc, current);
    result.accuracy_curve.push_back(acc);
    if (current.size() == 1) break;
    auto gain = fold_mean_gain(sub, labels, folds, params);
    std::string weakest = current.front();
    for (const auto& name : current) {
      if (gain[name] < gain[weakest]) weakest = name;
    }
    current.erase(std::find(current.begin(), current.end(), weakest));
  }
  // max accuracy, ties to the smaller subset (later trace entries)
  size_t best = 0;
  for (size_t i = 1; i < trace.size(); ++i) {
    if (trace[i].first >= trace[best].first) best = i;
  }
  result.selected = trace[best].second;
  for (const auto& name : result.selected) {
    FeatureDiagnostic d;
    d.name = name;
    result.diagnostics.push_back(d);
  }
  return result;
}

}  // namespace detail

// Recursive feature elimination driven by boosted-tree gain importance.
inline SelectionResult rfe_select(const trees::Matrix& m, const std::vector<int>& labels,
                                  const Folds& folds,
                                  const trees::TrainParams& params = {}) {
  return detail::backward_elimination(m, labels, folds, params, "rfe");
}

// Embedded selection by extra-randomized-forest impurity importance: keep
// features above the mean importance, or exactly top_k when requested.
inline SelectionResult embedded_select(const trees::Matrix& m, const std::vector<int>& labels,
                                       int top_k = 0, uint64_t seed = 0) {
  m.validate();
  trees::ForestParams fp;
  fp.seed = seed;
  trees::RandomForest forest = trees::random_forest_train(m, labels, fp);

  SelectionResult result;
  result.method = "embedded";
  std::vector<std::pair<double, std::string>> ranked;
  double total = 0.0;
  for (const auto& name : m.feature_names) {
    const double imp = forest.impurity_importance.at(name);
    FeatureDiagnostic d;
    d.name = name;
    d.importance = imp;
    result.diagnostics.push_back(d);
    ranked.emplace_back(-imp, name);
    total += imp;
  }
  std::sort(ranked.begin(), ranked.end());
  const double mean_importance = total / m.n_features();
  if (top_k > 0) {
    for (int i = 0; i < top_k && i < static_cast<int>(ranked.size()); ++i) {
      result.selected.push_back(ranked[i].second);
    }
  } else {
    for (const auto& [neg, name] : ranked) {
      if (-neg > mean_importance) result.selected.push_back(name);
    }
  }
  return result;
}

// Iterative gain-based selection under LOSO folds (the accuracy-maximizing
// subset along the backward path), with the accuracy curve attached.
inline SelectionResult iterative_gain_select(const trees::Matrix& m,
                                             const std::vector<int>& labels,
                                             const Folds& folds,
                                             const trees::TrainParams& params = {}) {
  return detail::backward_elimination(m, labels, folds, params, "iterative_gain");
}

}  // namespace dyskit::selection

#endif  // DYSKIT_SELECTION_HPP_
