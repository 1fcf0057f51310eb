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

// Coordinate-descent elastic net on standardized columns:
//   min_b 1/(2n) ||y - Xb||^2 + alpha*l1 ||b||_1 + alpha*(1-l1)/2 ||b||^2
// l1 = 1 is the lasso. Inputs are standardized and the response centered
// inside fit(); coefficients live in standardized space.

#ifndef DYSKIT_LINEAR_MODEL_HPP_
#define DYSKIT_LINEAR_MODEL_HPP_

#include <cmath>
#include <vector>

#include "dyskit/common.hpp"

namespace dyskit::selection {

struct Standardizer {
  std::vector<double> means, stds;

  // columns with zero variance standardize to all-zero
  static Standardizer fit(const std::vector<std::vector<double>>& columns) {
    Standardizer s;
    for (const auto& col : columns) {
      const double m = mean(col);
      const double sd = population_std(col);
      s.means.push_back(m);
      s.stds.push_back(sd);
    }
    return s;
  }

  std::vector<std::vector<double>> apply(
      const std::vector<std::vector<double>>& columns) const {
    std::vector<std::vector<double>> out(columns.size());
    for (size_t j = 0; j < columns.size(); ++j) {
      out[j].resize(columns[j].size());
      for (size_t i = 0; i < columns[j].size(); ++i) {
        out[j][i] = stds[j] > 0.0 ? (columns[j][i] - means[j]) / stds[j] : 0.0;
      }
    }
    return out;
  }
};

struct ElasticNetFit {
  std::vector<double> coefficients;  // standardized space
  double intercept = 0.0;            // mean of y
  int iterations = 0;
};

inline double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

// X as standardized columns, y raw (centered internally).
inline ElasticNetFit elastic_net_fit(const std::vector<std::vector<double>>& x,
                                     const std::vector<double>& y, double alpha,
                                     double l1_ratio, int max_sweeps = 2000,
                                     double tol = 1e-8) {
  const size_t p = x.size();
  const size_t n = y.size();
  if (p == 0 || n == 0) throw DataError("elastic_net_fit: empty problem");
  if (l1_ratio < 0.0 || l1_ratio > 1.0) throw ConfigError("elastic_net_fit: l1_ratio in [0,1]");

  ElasticNetFit fit;
  fit.intercept = mean(y);
  std::vector<double> residual(n);
  for (size_t i = 0; i < n; ++i) residual[i] = y[i] - fit.intercept;

  fit.coefficients.assign(p, 0.0);
  std::vector<double> col_sq(p, 0.0);
  for (size_t j = 0; j < p; ++j) {
    for (double v : x[j]) col_sq[j] += v * v;
  }

  const double l1_penalty = alpha * l1_ratio;
  const double l2_penalty = alpha * (1.0 - l1_ratio);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_delta = 0.0;
    for (size_t j = 0; j < p; ++j) {
      if (col_sq[j] <= 0.0) continue;  // constant column
      const double old = fit.coefficients[j];
      double rho = 0.0;
      for (size_t i = 0; i < n; ++i) rho += x[j][i] * residual[i];
      rho = rho / n + (col_sq[j] / n) * old;
      const double denom = col_sq[j] / n + l2_penalty;
      const double updated = soft_threshold(rho, l1_penalty) / denom;
      if (updated != old) {
        const double delta = updated - old;
        for (size_t i = 0; i < n; ++i) residual[i] -= delta * x[j][i];
        max_delta = std::max(max_delta, std::fabs(delta));
        fit.coefficients[j] = updated;
      }
    }
    fit.iterations = sweep + 1;
    if (max_delta < tol) break;
  }
  return fit;
}

// Descending log-spaced grid from the smallest alpha that zeroes every
// coefficient down by three decades.
inline std::vector<double> default_alpha_grid(const std::vector<std::vector<double>>& x,
                                              const std::vector<double>& y,
                                              double l1_ratio, int count = 30) {
  const size_t n = y.size();
  const double ym = mean(y);
  double alpha_max = 0.0;
  for (const auto& col : x) {
    double dot = 0.0;
    for (size_t i = 0; i < n; ++i) dot += col[i] * (y[i] - ym);
    alpha_max = std::max(alpha_max, std::fabs(dot) / n);
  }
  alpha_max /= std::max(l1_ratio, 1e-3);
  if (alpha_max <= 0.0) alpha_max = 1.0;
  std::vector<double> grid(count);
  const double lo = std::log(alpha_max * 1e-3), hi = std::log(alpha_max);
  for (int i = 0; i < count; ++i) {
    grid[i] = std::exp(hi - (hi - lo) * i / (count - 1));
  }
  return grid;
}

}  // namespace dyskit::selection

#endif  // DYSKIT_LINEAR_MODEL_HPP_
