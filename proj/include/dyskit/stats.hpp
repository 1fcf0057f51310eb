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

#ifndef DYSKIT_STATS_HPP_
#define DYSKIT_STATS_HPP_

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <vector>

#include "dyskit/common.hpp"

namespace dyskit::stats {

struct CorrelationResult {
  double coefficient = 0.0;
  double p_value = 1.0;
  int n = 0;
};

struct KruskalResult {
  double h = 0.0;
  int df = 0;
  double p_value = 1.0;
};

// Upper tail of the standard normal, 1 - Phi(z).
inline double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

namespace detail {

// Regularized incomplete gamma P(a, x) by series, Q(a, x) by continued
// fraction (the classic gammp/gammq split at x = a + 1).
inline double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_q_contfrac(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace detail

// Upper tail of the chi-square distribution with df degrees of freedom.
inline double chi2_sf(double x, int df) {
  if (x <= 0.0) return 1.0;
  const double a = 0.5 * df;
  const double hx = 0.5 * x;
  if (hx < a + 1.0) return 1.0 - detail::gamma_p_series(a, hx);
  return detail::gamma_q_contfrac(a, hx);
}

// Average ranks (1-based), ties share the mean rank.
inline std::vector<double> ranks(const std::vector<double>& v) {
  const size_t n = v.size();
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return v[a] < v[b]; });
  std::vector<double> r(n, 0.0);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double shared = 0.5 * (i + j) + 1.0;
    for (size_t k = i; k <= j; ++k) r[idx[k]] = shared;
    i = j + 1;
  }
  return r;
}

// Kendall tau-b with tie correction; p-value from the normal approximation
// of the tie-adjusted variance of S.
inline CorrelationResult kendall_tau(const std::vector<double>& x,
                                     const std::vector<double>& y) {
  const size_t n = x.size();
  if (n != y.size() || n < 2) throw DataError("kendall_tau: need equal lengths >= 2");

  long long concordant = 0, discordant = 0;
  double tx = 0, ty = 0, txy = 0;            // pair tie counts
  double vt = 0, vu = 0;                     // variance tie terms sum t(t-1)(2t+5)
  double t1 = 0, u1 = 0, t2 = 0, u2 = 0;     // sums t(t-1) and t(t-1)(t-2)
  {
    std::map<double, double> cx, cy;
    std::map<std::pair<double, double>, double> cxy;
    for (size_t i = 0; i < n; ++i) {
      cx[x[i]] += 1.0;
      cy[y[i]] += 1.0;
      cxy[{x[i], y[i]}] += 1.0;
    }
    for (auto& [k, t] : cx) {
      tx += t * (t - 1) / 2;
      vt += t * (t - 1) * (2 * t + 5);
      t1 += t * (t - 1);
      t2 += t * (t - 1) * (t - 2);
    }
    for (auto& [k, t] : cy) {
      ty += t * (t - 1) / 2;
      vu += t * (t - 1) * (2 * t + 5);
      u1 += t * (t - 1);
      u2 += t * (t - 1) * (t - 2);
    }
    for (auto& [k, t] : cxy) txy += t * (t - 1) / 2;
  }
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      const double s = dx * dy;
      if (s > 0) ++concordant;
      if (s < 0) ++discordant;
    }
  }
  const double n0 = static_cast<double>(n) * (n - 1) / 2.0;
  const double denom = std::sqrt((n0 - tx) * (n0 - ty));
  if (denom <= 0.0) throw DataError("kendall_tau: constant input, tau undefined");
  const double s_stat = static_cast<double>(concordant - discordant);

  CorrelationResult out;
  out.n = static_cast<int>(n);
  out.coefficient = s_stat / denom;

  const double nn = static_cast<double>(n);
  const double v0 = nn * (nn - 1) * (2 * nn + 5);
  double var = (v0 - vt - vu) / 18.0 + t1 * u1 / (2.0 * nn * (nn - 1));
  if (n > 2) var += t2 * u2 / (9.0 * nn * (nn - 1) * (nn - 2));
  if (var <= 0.0) {
    out.p_value = 1.0;
  } else {
    const double z = s_stat / std::sqrt(var);
    out.p_value = std::min(1.0, 2.0 * normal_sf(std::fabs(z)));
  }
  return out;
}

// Spearman rank correlation (average ranks, then Pearson).
inline CorrelationResult spearman(const std::vector<double>& x,
                                  const std::vector<double>& y) {
  const size_t n = x.size();
  if (n != y.size() || n < 2) throw DataError("spearman: need equal lengths >= 2");
  std::vector<double> rx = ranks(x), ry = ranks(y);
  const double mx = mean(rx), my = mean(ry);
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < n; ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) throw DataError("spearman: constant input");
  CorrelationResult out;
  out.n = static_cast<int>(n);
  out.coefficient = sxy / std::sqrt(sxx * syy);
  // t approximation is fine here; only used for reporting
  const double r = std::clamp(out.coefficient, -0.999999999, 0.999999999);
  if (n > 2) {
    const double t = r * std::sqrt((n - 2) / (1.0 - r * r));
    out.p_value = std::min(1.0, 2.0 * normal_sf(std::fabs(t)));
  }
  return out;
}

// Pairwise-deletion Spearman matrix over feature columns; entries with fewer
// than two complete pairs, or a constant side, stay missing.
inline std::vector<std::vector<Cell>> spearman_matrix(
    const std::vector<std::vector<Cell>>& columns) {
  const size_t p = columns.size();
  std::vector<std::vector<Cell>> m(p, std::vector<Cell>(p));
  for (size_t i = 0; i < p; ++i) {
    m[i][i] = 1.0;
    for (size_t j = i + 1; j < p; ++j) {
      std::vector<double> xi, xj;
      for (size_t r = 0; r < columns[i].size() && r < columns[j].size(); ++r) {
        if (columns[i][r] && columns[j][r]) {
          xi.push_back(*columns[i][r]);
          xj.push_back(*columns[j][r]);
        }
      }
      if (xi.size() < 2) continue;
      try {
        const double rho = spearman(xi, xj).coefficient;
        m[i][j] = rho;
        m[j][i] = rho;
      } catch (const DataError&) {
        // constant column pair: stays missing
      }
    }
  }
  return m;
}

// Kruskal-Wallis H with tie correction; p from chi-square with k-1 df.
inline KruskalResult kruskal_wallis(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) throw DataError("kruskal_wallis: need >= 2 groups");
  size_t total = 0;
  for (const auto& g : groups) {
    if (g.empty()) throw DataError("kruskal_wallis: empty group");
    total += g.size();
  }
  if (total < 3) throw DataError("kruskal_wallis: need total n >= 3");

  std::vector<double> pooled;
  pooled.reserve(total);
  for (const auto& g : groups) pooled.insert(pooled.end(), g.begin(), g.end());
  std::vector<double> r = ranks(pooled);

  KruskalResult out;
  out.df = static_cast<int>(groups.size()) - 1;
  const double n = static_cast<double>(total);
  double sum_r2 = 0.0;
  size_t offset = 0;
  for (const auto& g : groups) {
    double rs = 0.0;
    for (size_t i = 0; i < g.size(); ++i) rs += r[offset + i];
    sum_r2 += rs * rs / g.size();
    offset += g.size();
  }
  double h = 12.0 / (n * (n + 1.0)) * sum_r2 - 3.0 * (n + 1.0);

  // tie correction
  std::map<double, double> counts;
  for (double v : pooled) counts[v] += 1.0;
  double tie_sum = 0.0;
  for (auto& [v, t] : counts) tie_sum += t * t * t - t;
  const double correction = 1.0 - tie_sum / (n * n * n - n);
  if (correction <= 0.0) {
    out.h = 0.0;  // all values identical
    out.p_value = 1.0;
    return out;
  }
  h /= correction;
  out.h = std::max(0.0, h);
  out.p_value = chi2_sf(out.h, out.df);
  return out;
}

struct VifResult {
  double value = 1.0;
  bool capped = false;
};

inline constexpr double kVifCap = 1e12;

// Variance inflation factor of one column regressed on all others
// (with intercept), over complete-case rows. 1 / (1 - R^2), capped.
inline VifResult vif(const std::vector<std::vector<Cell>>& columns, size_t target) {
  const size_t p = columns.size();
  if (p < 3) throw DataError("vif: need at least 2 other features");
  if (target >= p) throw DataError("vif: target out of range");
  const size_t rows = columns[0].size();

  std::vector<size_t> complete;
  for (size_t r = 0; r < rows; ++r) {
    bool ok = true;
    for (size_t c = 0; c < p; ++c) ok = ok && columns[c].size() > r && columns[c][r].has_value();
    if (ok) complete.push_back(r);
  }
  if (complete.size() < p + 2) throw DataError("vif: not enough complete-case rows");

  // center everything, then project the target onto the predictor span by
  // modified Gram-Schmidt; rank deficiency just skips degenerate directions
  auto centered = [&](size_t c) {
    std::vector<double> v(complete.size());
    for (size_t i = 0; i < complete.size(); ++i) v[i] = *columns[c][complete[i]];
    const double m = mean(v);
    for (double& x : v) x -= m;
    return v;
  };

  std::vector<double> y = centered(target);
  double sst = 0.0;
  for (double v : y) sst += v * v;
  if (sst <= 0.0) return {kVifCap, true};  // constant target is degenerate

  std::vector<std::vector<double>> basis;
  for (size_t c = 0; c < p; ++c) {
    if (c == target) continue;
    std::vector<double> v = centered(c);
    for (const auto& b : basis) {
      double dot = 0.0;
      for (size_t i = 0; i < v.size(); ++i) dot += v[i] * b[i];
      for (size_t i = 0; i < v.size(); ++i) v[i] -= dot * b[i];
    }
    double norm2 = 0.0;
    for (double x : v) norm2 += x * x;
    if (norm2 < 1e-12 * complete.size()) continue;  // linearly dependent
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& x : v) x *= inv;
    basis.push_back(std::move(v));
  }

  double ssr = 0.0;
  for (const auto& b : basis) {
    double dot = 0.0;
    for (size_t i = 0; i < y.size(); ++i) dot += y[i] * b[i];
    ssr += dot * dot;
  }
  const double r2 = std::clamp(ssr / sst, 0.0, 1.0);
  if (1.0 - r2 < 1.0 / kVifCap) return {kVifCap, true};
  return {1.0 / (1.0 - r2), false};
}

struct Descriptive {
  double mean = 0.0;
  double median = 0.0;
  double std_dev = 0.0;  // population
  double min = 0.0;
  double max = 0.0;
  Cell skewness;         // missing for zero variance
  Cell excess_kurtosis;
};

inline Descriptive descriptive(const std::vector<double>& v) {
  if (v.empty()) throw DataError("descriptive: empty input");
  Descriptive d;
  d.mean = dyskit::mean(v);
  d.median = dyskit::median(v);
  d.std_dev = population_std(v);
  d.min = *std::min_element(v.begin(), v.end());
  d.max = *std::max_element(v.begin(), v.end());
  if (d.std_dev > 0.0) {
    double m3 = 0.0, m4 = 0.0;
    for (double x : v) {
      const double z = x - d.mean;
      m3 += z * z * z;
      m4 += z * z * z * z;
    }
    m3 /= v.size();
    m4 /= v.size();
    d.skewness = m3 / (d.std_dev * d.std_dev * d.std_dev);
    d.excess_kurtosis = m4 / (d.std_dev * d.std_dev * d.std_dev * d.std_dev) - 3.0;
  }
  return d;
}

}  // namespace dyskit::stats

#endif  // DYSKIT_STATS_HPP_
