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

// Goodness-of-pronunciation scoring over frame-level phoneme logits.
//
// With per-frame logits L(q|f) over phoneme set Q, softmax rows P(q|f), and
// the segment-mean distribution Pbar(q) = mean_f P(q|f):
//
//   GMM-GoP      mean_f log P(p|f)
//   NN-GoP       log Pbar(p) - max_q log Pbar(q)
//   DNN-GoP      Pbar(p) / prior(p)
//   Entropy      -sum_q Pbar(q) log Pbar(q)
//   Margin       Pbar(p) - max_{q != p} Pbar(q)
//   MaxLogit     Lbar(p)                  (frame-mean logit)
//   LogitMargin  Lbar(p) - max_{q != p} Lbar(q)
//
// Logit normalization happens before scoring: Prior subtracts log prior(q)
// per class, Scale divides by the temperature. Natural log throughout.

#ifndef DYSKIT_GOP_HPP_
#define DYSKIT_GOP_HPP_

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "dyskit/common.hpp"
#include "dyskit/stats.hpp"

namespace dyskit::gop {

struct LogitMatrix {
  std::vector<std::string> class_labels;
  double frame_shift = 0.02;  // seconds per frame
  size_t n_frames = 0;
  std::vector<double> data;  // row-major n_frames x |classes|

  size_t n_classes() const { return class_labels.size(); }

  double at(size_t frame, size_t cls) const { return data[frame * n_classes() + cls]; }
  double& at(size_t frame, size_t cls) { return data[frame * n_classes() + cls]; }

  int class_index(const std::string& label) const {
    for (size_t q = 0; q < class_labels.size(); ++q) {
      if (class_labels[q] == label) return static_cast<int>(q);
    }
    return -1;
  }

  void validate() const {
    if (n_classes() < 2) throw DataError("logit matrix: need >= 2 classes");
    if (data.size() != n_frames * n_classes()) throw DataError("logit matrix: bad shape");
    for (double v : data) {
      if (!std::isfinite(v)) throw DataError("logit matrix: non-finite entry");
    }
  }
};

struct PhoneSegment {
  std::string phoneme;
  size_t begin_frame = 0;  // inclusive
  size_t end_frame = 0;    // exclusive
};

enum class Method { kGmm, kNn, kDnn, kEntropy, kMargin, kMaxLogit, kLogitMargin };
enum class Normalization { kNone, kScale, kPrior };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::kGmm: return "gmm";
    case Method::kNn: return "nn";
    case Method::kDnn: return "dnn";
    case Method::kEntropy: return "entropy";
    case Method::kMargin: return "margin";
    case Method::kMaxLogit: return "maxlogit";
    case Method::kLogitMargin: return "logitmargin";
  }
  return "?";
}

inline const char* normalization_name(Normalization n) {
  switch (n) {
    case Normalization::kNone: return "none";
    case Normalization::kScale: return "scale";
    case Normalization::kPrior: return "prior";
  }
  return "?";
}

inline constexpr Method kAllMethods[] = {
    Method::kGmm,      Method::kNn,     Method::kDnn,        Method::kEntropy,
    Method::kMargin,   Method::kMaxLogit, Method::kLogitMargin};
inline constexpr Normalization kAllNormalizations[] = {
    Normalization::kNone, Normalization::kScale, Normalization::kPrior};

struct GopConfig {
  Method method = Method::kMaxLogit;
  Normalization normalization = Normalization::kNone;
  double temperature = 1.0;
  std::vector<double> priors;  // class priors, required for Prior and DNN-GoP

  void validate(size_t n_classes) const {
    if (temperature <= 0.0) throw ConfigError("gop: temperature must be positive");
    const bool needs_priors =
        normalization == Normalization::kPrior || method == Method::kDnn;
    if (needs_priors) {
      if (priors.size() != n_classes) throw ConfigError("gop: priors/classes mismatch");
      double sum = 0.0;
      for (double p : priors) {
        if (p <= 0.0) throw ConfigError("gop: priors must be positive");
        sum += p;
      }
      if (std::fabs(sum - 1.0) > 1e-9) throw ConfigError("gop: priors must sum to 1");
    }
  }
};

struct GopScore {
  std::vector<double> phoneme_scores;
  double utterance_score = 0.0;
};

// Applies the configured logit normalization; None is the identity.
inline LogitMatrix normalize(const LogitMatrix& logits, const GopConfig& cfg) {
  cfg.validate(logits.n_classes());
  LogitMatrix out = logits;
  switch (cfg.normalization) {
    case Normalization::kNone:
      break;
    case Normalization::kScale:
      for (double& v : out.data) v /= cfg.temperature;
      break;
    case Normalization::kPrior: {
      const size_t q = out.n_classes();
      std::vector<double> log_prior(q);
      for (size_t c = 0; c < q; ++c) log_prior[c] = std::log(cfg.priors[c]);
      for (size_t f = 0; f < out.n_frames; ++f) {
        for (size_t c = 0; c < q; ++c) out.at(f, c) -= log_prior[c];
      }
      break;
    }
  }
  return out;
}

namespace detail {

inline std::vector<double> softmax_row(const LogitMatrix& m, size_t frame) {
  const size_t q = m.n_classes();
  std::vector<double> p(q);
  double mx = m.at(frame, 0);
  for (size_t c = 1; c < q; ++c) mx = std::max(mx, m.at(frame, c));
  double sum = 0.0;
  for (size_t c = 0; c < q; ++c) {
    p[c] = std::exp(m.at(frame, c) - mx);
    sum += p[c];
  }
  for (double& v : p) v /= sum;
  return p;
}

// mean softmax distribution over the segment frames
inline std::vector<double> mean_posterior(const LogitMatrix& m, const PhoneSegment& seg) {
  std::vector<double> acc(m.n_classes(), 0.0);
  for (size_t f = seg.begin_frame; f < seg.end_frame; ++f) {
    std::vector<double> p = softmax_row(m, f);
    for (size_t c = 0; c < acc.size(); ++c) acc[c] += p[c];
  }
  const double n = static_cast<double>(seg.end_frame - seg.begin_frame);
  for (double& v : acc) v /= n;
  return acc;
}

inline std::vector<double> mean_logit(const LogitMatrix& m, const PhoneSegment& seg) {
  std::vector<double> acc(m.n_classes(), 0.0);
  for (size_t f = seg.begin_frame; f < seg.end_frame; ++f) {
    for (size_t c = 0; c < acc.size(); ++c) acc[c] += m.at(f, c);
  }
  const double n = static_cast<double>(seg.end_frame - seg.begin_frame);
  for (double& v : acc) v /= n;
  return acc;
}

}  // namespace detail

// Scores one phoneme segment on already-normalized logits.
inline double score_phoneme(const LogitMatrix& logits, const PhoneSegment& seg,
                            const GopConfig& cfg) {
  const int p = logits.class_index(seg.phoneme);
  if (p < 0) throw DataError("gop: unknown phoneme label '" + seg.phoneme + "'");
  if (seg.begin_frame >= seg.end_frame || seg.end_frame > logits.n_frames) {
    throw DataError("gop: empty or out-of-range segment");
  }
  const size_t target = static_cast<size_t>(p);

  switch (cfg.method) {
    case Method::kGmm: {
      double acc = 0.0;
      for (size_t f = seg.begin_frame; f < seg.end_frame; ++f) {
        std::vector<double> post = detail::softmax_row(logits, f);
        acc += std::log(std::max(post[target], 1e-300));
      }
      return acc / static_cast<double>(seg.end_frame - seg.begin_frame);
    }
    case Method::kNn: {
      std::vector<double> pbar = detail::mean_posterior(logits, seg);
      double mx = *std::max_element(pbar.begin(), pbar.end());
      return std::log(std::max(pbar[target], 1e-300)) - std::log(std::max(mx, 1e-300));
    }
    case Method::kDnn: {
      cfg.validate(logits.n_classes());
      std::vector<double> pbar = detail::mean_posterior(logits, seg);
      return pbar[target] / cfg.priors[target];
    }
    case Method::kEntropy: {
      std::vector<double> pbar = detail::mean_posterior(logits, seg);
      double h = 0.0;
      for (double v : pbar) {
        if (v > 0.0) h -= v * std::log(v);
      }
      return h;
    }
    case Method::kMargin: {
      std::vector<double> pbar = detail::mean_posterior(logits, seg);
      double other = -1.0;
      for (size_t c = 0; c < pbar.size(); ++c) {
        if (c != target) other = std::max(other, pbar[c]);
      }
      return pbar[target] - other;
    }
    case Method::kMaxLogit: {
      std::vector<double> lbar = detail::mean_logit(logits, seg);
      return lbar[target];
    }
    case Method::kLogitMargin: {
      std::vector<double> lbar = detail::mean_logit(logits, seg);
      double other = -1e300;
      for (size_t c = 0; c < lbar.size(); ++c) {
        if (c != target) other = std::max(other, lbar[c]);
      }
      return lbar[target] - other;
    }
  }
  throw ConfigError("gop: unknown method");
}

// Normalizes once, scores every segment, pools by unweighted mean.
inline GopScore score_utterance(const LogitMatrix& logits,
                                const std::vector<PhoneSegment>& segments,
                                const GopConfig& cfg) {
  if (segments.empty()) throw DataError("gop: no segments");
  LogitMatrix normed = normalize(logits, cfg);
  GopScore out;
  double sum = 0.0;
  for (const auto& seg : segments) {
    const double s = score_phoneme(normed, seg, cfg);
    out.phoneme_scores.push_back(s);
    sum += s;
  }
  out.utterance_score = sum / static_cast<double>(segments.size());
  return out;
}

// Kendall tau-b between utterance scores and ordinal severities; missing
// when either side is constant.
inline Cell severity_correlation(const std::vector<double>& scores,
                                 const std::vector<double>& severities) {
  if (scores.size() != severities.size() || scores.size() < 2) {
    throw DataError("severity_correlation: need >= 2 paired utterances");
  }
  try {
    return stats::kendall_tau(scores, severities).coefficient;
  } catch (const DataError&) {
    return std::nullopt;
  }
}

struct PhonemeRank {
  std::string label;
  double tau = 0.0;
  int n = 0;
};

// Per-phoneme-label tau between that label's scores and the severity of the
// utterance each instance came from, most severity-degrading (most negative)
// first. Labels with fewer than min_support instances, or constant data,
// are omitted.
inline std::vector<PhonemeRank> phoneme_ranking(
    const std::vector<std::string>& labels, const std::vector<double>& scores,
    const std::vector<double>& severities, int min_support = 2) {
  if (labels.size() != scores.size() || labels.size() != severities.size()) {
    throw DataError("phoneme_ranking: length mismatch");
  }
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> by_label;
  for (size_t i = 0; i < labels.size(); ++i) {
    by_label[labels[i]].first.push_back(scores[i]);
    by_label[labels[i]].second.push_back(severities[i]);
  }
  std::vector<PhonemeRank> out;
  for (auto& [label, xy] : by_label) {
    if (static_cast<int>(xy.first.size()) < min_support) continue;
    try {
      const double tau = stats::kendall_tau(xy.first, xy.second).coefficient;
      out.push_back({label, tau, static_cast<int>(xy.first.size())});
    } catch (const DataError&) {
      // constant scores or severities for this label: omitted
    }
  }
  std::sort(out.begin(), out.end(), [](const PhonemeRank& a, const PhonemeRank& b) {
    if (a.tau != b.tau) return a.tau < b.tau;
    return a.label < b.label;
  });
  return out;
}

}  // namespace dyskit::gop

#endif  // DYSKIT_GOP_HPP_
