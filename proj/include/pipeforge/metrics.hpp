/*
 * Copyright 2026 The PipeForge Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef PIPEFORGE_METRICS_HPP_
#define PIPEFORGE_METRICS_HPP_

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "pipeforge/dataset.hpp"
#include "pipeforge/errors.hpp"

namespace pipeforge {

enum class Metric { MAE, RMSE, F1, ROC_AUC, MAPE };

inline bool metric_higher_is_better(Metric m) {
  return m == Metric::F1 || m == Metric::ROC_AUC;
}

inline std::string metric_to_string(Metric m) {
  switch (m) {
    case Metric::MAE: return "mae";
    case Metric::RMSE: return "rmse";
    case Metric::F1: return "f1";
    case Metric::ROC_AUC: return "roc_auc";
    case Metric::MAPE: return "mape";
  }
  return "?";
}

inline std::optional<Metric> metric_from_string(const std::string& s) {
  if (s == "mae") return Metric::MAE;
  if (s == "rmse") return Metric::RMSE;
  if (s == "f1") return Metric::F1;
  if (s == "roc_auc" || s == "auc") return Metric::ROC_AUC;
  if (s == "mape") return Metric::MAPE;
  return std::nullopt;
}

inline Metric default_metric_for(TaskType task) {
  switch (task) {
    case TaskType::classification: return Metric::ROC_AUC;
    case TaskType::regression: return Metric::MAE;
    case TaskType::ts_forecasting: return Metric::MAPE;
  }
  return Metric::MAE;
}

struct MetricValue {
  Metric metric;
  double value;
  bool higher_is_better;
};

namespace detail {

inline void check_lengths(const std::vector<double>& a,
                          const std::vector<double>& b) {
  if (a.size() != b.size() || a.empty())
    throw DataShapeError("metric inputs must be equal-length and non-empty (" +
                         std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()) + ")");
}

/// Binary F1 with positive class = 1. Zero denominators yield 0.
inline double f1_binary(const std::vector<double>& pred,
                        const std::vector<double>& truth, double positive) {
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] == positive;
    const bool t = truth[i] == positive;
    if (p && t) ++tp;
    else if (p) ++fp;
    else if (t) ++fn;
  }
  const double denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : 2 * tp / denom;
}

}  // namespace detail

inline double mae(const std::vector<double>& pred,
                  const std::vector<double>& truth) {
  detail::check_lengths(pred, truth);
  double s = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += std::fabs(pred[i] - truth[i]);
  return s / pred.size();
}

inline double rmse(const std::vector<double>& pred,
                   const std::vector<double>& truth) {
  detail::check_lengths(pred, truth);
  double s = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - truth[i];
    s += d * d;
  }
  return std::sqrt(s / pred.size());
}

/// Mean absolute percentage error, reported in percent.
inline double mape(const std::vector<double>& pred,
                   const std::vector<double>& truth) {
  detail::check_lengths(pred, truth);
  double s = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (truth[i] == 0.0)
      throw ZeroDenominatorError("MAPE undefined for zero truth value at index " +
                                 std::to_string(i));
    s += std::fabs((pred[i] - truth[i]) / truth[i]);
  }
  return 100.0 * s / pred.size();
}

/// F1 score: binary (positive class 1) for two classes, macro-averaged over
/// observed classes otherwise.
inline double f1_score(const std::vector<double>& pred,
                       const std::vector<double>& truth) {
  detail::check_lengths(pred, truth);
  std::vector<double> classes(truth);
  for (double p : pred) classes.push_back(p);
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  if (classes.size() <= 2) return detail::f1_binary(pred, truth, 1.0);
  double sum = 0;
  for (double c : classes) sum += detail::f1_binary(pred, truth, c);
  return sum / classes.size();
}

/// Exact ROC AUC via the rank statistic (Mann-Whitney with midranks for
/// ties), O(n log n). `scores` are probabilities/scores of class 1.
inline double roc_auc(const std::vector<double>& scores,
                      const std::vector<double>& truth) {
  detail::check_lengths(scores, truth);
  std::size_t n_pos = 0;
  for (double t : truth) n_pos += (t == 1.0);
  const std::size_t n_neg = truth.size() - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw DegenerateClassError("ROC AUC needs both classes present");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  double rank_sum_pos = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() &&
           scores[order[j + 1]] == scores[order[i]])
      ++j;
    const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (std::size_t k = i; k <= j; ++k)
      if (truth[order[k]] == 1.0) rank_sum_pos += midrank;
    i = j + 1;
  }
  const double u = rank_sum_pos - static_cast<double>(n_pos) * (n_pos + 1) / 2.0;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

/// For ROC_AUC, `predictions` must be scores of class 1; for F1, labels.
inline MetricValue evaluate_metric(Metric metric,
                                   const std::vector<double>& predictions,
                                   const std::vector<double>& truth) {
  double v = 0;
  switch (metric) {
    case Metric::MAE: v = mae(predictions, truth); break;
    case Metric::RMSE: v = rmse(predictions, truth); break;
    case Metric::MAPE: v = mape(predictions, truth); break;
    case Metric::F1: v = f1_score(predictions, truth); break;
    case Metric::ROC_AUC: v = roc_auc(predictions, truth); break;
  }
  return {metric, v, metric_higher_is_better(metric)};
}

/// Converts any metric into a positive higher-is-better score: identity for
/// F1/ROC AUC, 1/(1+value) for error metrics. Strictly monotone in metric
/// improvement.
inline double to_fitness_score(const MetricValue& mv) {
  if (mv.higher_is_better) return mv.value;
  return 1.0 / (1.0 + mv.value);
}

}  // namespace pipeforge

#endif  // PIPEFORGE_METRICS_HPP_
