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

#ifndef PIPEFORGE_MODELS_HPP_
#define PIPEFORGE_MODELS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "pipeforge/errors.hpp"
#include "pipeforge/hyperparams.hpp"
#include "pipeforge/matrix.hpp"

namespace pipeforge {

/// Probabilities fed downstream are clipped to this range so log/ratio
/// consumers never see exact 0 or 1.
constexpr double kProbClipLow = 1e-6;
constexpr double kProbClipHigh = 1.0 - 1e-6;

inline double clip_probability(double p) {
  return std::min(kProbClipHigh, std::max(kProbClipLow, p));
}

// ---------------------------------------------------------------------------
// Linear regression (OLS / ridge)

struct LinearModelState {
  std::vector<double> coefficients;  // one per feature, intercept last
};

inline LinearModelState fit_linear(const Matrix& x, const std::vector<double>& y,
                                   double ridge_lambda) {
  if (x.rows() != y.size() || y.empty())
    throw DataShapeError("linear fit needs matching non-empty rows");
  return {linalg::solve_least_squares(x, y, ridge_lambda)};
}

inline std::vector<double> predict_linear(const LinearModelState& m,
                                          const Matrix& x) {
  std::vector<double> out(x.rows());
  const std::size_t d = m.coefficients.size() - 1;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double acc = m.coefficients[d];
    for (std::size_t c = 0; c < d; ++c) acc += m.coefficients[c] * x.at(r, c);
    out[r] = acc;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Multinomial logistic regression. Full-batch gradient descent with a fixed
// iteration count and internally standardized inputs; no stochastic parts,
// so refits are reproducible bit for bit.

struct LogisticState {
  std::vector<double> feature_means;
  std::vector<double> feature_stds;
  std::vector<double> weights;  // K x (d+1) row-major, intercept last
  int num_classes = 0;
};

namespace detail {

inline void softmax_row(std::vector<double>& logits) {
  double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0;
  for (double& v : logits) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : logits) v /= sum;
}

}  // namespace detail

inline LogisticState fit_logistic(const Matrix& x, const std::vector<double>& y,
                                  int num_classes, double l2) {
  constexpr int kIterations = 500;
  constexpr double kLearningRate = 0.1;
  const std::size_t n = x.rows(), d = x.cols();
  if (n != y.size() || n == 0)
    throw DataShapeError("logistic fit needs matching non-empty rows");
  const int k = std::max(num_classes, 2);

  LogisticState st;
  st.num_classes = k;
  st.feature_means.assign(d, 0.0);
  st.feature_stds.assign(d, 1.0);
  for (std::size_t c = 0; c < d; ++c) {
    double mean = 0;
    for (std::size_t r = 0; r < n; ++r) mean += x.at(r, c);
    mean /= n;
    double var = 0;
    for (std::size_t r = 0; r < n; ++r) {
      const double dv = x.at(r, c) - mean;
      var += dv * dv;
    }
    st.feature_means[c] = mean;
    st.feature_stds[c] = var > 0 ? std::sqrt(var / n) : 1.0;
  }

  Matrix xs(n, d);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c)
      xs.at(r, c) = (x.at(r, c) - st.feature_means[c]) / st.feature_stds[c];

  const std::size_t w = d + 1;
  st.weights.assign(static_cast<std::size_t>(k) * w, 0.0);
  std::vector<double> grad(st.weights.size());
  std::vector<double> logits(k);

  for (int it = 0; it < kIterations; ++it) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      for (int cls = 0; cls < k; ++cls) {
        double acc = st.weights[cls * w + d];
        for (std::size_t c = 0; c < d; ++c)
          acc += st.weights[cls * w + c] * xs.at(r, c);
        logits[cls] = acc;
      }
      detail::softmax_row(logits);
      const int label = static_cast<int>(y[r]);
      for (int cls = 0; cls < k; ++cls) {
        const double err = logits[cls] - (cls == label ? 1.0 : 0.0);
        for (std::size_t c = 0; c < d; ++c) grad[cls * w + c] += err * xs.at(r, c);
        grad[cls * w + d] += err;
      }
    }
    const double scale = kLearningRate / static_cast<double>(n);
    for (int cls = 0; cls < k; ++cls) {
      for (std::size_t c = 0; c < d; ++c) {
        const std::size_t idx = cls * w + c;
        st.weights[idx] -= scale * (grad[idx] + l2 * st.weights[idx]);
      }
      st.weights[cls * w + d] -= scale * grad[cls * w + d];
    }
  }
  return st;
}

/// Returns an n x K matrix of clipped class probabilities.
inline Matrix predict_logistic(const LogisticState& m, const Matrix& x) {
  const std::size_t n = x.rows(), d = x.cols();
  const int k = m.num_classes;
  const std::size_t w = d + 1;
  Matrix out(n, k);
  std::vector<double> logits(k);
  for (std::size_t r = 0; r < n; ++r) {
    for (int cls = 0; cls < k; ++cls) {
      double acc = m.weights[cls * w + d];
      for (std::size_t c = 0; c < d; ++c)
        acc += m.weights[cls * w + c] *
               ((x.at(r, c) - m.feature_means[c]) / m.feature_stds[c]);
      logits[cls] = acc;
    }
    detail::softmax_row(logits);
    for (int cls = 0; cls < k; ++cls) out.at(r, cls) = clip_probability(logits[cls]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// CART decision tree (gini for classification, variance for regression).
// Split search is exhaustive over feature/midpoint candidates with
// first-best tie breaking, which keeps refits deterministic.

struct TreeNode {
  int feature = -1;         // -1 for leaves
  double threshold = 0.0;   // go left when value < threshold
  int left = -1;
  int right = -1;
  double value = 0.0;               // regression leaf
  std::vector<double> class_probs;  // classification leaf
};

struct TreeState {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  int num_classes = 0;          // 0 for regression
};

namespace detail {

struct TreeBuilder {
  const Matrix& x;
  const std::vector<double>& y;
  int num_classes;  // 0 => regression
  std::int64_t max_depth;
  std::int64_t min_samples_split;
  std::vector<TreeNode> nodes;

  double impurity(const std::vector<std::size_t>& idx) const {
    if (num_classes > 0) {
      std::vector<double> counts(num_classes, 0.0);
      for (auto i : idx) counts[static_cast<int>(y[i])] += 1.0;
      double gini = 1.0;
      for (double c : counts) {
        const double p = c / idx.size();
        gini -= p * p;
      }
      return gini;
    }
    double mean = 0;
    for (auto i : idx) mean += y[i];
    mean /= idx.size();
    double var = 0;
    for (auto i : idx) {
      const double d = y[i] - mean;
      var += d * d;
    }
    return var / idx.size();
  }

  TreeNode make_leaf(const std::vector<std::size_t>& idx) const {
    TreeNode leaf;
    if (num_classes > 0) {
      leaf.class_probs.assign(num_classes, 0.0);
      for (auto i : idx) leaf.class_probs[static_cast<int>(y[i])] += 1.0;
      for (double& p : leaf.class_probs) p /= idx.size();
    } else {
      double mean = 0;
      for (auto i : idx) mean += y[i];
      leaf.value = mean / idx.size();
    }
    return leaf;
  }

  /// Weighted child impurity for every boundary of one feature in a single
  /// sorted scan: O(n log n) instead of O(n^2).
  void scan_feature(const std::vector<std::size_t>& idx, std::size_t f,
                    int* best_feature, double* best_threshold,
                    double* best_score) const {
    const std::size_t n = idx.size();
    std::vector<std::pair<double, double>> rows(n);  // (value, target)
    for (std::size_t i = 0; i < n; ++i)
      rows[i] = {x.at(idx[i], f), y[idx[i]]};
    std::sort(rows.begin(), rows.end());

    if (num_classes > 0) {
      std::vector<double> left_counts(num_classes, 0.0);
      std::vector<double> total_counts(num_classes, 0.0);
      for (const auto& [v, t] : rows) total_counts[static_cast<int>(t)] += 1.0;
      auto gini = [](const std::vector<double>& counts, double total) {
        double g = 1.0;
        for (double c : counts) {
          const double p = c / total;
          g -= p * p;
        }
        return g;
      };
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left_counts[static_cast<int>(rows[i].second)] += 1.0;
        if (rows[i].first == rows[i + 1].first) continue;
        std::vector<double> right_counts(num_classes);
        for (int c = 0; c < num_classes; ++c)
          right_counts[c] = total_counts[c] - left_counts[c];
        const double nl = static_cast<double>(i + 1);
        const double nr = static_cast<double>(n - i - 1);
        const double score =
            (gini(left_counts, nl) * nl + gini(right_counts, nr) * nr) / n;
        if (score < *best_score - 1e-15) {
          *best_score = score;
          *best_feature = static_cast<int>(f);
          *best_threshold = 0.5 * (rows[i].first + rows[i + 1].first);
        }
      }
      return;
    }

    double total_sum = 0, total_sq = 0;
    for (const auto& [v, t] : rows) {
      total_sum += t;
      total_sq += t * t;
    }
    double left_sum = 0, left_sq = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      left_sum += rows[i].second;
      left_sq += rows[i].second * rows[i].second;
      if (rows[i].first == rows[i + 1].first) continue;
      const double nl = static_cast<double>(i + 1);
      const double nr = static_cast<double>(n - i - 1);
      const double right_sum = total_sum - left_sum;
      const double right_sq = total_sq - left_sq;
      // n * var = sum of squares - sum^2 / n, per side.
      const double score =
          ((left_sq - left_sum * left_sum / nl) +
           (right_sq - right_sum * right_sum / nr)) /
          n;
      if (score < *best_score - 1e-15) {
        *best_score = score;
        *best_feature = static_cast<int>(f);
        *best_threshold = 0.5 * (rows[i].first + rows[i + 1].first);
      }
    }
  }

  int build(std::vector<std::size_t> idx, std::int64_t depth) {
    const int node_id = static_cast<int>(nodes.size());
    nodes.emplace_back();

    const double node_impurity = impurity(idx);
    if (depth >= max_depth ||
        static_cast<std::int64_t>(idx.size()) < min_samples_split ||
        node_impurity <= 0.0) {
      nodes[node_id] = make_leaf(idx);
      return node_id;
    }

    // Take the best split even at zero gain (a later level may still
    // separate, as in XOR); purity and the size/depth limits are the only
    // stopping rules.
    int best_feature = -1;
    double best_threshold = 0;
    double best_score = std::numeric_limits<double>::infinity();
    for (std::size_t f = 0; f < x.cols(); ++f)
      scan_feature(idx, f, &best_feature, &best_threshold, &best_score);

    if (best_feature < 0) {
      nodes[node_id] = make_leaf(idx);
      return node_id;
    }

    std::vector<std::size_t> left_idx, right_idx;
    for (auto i : idx)
      (x.at(i, best_feature) < best_threshold ? left_idx : right_idx).push_back(i);
    nodes[node_id].feature = best_feature;
    nodes[node_id].threshold = best_threshold;
    const int left = build(std::move(left_idx), depth + 1);
    const int right = build(std::move(right_idx), depth + 1);
    nodes[node_id].left = left;
    nodes[node_id].right = right;
    return node_id;
  }
};

}  // namespace detail

inline TreeState fit_tree(const Matrix& x, const std::vector<double>& y,
                          int num_classes, std::int64_t max_depth,
                          std::int64_t min_samples_split) {
  if (x.rows() != y.size() || y.empty())
    throw DataShapeError("tree fit needs matching non-empty rows");
  detail::TreeBuilder builder{x, y, num_classes, max_depth, min_samples_split, {}};
  std::vector<std::size_t> idx(x.rows());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  builder.build(std::move(idx), 0);
  return {std::move(builder.nodes), num_classes};
}

inline const TreeNode& tree_leaf_for(const TreeState& t,
                                     const Matrix& x, std::size_t row) {
  int cur = 0;
  while (t.nodes[cur].feature >= 0)
    cur = x.at(row, t.nodes[cur].feature) < t.nodes[cur].threshold
              ? t.nodes[cur].left
              : t.nodes[cur].right;
  return t.nodes[cur];
}

inline std::vector<double> predict_tree_regression(const TreeState& t,
                                                   const Matrix& x) {
  std::vector<double> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out[r] = tree_leaf_for(t, x, r).value;
  return out;
}

inline Matrix predict_tree_proba(const TreeState& t, const Matrix& x) {
  Matrix out(x.rows(), t.num_classes);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto& leaf = tree_leaf_for(t, x, r);
    for (int c = 0; c < t.num_classes; ++c)
      out.at(r, c) = clip_probability(leaf.class_probs[c]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// k nearest neighbors (memorizing; Euclidean; ties broken by train index).

struct KnnState {
  Matrix train_x;
  std::vector<double> train_y;
  std::int64_t k = 5;
  int num_classes = 0;  // 0 => regression
};

inline KnnState fit_knn(const Matrix& x, const std::vector<double>& y,
                        int num_classes, std::int64_t k) {
  if (x.rows() != y.size() || y.empty())
    throw DataShapeError("knn fit needs matching non-empty rows");
  return {x, y, k, num_classes};
}

namespace detail {

inline std::vector<std::size_t> knn_neighbors(const KnnState& m, const Matrix& x,
                                              std::size_t row) {
  const std::size_t n = m.train_x.rows();
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    double d2 = 0;
    for (std::size_t c = 0; c < x.cols(); ++c) {
      const double d = x.at(row, c) - m.train_x.at(i, c);
      d2 += d * d;
    }
    dist[i] = {d2, i};
  }
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(m.k), n);
  std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = dist[i].second;
  return out;
}

}  // namespace detail

inline std::vector<double> predict_knn_regression(const KnnState& m,
                                                  const Matrix& x) {
  std::vector<double> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double acc = 0;
    const auto nb = detail::knn_neighbors(m, x, r);
    for (auto i : nb) acc += m.train_y[i];
    out[r] = acc / nb.size();
  }
  return out;
}

inline Matrix predict_knn_proba(const KnnState& m, const Matrix& x) {
  Matrix out(x.rows(), m.num_classes);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto nb = detail::knn_neighbors(m, x, r);
    std::vector<double> counts(m.num_classes, 0.0);
    for (auto i : nb) counts[static_cast<int>(m.train_y[i])] += 1.0;
    for (int c = 0; c < m.num_classes; ++c)
      out.at(r, c) = clip_probability(counts[c] / nb.size());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Gaussian naive Bayes with Laplace-smoothed priors.

struct NaiveBayesState {
  std::vector<double> log_priors;  // K
  std::vector<double> means;       // K x d
  std::vector<double> vars;        // K x d
  int num_classes = 0;
};

inline NaiveBayesState fit_naive_bayes(const Matrix& x,
                                       const std::vector<double>& y,
                                       int num_classes, double var_smoothing) {
  const std::size_t n = x.rows(), d = x.cols();
  if (n != y.size() || n == 0)
    throw DataShapeError("naive bayes fit needs matching non-empty rows");
  const int k = std::max(num_classes, 2);

  NaiveBayesState st;
  st.num_classes = k;
  st.log_priors.assign(k, 0.0);
  st.means.assign(static_cast<std::size_t>(k) * d, 0.0);
  st.vars.assign(static_cast<std::size_t>(k) * d, 1.0);

  std::vector<double> counts(k, 0.0);
  for (double label : y) counts[static_cast<int>(label)] += 1.0;
  for (int cls = 0; cls < k; ++cls)
    st.log_priors[cls] = std::log((counts[cls] + 1.0) / (n + k));

  double max_var = 0.0;
  for (std::size_t c = 0; c < d; ++c) {
    double mean = 0;
    for (std::size_t r = 0; r < n; ++r) mean += x.at(r, c);
    mean /= n;
    double var = 0;
    for (std::size_t r = 0; r < n; ++r) {
      const double dv = x.at(r, c) - mean;
      var += dv * dv;
    }
    max_var = std::max(max_var, var / n);
  }
  const double eps = var_smoothing * std::max(max_var, 1e-12);

  for (int cls = 0; cls < k; ++cls) {
    if (counts[cls] == 0) continue;  // unit variance, zero mean stand-in
    for (std::size_t c = 0; c < d; ++c) {
      double mean = 0;
      for (std::size_t r = 0; r < n; ++r)
        if (static_cast<int>(y[r]) == cls) mean += x.at(r, c);
      mean /= counts[cls];
      double var = 0;
      for (std::size_t r = 0; r < n; ++r)
        if (static_cast<int>(y[r]) == cls) {
          const double dv = x.at(r, c) - mean;
          var += dv * dv;
        }
      st.means[cls * d + c] = mean;
      st.vars[cls * d + c] = var / counts[cls] + eps + 1e-12;
    }
  }
  return st;
}

inline Matrix predict_naive_bayes_proba(const NaiveBayesState& m,
                                        const Matrix& x) {
  const std::size_t n = x.rows(), d = x.cols();
  const int k = m.num_classes;
  Matrix out(n, k);
  std::vector<double> loglik(k);
  for (std::size_t r = 0; r < n; ++r) {
    for (int cls = 0; cls < k; ++cls) {
      double acc = m.log_priors[cls];
      for (std::size_t c = 0; c < d; ++c) {
        const double var = m.vars[cls * d + c];
        const double dv = x.at(r, c) - m.means[cls * d + c];
        acc += -0.5 * (std::log(2.0 * 3.14159265358979323846 * var) +
                       dv * dv / var);
      }
      loglik[cls] = acc;
    }
    detail::softmax_row(loglik);
    for (int cls = 0; cls < k; ++cls) out.at(r, cls) = clip_probability(loglik[cls]);
  }
  return out;
}

}  // namespace pipeforge

#endif  // PIPEFORGE_MODELS_HPP_
