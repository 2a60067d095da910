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

#ifndef PIPEFORGE_TRANSFORMS_HPP_
#define PIPEFORGE_TRANSFORMS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "pipeforge/errors.hpp"
#include "pipeforge/matrix.hpp"
#include "pipeforge/random.hpp"

namespace pipeforge {

// ---------------------------------------------------------------------------
// Column scalers

struct StandardScalerState {
  std::vector<double> means;
  std::vector<double> stds;  // zero-variance columns store 1
};

inline StandardScalerState fit_standard_scaler(const Matrix& x) {
  StandardScalerState st;
  st.means.assign(x.cols(), 0.0);
  st.stds.assign(x.cols(), 1.0);
  if (x.rows() == 0) return st;
  for (std::size_t c = 0; c < x.cols(); ++c) {
    double mean = 0;
    for (std::size_t r = 0; r < x.rows(); ++r) mean += x.at(r, c);
    mean /= x.rows();
    double var = 0;
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const double d = x.at(r, c) - mean;
      var += d * d;
    }
    st.means[c] = mean;
    st.stds[c] = var > 0 ? std::sqrt(var / x.rows()) : 1.0;
  }
  return st;
}

inline Matrix apply_standard_scaler(const StandardScalerState& st, const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c)
      out.at(r, c) = (x.at(r, c) - st.means[c]) / st.stds[c];
  return out;
}

inline Matrix invert_standard_scaler(const StandardScalerState& st, const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c)
      out.at(r, c) = x.at(r, c) * st.stds[c] + st.means[c];
  return out;
}

struct MinMaxScalerState {
  std::vector<double> mins;
  std::vector<double> ranges;  // zero ranges store 1
};

inline MinMaxScalerState fit_minmax_scaler(const Matrix& x) {
  MinMaxScalerState st;
  st.mins.assign(x.cols(), 0.0);
  st.ranges.assign(x.cols(), 1.0);
  if (x.rows() == 0) return st;
  for (std::size_t c = 0; c < x.cols(); ++c) {
    double lo = x.at(0, c), hi = x.at(0, c);
    for (std::size_t r = 1; r < x.rows(); ++r) {
      lo = std::min(lo, x.at(r, c));
      hi = std::max(hi, x.at(r, c));
    }
    st.mins[c] = lo;
    st.ranges[c] = hi > lo ? hi - lo : 1.0;
  }
  return st;
}

inline Matrix apply_minmax_scaler(const MinMaxScalerState& st, const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c)
      out.at(r, c) = (x.at(r, c) - st.mins[c]) / st.ranges[c];
  return out;
}

inline Matrix invert_minmax_scaler(const MinMaxScalerState& st, const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c)
      out.at(r, c) = x.at(r, c) * st.ranges[c] + st.mins[c];
  return out;
}

// ---------------------------------------------------------------------------
// Mean imputation. Fit statistics ignore NaNs; apply substitutes them.

struct ImputationState {
  std::vector<double> column_means;  // all-NaN columns store 0
};

inline ImputationState fit_mean_imputation(const Matrix& x) {
  ImputationState st;
  st.column_means.assign(x.cols(), 0.0);
  for (std::size_t c = 0; c < x.cols(); ++c) {
    double sum = 0;
    std::size_t n = 0;
    for (std::size_t r = 0; r < x.rows(); ++r) {
      if (!std::isnan(x.at(r, c))) {
        sum += x.at(r, c);
        ++n;
      }
    }
    st.column_means[c] = n > 0 ? sum / n : 0.0;
  }
  return st;
}

inline Matrix apply_mean_imputation(const ImputationState& st, const Matrix& x) {
  Matrix out = x;
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c)
      if (std::isnan(out.at(r, c))) out.at(r, c) = st.column_means[c];
  return out;
}

// ---------------------------------------------------------------------------
// Z-score outlier filter. Row removal happens only while fitting; at predict
// time every row must yield a prediction, so the operation passes data
// through unchanged.

struct OutlierFilterState {
  std::vector<double> means;
  std::vector<double> stds;
  double threshold = 3.0;
};

inline OutlierFilterState fit_outlier_filter(const Matrix& x, double threshold) {
  auto scaler = fit_standard_scaler(x);
  return {std::move(scaler.means), std::move(scaler.stds), threshold};
}

/// Indices of rows whose every column z-score stays within the threshold.
inline std::vector<std::size_t> outlier_filter_keep(const OutlierFilterState& st,
                                                    const Matrix& x) {
  std::vector<std::size_t> keep;
  keep.reserve(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    bool ok = true;
    for (std::size_t c = 0; c < x.cols(); ++c) {
      const double z = (x.at(r, c) - st.means[c]) / st.stds[c];
      if (std::fabs(z) > st.threshold) {
        ok = false;
        break;
      }
    }
    if (ok) keep.push_back(r);
  }
  // Never empty the dataset: degenerate thresholds fall back to a no-op.
  if (keep.empty())
    for (std::size_t r = 0; r < x.rows(); ++r) keep.push_back(r);
  return keep;
}

// ---------------------------------------------------------------------------
// PCA via power iteration with deflation. Components are sign-normalized
// (largest-magnitude loading positive) to keep refits comparable.

struct PcaState {
  std::vector<double> column_means;
  std::vector<double> components;  // k x d row-major
  std::size_t n_components = 0;
  std::size_t input_dims = 0;
};

inline PcaState fit_pca(const Matrix& x, std::int64_t k, std::uint64_t seed) {
  const std::size_t n = x.rows(), d = x.cols();
  if (n < 2 || d == 0) throw DataShapeError("pca needs >= 2 rows and >= 1 column");
  const std::size_t k_eff =
      std::min<std::size_t>(static_cast<std::size_t>(std::max<std::int64_t>(k, 1)), d);

  PcaState st;
  st.input_dims = d;
  st.n_components = k_eff;
  st.column_means.assign(d, 0.0);
  for (std::size_t c = 0; c < d; ++c) {
    double mean = 0;
    for (std::size_t r = 0; r < n; ++r) mean += x.at(r, c);
    st.column_means[c] = mean / n;
  }

  // Covariance of the centered data.
  std::vector<double> cov(d * d, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t i = 0; i < d; ++i) {
      const double vi = x.at(r, i) - st.column_means[i];
      for (std::size_t j = i; j < d; ++j)
        cov[i * d + j] += vi * (x.at(r, j) - st.column_means[j]);
    }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < i; ++j) cov[i * d + j] = cov[j * d + i];
  for (double& v : cov) v /= (n - 1);

  Rng rng(mix64(seed, 0x706361ULL));  // "pca"
  std::vector<double> v(d), w(d);
  for (std::size_t comp = 0; comp < k_eff; ++comp) {
    for (std::size_t i = 0; i < d; ++i) v[i] = rng.next_gaussian();
    double norm = 0;
    for (double a : v) norm += a * a;
    norm = std::sqrt(norm);
    for (double& a : v) a /= norm;

    double eigenvalue = 0;
    for (int it = 0; it < 300; ++it) {
      for (std::size_t i = 0; i < d; ++i) {
        double acc = 0;
        for (std::size_t j = 0; j < d; ++j) acc += cov[i * d + j] * v[j];
        w[i] = acc;
      }
      double wn = 0;
      for (double a : w) wn += a * a;
      wn = std::sqrt(wn);
      if (wn < 1e-300) break;  // fully deflated
      double delta = 0;
      for (std::size_t i = 0; i < d; ++i) {
        const double nv = w[i] / wn;
        delta += std::fabs(nv - v[i]);
        v[i] = nv;
      }
      eigenvalue = wn;
      if (delta < 1e-13) break;
    }

    std::size_t arg = 0;
    for (std::size_t i = 1; i < d; ++i)
      if (std::fabs(v[i]) > std::fabs(v[arg])) arg = i;
    if (v[arg] < 0)
      for (double& a : v) a = -a;

    for (double a : v) st.components.push_back(a);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        cov[i * d + j] -= eigenvalue * v[i] * v[j];
  }
  return st;
}

inline Matrix apply_pca(const PcaState& st, const Matrix& x) {
  Matrix out(x.rows(), st.n_components);
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t comp = 0; comp < st.n_components; ++comp) {
      double acc = 0;
      for (std::size_t c = 0; c < st.input_dims; ++c)
        acc += (x.at(r, c) - st.column_means[c]) *
               st.components[comp * st.input_dims + c];
      out.at(r, comp) = acc;
    }
  return out;
}

// ---------------------------------------------------------------------------
// Time-series operations. A series travels through the pipeline as the
// target vector until a lagged transform turns it into a window matrix.

struct LaggedState {
  std::int64_t window = 10;
  /// Distance (in elements) between a window's end and its target. Captured
  /// from the dataset's forecast horizon at fit time.
  std::int64_t gap = 1;
};

struct LaggedOutput {
  Matrix features;                   // one row per window
  std::vector<double> targets;       // empty in forecast mode
  std::vector<std::size_t> row_ids;  // target positions (see below)
};

/// Training mode: every in-sample window/target pair; row id = index of the
/// target element within the series.
inline LaggedOutput lagged_training_rows(const LaggedState& st,
                                         const std::vector<double>& series) {
  const auto n = static_cast<std::int64_t>(series.size());
  const std::int64_t w = st.window, g = st.gap;
  if (n < w + g)
    throw DataShapeError("series of " + std::to_string(n) +
                         " elements is too short for window " +
                         std::to_string(w) + " + gap " + std::to_string(g));
  LaggedOutput out;
  const std::int64_t rows = n - w - g + 1;
  out.features = Matrix(rows, w);
  out.targets.resize(rows);
  out.row_ids.resize(rows);
  for (std::int64_t i = 0; i < rows; ++i) {
    for (std::int64_t c = 0; c < w; ++c) out.features.at(i, c) = series[i + c];
    out.targets[i] = series[i + w + g - 1];
    out.row_ids[i] = static_cast<std::size_t>(i + w + g - 1);
  }
  return out;
}

/// Forecast mode: windows for the `horizon` future positions after the end
/// of the prehistory. All windows lie inside the observed series because the
/// trained gap covers the look-ahead; row id = 0-based forecast step.
inline LaggedOutput lagged_forecast_rows(const LaggedState& st,
                                         const std::vector<double>& series,
                                         std::int64_t horizon) {
  const auto n = static_cast<std::int64_t>(series.size());
  const std::int64_t w = st.window, g = st.gap;
  if (horizon <= 0) throw DataShapeError("forecast horizon must be positive");
  if (horizon > g)
    throw DataShapeError("forecast horizon " + std::to_string(horizon) +
                         " exceeds the trained look-ahead " + std::to_string(g));
  if (n < w + g - 1)
    throw DataShapeError("prehistory too short for window " + std::to_string(w));
  LaggedOutput out;
  out.features = Matrix(horizon, w);
  out.row_ids.resize(horizon);
  for (std::int64_t j = 0; j < horizon; ++j) {
    const std::int64_t window_end = n - 1 + (j + 1) - g;  // inclusive index
    for (std::int64_t c = 0; c < w; ++c)
      out.features.at(j, c) = series[window_end - w + 1 + c];
    out.row_ids[j] = static_cast<std::size_t>(j);
  }
  return out;
}

struct SmoothingState {
  std::int64_t window = 3;
};

/// Trailing moving average; the first window-1 values average the available
/// prefix so the series length never changes.
inline std::vector<double> apply_smoothing(const SmoothingState& st,
                                           const std::vector<double>& series) {
  std::vector<double> out(series.size());
  double acc = 0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    acc += series[i];
    if (i >= static_cast<std::size_t>(st.window)) acc -= series[i - st.window];
    const auto denom = std::min<std::size_t>(i + 1, static_cast<std::size_t>(st.window));
    out[i] = acc / denom;
  }
  return out;
}

}  // namespace pipeforge

#endif  // PIPEFORGE_TRANSFORMS_HPP_
