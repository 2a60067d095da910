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

#ifndef PIPEFORGE_FIXTURES_HPP_
#define PIPEFORGE_FIXTURES_HPP_

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "pipeforge/dataset.hpp"
#include "pipeforge/random.hpp"

// Bundled synthetic datasets. Shapes mimic small public benchmarks
// (55x2, 50x4, 267x22, 351x34 and two economic-style series) so the
// repository tests and the benchmark harness run offline; they are
// substitutes, not replications.
namespace pipeforge::fixtures {

/// 55 x 2 regression; one nonlinear driver and one large-scale nuisance
/// feature, so scaling + a nonlinear model beats any raw single model.
inline Dataset elusage_like() {
  Rng rng(0xe1400001ULL);
  Dataset ds;
  ds.task = TaskType::regression;
  ds.features = Matrix(55, 2);
  ds.feature_names = {"avg_temp", "house_size"};
  for (int i = 0; i < 55; ++i) {
    const double t = rng.next_uniform(0.0, 6.0);
    const double s = rng.next_uniform(20.0, 240.0);
    ds.features.at(i, 0) = t;
    ds.features.at(i, 1) = s;
    ds.target.push_back(25.0 + 14.0 * std::sin(1.4 * t) + 0.05 * s +
                        rng.next_gaussian() * 1.2);
  }
  return ds;
}

/// 50 x 4 regression; linear base plus an interaction term.
inline Dataset faculty_like() {
  Rng rng(0xfac0001ULL);
  Dataset ds;
  ds.task = TaskType::regression;
  ds.features = Matrix(50, 4);
  ds.feature_names = {"years", "pubs", "grants", "rating"};
  for (int i = 0; i < 50; ++i) {
    const double years = rng.next_uniform(1.0, 30.0);
    const double pubs = rng.next_uniform(0.0, 80.0);
    const double grants = rng.next_uniform(0.0, 12.0);
    const double rating = rng.next_uniform(1.0, 5.0);
    ds.features.at(i, 0) = years;
    ds.features.at(i, 1) = pubs;
    ds.features.at(i, 2) = grants;
    ds.features.at(i, 3) = rating;
    ds.target.push_back(40.0 + 1.1 * years + 0.25 * pubs + 2.0 * grants +
                        0.08 * years * rating + rng.next_gaussian() * 2.5);
  }
  return ds;
}

/// 200 x 4 regression; curvature and feature scales differ wildly, so a
/// scaled nonlinear pipeline has real headroom over any plain linear fit.
inline Dataset esl_like() {
  Rng rng(0xe51700aULL);
  Dataset ds;
  ds.task = TaskType::regression;
  ds.features = Matrix(200, 4);
  ds.feature_names = {"in1", "in2", "in3", "in4"};
  for (int i = 0; i < 200; ++i) {
    const double a = rng.next_uniform(0.0, 9.0);
    const double b = rng.next_uniform(0.0, 90.0);
    const double c = rng.next_uniform(-50.0, 50.0);
    const double d = rng.next_uniform(0.0, 9.0);
    ds.features.at(i, 0) = a;
    ds.features.at(i, 1) = b;
    ds.features.at(i, 2) = c;
    ds.features.at(i, 3) = d;
    ds.target.push_back(4.0 * std::sin(0.9 * a) + 0.02 * b +
                        0.0015 * c * c + 0.3 * d +
                        rng.next_gaussian() * 0.25);
  }
  return ds;
}

/// 267 x 22 binary classification (SPECT-style shape). Linear logits over
/// six informative features, but a slice of rows carries high-leverage
/// corrupted measurements with arbitrary labels: raw single models suffer,
/// outlier filtering ahead of a linear model shines.
inline Dataset spect_like() {
  Rng rng(0x5bec7002ULL);
  Dataset ds;
  ds.task = TaskType::classification;
  ds.num_classes = 2;
  ds.features = Matrix(267, 22);
  for (int c = 0; c < 22; ++c)
    ds.feature_names.push_back("f" + std::to_string(c));
  const double w[6] = {1.6, -1.4, 1.2, 1.0, -0.9, 0.8};
  for (int i = 0; i < 267; ++i) {
    const bool corrupt = rng.next_bool(0.07);
    double logit = -0.2;
    for (int c = 0; c < 6; ++c) {
      double v = rng.next_gaussian();
      logit += w[c] * v;
      if (corrupt) v *= 12.0;
      ds.features.at(i, c) = v;
    }
    for (int c = 6; c < 22; ++c)
      ds.features.at(i, c) = rng.next_gaussian() * (c % 4 == 0 ? 30.0 : 1.0);
    double p = 1.0 / (1.0 + std::exp(-logit));
    if (rng.next_bool(0.02)) p = 1.0 - p;  // label noise
    const bool label = corrupt ? rng.next_bool() : rng.next_bool(p);
    ds.target.push_back(label ? 1.0 : 0.0);
  }
  return ds;
}

/// 351 x 34 binary classification; class = inner vs outer shell in the
/// first six dimensions, the rest noise with wildly different scales.
inline Dataset ionosphere_like() {
  Rng rng(0x10400357ULL);
  Dataset ds;
  ds.task = TaskType::classification;
  ds.num_classes = 2;
  ds.features = Matrix(351, 34);
  for (int c = 0; c < 34; ++c)
    ds.feature_names.push_back("a" + std::to_string(c));
  for (int i = 0; i < 351; ++i) {
    const bool outer = rng.next_bool(0.45);
    double r2 = 0;
    double dims[6];
    for (double& d : dims) {
      d = rng.next_gaussian();
      r2 += d * d;
    }
    const double radius = outer ? 2.6 + rng.next_uniform(0.0, 0.8)
                                : 0.8 + rng.next_uniform(0.0, 0.7);
    const double scale = radius / std::sqrt(r2 > 0 ? r2 : 1.0);
    for (int c = 0; c < 6; ++c) ds.features.at(i, c) = dims[c] * scale;
    for (int c = 6; c < 34; ++c)
      ds.features.at(i, c) = rng.next_gaussian() * (c % 3 == 0 ? 40.0 : 1.0);
    ds.target.push_back(outer ? 1.0 : 0.0);
  }
  return ds;
}

namespace detail {

inline Dataset make_series(std::size_t n, std::uint64_t seed, int horizon) {
  Rng rng(seed);
  Dataset ds;
  ds.task = TaskType::ts_forecasting;
  ds.forecast_horizon = horizon;
  ds.features = Matrix(n, 0);
  double ar = 0;
  for (std::size_t t = 0; t < n; ++t) {
    ar = 0.7 * ar + rng.next_gaussian() * 0.8;
    const double trend = 120.0 + 0.04 * static_cast<double>(t);
    const double season = 9.0 * std::sin(2.0 * 3.14159265358979323846 *
                                         static_cast<double>(t) / 24.0) +
                          4.0 * std::sin(2.0 * 3.14159265358979323846 *
                                         static_cast<double>(t) / 7.0);
    ds.target.push_back(trend + season + ar);
  }
  return ds;
}

}  // namespace detail

/// ~500-point synthetic economic-style series (trend + two seasonalities +
/// AR noise).
inline Dataset series_short(int horizon = 10) {
  return detail::make_series(500, 0x5e21e500ULL, horizon);
}

/// ~2000-point long-series substitute.
inline Dataset series_long(int horizon = 10) {
  return detail::make_series(2000, 0x5e21e2000ULL, horizon);
}

struct NamedDataset {
  std::string name;
  Dataset data;
};

inline std::vector<NamedDataset> regression_suite() {
  return {{"elusage_like", elusage_like()},
          {"faculty_like", faculty_like()},
          {"esl_like", esl_like()}};
}

inline std::vector<NamedDataset> classification_suite() {
  return {{"spect_like", spect_like()},
          {"ionosphere_like", ionosphere_like()}};
}

inline std::vector<NamedDataset> timeseries_suite() {
  return {{"series_short", series_short()}, {"series_long", series_long()}};
}

}  // namespace pipeforge::fixtures

#endif  // PIPEFORGE_FIXTURES_HPP_
