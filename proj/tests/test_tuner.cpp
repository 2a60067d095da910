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

#include <gtest/gtest.h>

#include <cmath>

#include "pipeforge/tuner.hpp"

namespace pipeforge {
namespace {

Node node(int id, const std::string& op, std::vector<int> parents = {},
          ParamMap params = {}) {
  return Node{id, op, std::move(params), std::move(parents),
              MergePolicy::adaptive, false};
}

/// Noisy linear data with a few planted outliers; rewards both the outlier
/// filter's threshold and ridge's lambda.
Dataset tuning_dataset(int n, std::uint64_t seed) {
  Rng rng(seed);
  Dataset ds;
  ds.task = TaskType::regression;
  ds.features = Matrix(n, 2);
  for (int i = 0; i < n; ++i) {
    const double a = rng.next_gaussian(), b = rng.next_gaussian();
    ds.features.at(i, 0) = a;
    ds.features.at(i, 1) = b;
    double y = 4.0 * a - 1.5 * b + 0.4 * rng.next_gaussian();
    if (i % 17 == 0) y += 25.0;  // target outliers
    ds.target.push_back(y);
  }
  return ds;
}

ParamSpace log_space() {
  ParamSpace s;
  s["lambda"] = real_domain(1e-4, 1e2, true, 1.0);
  return s;
}

TEST(ProposeCandidate, CategoricalAlwaysInDomain) {
  ParamSpace s;
  s["mode"] = ParamDomain{CategoricalSet{{"a", "b"}}, std::string("a")};
  std::vector<TuningTrial> history;
  for (int i = 0; i < 200; ++i) {
    auto out = propose_candidate(s, history, i);
    const auto v = std::get<std::string>(out.at("mode"));
    EXPECT_TRUE(v == "a" || v == "b");
    history.push_back({out, static_cast<double>(i % 7)});
  }
}

TEST(ProposeCandidate, PureFunctionOfInputs) {
  ParamSpace s = log_space();
  std::vector<TuningTrial> history{{{{"lambda", 0.5}}, 0.7}};
  const auto a = propose_candidate(s, history, 99);
  const auto b = propose_candidate(s, history, 99);
  EXPECT_EQ(std::get<double>(a.at("lambda")), std::get<double>(b.at("lambda")));
  const auto c = propose_candidate(s, history, 100);
  EXPECT_NE(std::get<double>(a.at("lambda")), std::get<double>(c.at("lambda")));
}

TEST(ProposeCandidate, LogDimSampledLogUniform) {
  // KS-style check: empirical CDF of log10(samples) vs uniform on [-4, 2],
  // max deviation below 0.05 over 10,000 fresh (empty-history) proposals.
  ParamSpace s = log_space();
  std::vector<double> logs;
  for (int i = 0; i < 10000; ++i) {
    auto out = propose_candidate(s, {}, 7000 + i);
    logs.push_back(std::log10(std::get<double>(out.at("lambda"))));
  }
  std::sort(logs.begin(), logs.end());
  double max_dev = 0;
  for (std::size_t i = 0; i < logs.size(); ++i) {
    const double empirical = static_cast<double>(i + 1) / logs.size();
    const double uniform = (logs[i] + 4.0) / 6.0;
    max_dev = std::max(max_dev, std::fabs(empirical - uniform));
  }
  EXPECT_LT(max_dev, 0.05);
}

TEST(ProposeCandidate, FifthCallPerturbsIncumbent) {
  ParamSpace s = log_space();
  std::vector<TuningTrial> history;
  for (int i = 0; i < 4; ++i)
    history.push_back({{{"lambda", 1.0}}, i == 2 ? 10.0 : 0.1});
  // history.size() == 4 -> this is the 5th call; expect a local move
  // around the incumbent lambda = 1.0 rather than a fresh uniform draw.
  int close = 0;
  for (int seed = 0; seed < 50; ++seed) {
    const auto out = propose_candidate(s, history, seed);
    const double l = std::log10(std::get<double>(out.at("lambda")));
    if (std::fabs(l) < 1.5) ++close;  // within 1.5 decades of incumbent
  }
  EXPECT_GE(close, 45);
}

TEST(Tune, EmptySpacesReturnInputUnchanged) {
  const auto reg = default_registry();
  auto p = make_pipeline({node(0, "standard_scaling"), node(1, "ols", {0})});
  TuningConfig cfg;
  cfg.iterations = 10;
  cfg.metric = Metric::MAE;
  const auto [out, report] = tune(p, tuning_dataset(60, 1), cfg, reg);
  EXPECT_FALSE(report.tunable);
  EXPECT_EQ(canonical_signature(out), canonical_signature(p));
  EXPECT_DOUBLE_EQ(report.metric_before, report.metric_after);
  EXPECT_EQ(report.full_pipeline_evaluations, 0u);
}

TEST(Tune, NeverWorseAcrossStrategiesAndSeeds) {
  const auto reg = default_registry();
  auto p = make_pipeline({node(0, "zscore_outlier_filter"),
                          node(1, "standard_scaling", {0}),
                          node(2, "ridge", {1})});
  const auto data = tuning_dataset(90, 3);
  for (auto strategy : {TuningStrategy::serial_isolated,
                        TuningStrategy::sequential,
                        TuningStrategy::simultaneous}) {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      TuningConfig cfg;
      cfg.strategy = strategy;
      cfg.iterations = 15;
      cfg.metric = Metric::MAE;
      cfg.seed = seed;
      const auto [out, report] = tune(p, data, cfg, reg);
      EXPECT_GE(report.score_after, report.score_before)
          << tuning_strategy_to_string(strategy) << " seed " << seed;
    }
  }
}

TEST(Tune, TopologyNeverChanges) {
  const auto reg = default_registry();
  auto p = make_pipeline({node(0, "zscore_outlier_filter"),
                          node(1, "pca_topk", {0}),
                          node(2, "ridge", {1})});
  const auto data = tuning_dataset(80, 5);
  const auto topo = detail::topology_signature(p);
  for (auto strategy : {TuningStrategy::serial_isolated,
                        TuningStrategy::sequential,
                        TuningStrategy::simultaneous}) {
    TuningConfig cfg;
    cfg.strategy = strategy;
    cfg.iterations = 8;
    cfg.metric = Metric::MAE;
    const auto [out, report] = tune(p, data, cfg, reg);
    EXPECT_EQ(detail::topology_signature(out), topo)
        << tuning_strategy_to_string(strategy);
  }
}

TEST(Tune, EvaluationAccountingMatchesStrategyCosts) {
  const auto reg = default_registry();
  // Three nodes, each with a non-empty space.
  auto p = make_pipeline({node(0, "zscore_outlier_filter"),
                          node(1, "decision_tree", {0}),
                          node(2, "ridge", {1})});
  const auto data = tuning_dataset(80, 7);
  const int iters = 12;

  TuningConfig cfg;
  cfg.iterations = iters;
  cfg.metric = Metric::MAE;

  cfg.strategy = TuningStrategy::serial_isolated;
  const auto serial = tune(p, data, cfg, reg).second;
  EXPECT_EQ(serial.full_pipeline_evaluations, 0u);

  cfg.strategy = TuningStrategy::sequential;
  const auto sequential = tune(p, data, cfg, reg).second;
  EXPECT_EQ(sequential.full_pipeline_evaluations,
            static_cast<std::uint64_t>(3 * iters));

  cfg.strategy = TuningStrategy::simultaneous;
  const auto simultaneous = tune(p, data, cfg, reg).second;
  EXPECT_EQ(simultaneous.full_pipeline_evaluations,
            static_cast<std::uint64_t>(iters));

  EXPECT_LT(serial.full_pipeline_evaluations,
            simultaneous.full_pipeline_evaluations);
  EXPECT_LT(simultaneous.full_pipeline_evaluations,
            sequential.full_pipeline_evaluations);
}

TEST(Tune, SimultaneousAndSequentialAgreeOnSingleRidge) {
  // One tunable dimension, many iterations: both whole-pipeline strategies
  // must land in the same lambda region.
  const auto reg = default_registry();
  auto p = make_pipeline({node(0, "ridge")});
  Rng rng(11);
  Dataset ds;
  ds.task = TaskType::regression;
  ds.features = Matrix(120, 6);
  for (int i = 0; i < 120; ++i) {
    double acc = 0;
    for (int c = 0; c < 6; ++c) {
      ds.features.at(i, c) = rng.next_gaussian();
      acc += (c % 2 ? 0.2 : -0.3) * ds.features.at(i, c);
    }
    ds.target.push_back(acc + 2.0 * rng.next_gaussian());
  }

  TuningConfig cfg;
  cfg.iterations = 250;
  cfg.metric = Metric::MAE;
  cfg.seed = 5;

  cfg.strategy = TuningStrategy::simultaneous;
  const auto sim = tune(p, ds, cfg, reg).first;
  cfg.strategy = TuningStrategy::sequential;
  const auto seq = tune(p, ds, cfg, reg).first;

  const double l_sim =
      std::log10(param_as_double(sim.find_node(0)->hyperparams, "lambda", 1.0));
  const double l_seq =
      std::log10(param_as_double(seq.find_node(0)->hyperparams, "lambda", 1.0));
  EXPECT_NEAR(l_sim, l_seq, 0.75);
}

TEST(Tune, ReportRecordsImprovementDirection) {
  const auto reg = default_registry();
  auto p = make_pipeline(
      {node(0, "ridge", {}, {{"lambda", 100.0}})});  // badly over-penalized
  TuningConfig cfg;
  cfg.iterations = 40;
  cfg.metric = Metric::MAE;
  const auto [out, report] = tune(p, tuning_dataset(90, 13), cfg, reg);
  EXPECT_TRUE(report.tunable);
  EXPECT_TRUE(report.improved);
  EXPECT_LT(report.metric_after, report.metric_before);
  EXPECT_LT(param_as_double(out.find_node(0)->hyperparams, "lambda", 100.0),
            100.0);
}

TEST(Tune, WorksOnTimeSeriesPipelines) {
  const auto reg = default_registry();
  auto p = make_pipeline({node(0, "lagged_transform"),
                          node(1, "ridge", {0})});
  Dataset ds;
  ds.task = TaskType::ts_forecasting;
  ds.forecast_horizon = 8;
  ds.features = Matrix(160, 0);
  for (int t = 0; t < 160; ++t)
    ds.target.push_back(50 + 0.1 * t + 6 * std::sin(t * 0.26));
  for (auto strategy : {TuningStrategy::serial_isolated,
                        TuningStrategy::sequential,
                        TuningStrategy::simultaneous}) {
    TuningConfig cfg;
    cfg.strategy = strategy;
    cfg.iterations = 10;
    cfg.metric = Metric::MAPE;
    const auto [out, report] = tune(p, ds, cfg, reg);
    EXPECT_GE(report.score_after, report.score_before);
  }
}

}  // namespace
}  // namespace pipeforge
