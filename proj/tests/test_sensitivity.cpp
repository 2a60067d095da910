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

#include "pipeforge/sensitivity.hpp"

namespace pipeforge {
namespace {

Node node(int id, const std::string& op, std::vector<int> parents = {},
          ParamMap params = {}) {
  return Node{id, op, std::move(params), std::move(parents),
              MergePolicy::adaptive, false};
}

/// Classification data where the class signal lives in a low-variance
/// feature and a huge-variance feature is pure noise: projecting to one
/// principal component destroys the signal.
Dataset signal_vs_noise_dataset(int n, std::uint64_t seed) {
  Rng rng(seed);
  Dataset ds;
  ds.task = TaskType::classification;
  ds.num_classes = 2;
  ds.features = Matrix(n, 2);
  for (int i = 0; i < n; ++i) {
    const bool pos = rng.next_bool();
    ds.features.at(i, 0) = (pos ? 1.0 : -1.0) + 0.3 * rng.next_gaussian();
    ds.features.at(i, 1) = 60.0 * rng.next_gaussian();
    ds.target.push_back(pos ? 1.0 : 0.0);
  }
  ds.target[0] = 0.0;
  ds.target[1] = 1.0;
  return ds;
}

TEST(ImportanceFromScores, ClosedFormValues) {
  // F = 0.8, F' = 0.6, N = 1 -> 1 - 0.6/0.8 = 0.25.
  EXPECT_NEAR(importance_from_scores({0.8}, {0.6}), 0.25, 1e-12);
  // Identical scores -> exactly zero.
  EXPECT_DOUBLE_EQ(importance_from_scores({0.7, 0.7}, {0.7, 0.7}), 0.0);
  // Mean over iterations.
  EXPECT_NEAR(importance_from_scores({0.8, 0.5}, {0.6, 0.6}),
              0.5 * ((1 - 0.6 / 0.8) + (1 - 0.6 / 0.5)), 1e-12);
  // Negative when the modification improves the score.
  EXPECT_NEAR(importance_from_scores({0.5}, {0.75}), -0.5, 1e-12);
}

TEST(ImportanceFromScores, ExactlyInvariantToPositiveRescaling) {
  const std::vector<double> orig{0.8, 0.64, 0.5};
  const std::vector<double> mod{0.6, 0.7, 0.5};
  const double base = importance_from_scores(orig, mod);
  for (double c : {2.0, 0.25, 8.0}) {
    std::vector<double> so, sm;
    for (double v : orig) so.push_back(c * v);
    for (double v : mod) sm.push_back(c * v);
    EXPECT_DOUBLE_EQ(importance_from_scores(so, sm), base);
  }
}

TEST(NodeImportance, NoiseNodeDeletionIsNegative) {
  const auto reg = default_registry();
  auto p = make_pipeline({node(0, "pca_topk", {}, {{"k", std::int64_t{1}}}),
                          node(1, "logistic_regression", {0})});
  const auto data = signal_vs_noise_dataset(160, 3);
  SAConfig cfg;
  cfg.metric = Metric::ROC_AUC;
  cfg.iterations = 2;
  cfg.seed = 5;
  const double imp =
      node_importance(p, 0, data, cfg, SAApproach::deletion, reg);
  EXPECT_LT(imp, -0.05);
}

TEST(NodeImportance, SinkDeletionExcluded) {
  const auto reg = default_registry();
  auto p = make_pipeline({node(0, "standard_scaling"),
                          node(1, "logistic_regression", {0})});
  SAConfig cfg;
  cfg.metric = Metric::ROC_AUC;
  EXPECT_THROW(node_importance(p, 1, signal_vs_noise_dataset(60, 7), cfg,
                               SAApproach::deletion, reg),
               NodeNotModifiableError);
}

TEST(Analyze, ReportStructureAndBounds) {
  const auto reg = default_registry();
  auto p = make_pipeline({node(0, "pca_topk", {}, {{"k", std::int64_t{1}}}),
                          node(1, "logistic_regression", {0})});
  const auto data = signal_vs_noise_dataset(160, 11);
  SAConfig cfg;
  cfg.metric = Metric::ROC_AUC;
  cfg.seed = 13;
  const auto report = analyze(p, data, cfg, reg);

  EXPECT_EQ(report.n_total, 2);
  EXPECT_GE(report.sustainability_index, 0.0);
  EXPECT_LE(report.sustainability_index, 1.0);
  EXPECT_DOUBLE_EQ(report.sustainability_index,
                   1.0 - static_cast<double>(report.n_del) / report.n_total);
  EXPECT_EQ(report.sustainability_index == 1.0, report.n_del == 0);
  ASSERT_TRUE(report.per_node.count(0));
  EXPECT_TRUE(report.per_node.at(0).delete_improves);
  EXPECT_EQ(report.n_del, 1);
  EXPECT_DOUBLE_EQ(report.sustainability_index, 0.5);
}

TEST(Analyze, DeleteCandidateConsistentWithReality) {
  const auto reg = default_registry();
  auto p = make_pipeline({node(0, "pca_topk", {}, {{"k", std::int64_t{1}}}),
                          node(1, "logistic_regression", {0})});
  const auto data = signal_vs_noise_dataset(160, 17);
  SAConfig cfg;
  cfg.metric = Metric::ROC_AUC;
  cfg.seed = 19;
  cfg.iterations = 1;
  const auto report = analyze(p, data, cfg, reg);
  ASSERT_TRUE(report.per_node.at(0).delete_improves);

  // Re-score both on the same split the analysis used.
  auto [fit_fold, score_fold] = make_scoring_folds(data, 0.75, mix64(19, 0));
  const auto original = fit_and_score(p, fit_fold, score_fold,
                                      Metric::ROC_AUC, mix64(19, 0), reg);
  const auto pruned = fit_and_score(with_node_removed(p, 0), fit_fold,
                                    score_fold, Metric::ROC_AUC,
                                    mix64(19, 0), reg);
  EXPECT_GE(pruned.value, original.value);
}

TEST(Improve, IdentityWhenNothingImproves) {
  SAReport report;
  report.n_total = 2;
  report.per_node[0] = {true, 0.2, 0.1, "", false, false};
  auto p = make_pipeline({node(0, "standard_scaling"),
                          node(1, "logistic_regression", {0})});
  const auto out = improve(p, report);
  EXPECT_EQ(canonical_signature(out), canonical_signature(p));
}

TEST(Improve, RemovesNoiseNodeAndScoreRises) {
  const auto reg = default_registry();
  auto p = make_pipeline({node(0, "pca_topk", {}, {{"k", std::int64_t{1}}}),
                          node(1, "logistic_regression", {0})});
  const auto data = signal_vs_noise_dataset(160, 23);
  SAConfig cfg;
  cfg.metric = Metric::ROC_AUC;
  cfg.seed = 29;
  const auto report = analyze(p, data, cfg, reg);
  const auto improved = improve(p, report);
  ASSERT_EQ(improved.nodes.size(), 1u);
  EXPECT_EQ(improved.nodes[0].operation_id, "logistic_regression");

  auto [fit_fold, score_fold] = make_scoring_folds(data, 0.75, mix64(29, 0));
  const auto before = fit_and_score(p, fit_fold, score_fold, Metric::ROC_AUC,
                                    mix64(29, 0), reg);
  const auto after = fit_and_score(improved, fit_fold, score_fold,
                                   Metric::ROC_AUC, mix64(29, 0), reg);
  EXPECT_GT(after.value, before.value);

  // Re-analysis no longer sees the removed node.
  const auto report2 = analyze(improved, data, cfg, reg);
  EXPECT_FALSE(report2.per_node.count(0));
  EXPECT_EQ(report2.n_total, 1);
}

TEST(Improve, DeletionPreferredOverReplacementOnTies) {
  SAReport report;
  report.n_total = 3;
  SANodeReport del;
  del.deletable = true;
  del.importance_delete = -0.3;
  del.delete_improves = true;
  SANodeReport repl;
  repl.importance_replace = -0.3;
  repl.replace_improves = true;
  repl.best_replacement = "knn";
  report.per_node[0] = del;
  report.per_node[1] = repl;
  auto p = make_pipeline({node(0, "standard_scaling"),
                          node(1, "minmax_scaling", {0}),
                          node(2, "logistic_regression", {1})});
  const auto out = improve(p, report);
  // Node 0 deleted; node 1 untouched.
  EXPECT_EQ(out.nodes.size(), 2u);
  EXPECT_EQ(out.find_node(0), nullptr);
  EXPECT_EQ(out.find_node(1)->operation_id, "minmax_scaling");
}

TEST(Analyze, SingleNodePipelineReportsNoDeletableNodes) {
  const auto reg = default_registry();
  auto p = make_pipeline({node(0, "logistic_regression")});
  SAConfig cfg;
  cfg.metric = Metric::ROC_AUC;
  const auto report =
      analyze(p, signal_vs_noise_dataset(80, 31), cfg, reg);
  EXPECT_EQ(report.n_del, 0);
  EXPECT_DOUBLE_EQ(report.sustainability_index, 1.0);
  for (const auto& [id, nr] : report.per_node) EXPECT_FALSE(nr.deletable);
}

TEST(Analyze, FitFailuresScoreWorstWithoutAborting) {
  // Replacement candidates include OLS, which is singular on duplicated
  // columns; the report must still complete.
  const auto full = default_registry();
  Registry reg;
  reg.add(full.at("ridge"));
  reg.add(full.at("ols"));
  reg.add(full.at("standard_scaling"));
  Dataset ds;
  ds.task = TaskType::regression;
  ds.features = Matrix(40, 2);
  Rng rng(37);
  for (int i = 0; i < 40; ++i) {
    const double v = rng.next_gaussian();
    ds.features.at(i, 0) = v;
    ds.features.at(i, 1) = v;  // exact duplicate column
    ds.target.push_back(3 * v + 0.01 * rng.next_gaussian());
  }
  auto p = make_pipeline({node(0, "standard_scaling"), node(1, "ridge", {0})});
  SAConfig cfg;
  cfg.metric = Metric::MAE;
  cfg.seed = 41;
  const auto report = analyze(p, ds, cfg, reg);
  EXPECT_EQ(report.n_total, 2);
  // Swapping ridge for singular ols must look strongly harmful, not crash.
  ASSERT_TRUE(report.per_node.count(1));
  EXPECT_GT(report.per_node.at(1).importance_replace, 0.5);
}

TEST(Dot, ExportMentionsEveryNode) {
  const auto reg = default_registry();
  auto p = make_pipeline({node(0, "pca_topk", {}, {{"k", std::int64_t{1}}}),
                          node(1, "logistic_regression", {0})});
  SAConfig cfg;
  cfg.metric = Metric::ROC_AUC;
  const auto report = analyze(p, signal_vs_noise_dataset(120, 43), cfg, reg);
  const auto dot = sa_report_to_dot(p, report);
  EXPECT_NE(dot.find("digraph"), std::string::npos);
  EXPECT_NE(dot.find("pca_topk"), std::string::npos);
  EXPECT_NE(dot.find("logistic_regression"), std::string::npos);
  EXPECT_NE(dot.find("n0 -> n1"), std::string::npos);
}

}  // namespace
}  // namespace pipeforge
