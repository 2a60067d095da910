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

#include <algorithm>
#include <set>

#include "oracle_enumeration.hpp"
#include "pipeforge/composer.hpp"
#include "pipeforge/fixtures.hpp"

namespace pipeforge {
namespace {

Registry registry_subset(const std::vector<std::string>& ids) {
  const auto full = default_registry();
  Registry out;
  for (const auto& id : ids) out.add(full.at(id));
  return out;
}

Dataset noisy_linear(int n, std::uint64_t seed) {
  Rng rng(seed);
  Dataset ds;
  ds.task = TaskType::regression;
  ds.features = Matrix(n, 3);
  for (int i = 0; i < n; ++i) {
    double acc = 0;
    for (int c = 0; c < 3; ++c) {
      ds.features.at(i, c) = rng.next_gaussian();
      acc += (c + 1.0) * ds.features.at(i, c);
    }
    ds.target.push_back(acc + 0.3 * rng.next_gaussian());
  }
  return ds;
}

ComposerConfig base_config(std::uint64_t seed, Metric metric = Metric::MAE) {
  ComposerConfig cfg;
  cfg.pop_size = 10;
  cfg.offspring_size = 10;
  cfg.max_generations = 8;
  cfg.objectives = {ObjectiveSpec::quality(metric)};
  cfg.seed = seed;
  cfg.max_depth = 3;
  cfg.max_nodes = 5;
  return cfg;
}

TEST(Compose, SearchSpaceOfSizeOne) {
  const auto reg = registry_subset({"ols"});
  ComposerConfig cfg = base_config(1);
  cfg.max_nodes = 1;
  cfg.max_depth = 1;
  const auto result = compose(cfg, noisy_linear(50, 2), reg);
  ASSERT_EQ(result.front.members.size(), 1u);
  EXPECT_EQ(canonical_signature(result.front.members[0].pipeline),
            "ols{}a-<>");
}

TEST(Compose, DeterministicGivenSeed) {
  const auto reg =
      registry_subset({"standard_scaling", "ridge", "knn", "decision_tree"});
  const auto data = noisy_linear(60, 3);
  ComposerConfig cfg = base_config(11);
  auto a = compose(cfg, data, reg);
  auto b = compose(cfg, data, reg);
  ASSERT_EQ(a.front.members.size(), b.front.members.size());
  for (std::size_t i = 0; i < a.front.members.size(); ++i) {
    EXPECT_EQ(canonical_signature(a.front.members[i].pipeline),
              canonical_signature(b.front.members[i].pipeline));
    EXPECT_EQ(a.front.members[i].fitness, b.front.members[i].fitness);
  }
}

TEST(Compose, ParallelEvaluationMatchesSerial) {
  const auto reg = registry_subset({"standard_scaling", "ridge", "knn"});
  const auto data = noisy_linear(60, 5);
  ComposerConfig cfg = base_config(13);
  auto serial = compose(cfg, data, reg);
  cfg.jobs = 3;
  auto parallel = compose(cfg, data, reg);
  ASSERT_FALSE(serial.front.members.empty());
  EXPECT_EQ(canonical_signature(serial.front.members[0].pipeline),
            canonical_signature(parallel.front.members[0].pipeline));
  EXPECT_EQ(serial.front.members[0].fitness, parallel.front.members[0].fitness);
}

TEST(Compose, ElitismMonotoneBestInTelemetry) {
  const auto reg =
      registry_subset({"standard_scaling", "ridge", "knn", "decision_tree"});
  ComposerConfig cfg = base_config(17);
  cfg.max_generations = 12;
  const auto result = compose(cfg, noisy_linear(70, 7), reg);
  ASSERT_EQ(static_cast<int>(result.telemetry.size()),
            result.generations_completed);
  for (std::size_t i = 1; i < result.telemetry.size(); ++i)
    EXPECT_GE(result.telemetry[i].best_fitness,
              result.telemetry[i - 1].best_fitness);
}

TEST(Compose, Spea2LikeSelectionProducesAValidFront) {
  const auto reg =
      registry_subset({"standard_scaling", "ridge", "knn", "decision_tree"});
  ComposerConfig cfg = base_config(101);
  cfg.selection_type = ComposerConfig::Selection::spea2_like;
  cfg.objectives = {ObjectiveSpec::quality(Metric::MAE),
                    ObjectiveSpec::complexity_nodes()};
  const auto result = compose(cfg, noisy_linear(60, 103), reg);
  ASSERT_FALSE(result.front.members.empty());
  for (const auto& m : result.front.members)
    EXPECT_TRUE(validate(m.pipeline, cfg.structure_class, cfg.max_depth, reg,
                         TaskType::regression, cfg.max_nodes)
                    .ok);
}

TEST(Compose, AdaptiveRateSchemeRunsEndToEnd) {
  const auto reg = registry_subset({"standard_scaling", "ridge", "knn"});
  ComposerConfig cfg = base_config(107);
  cfg.adaptive_scheme = ComposerConfig::AdaptiveScheme::rate_adaptation;
  cfg.max_generations = 10;
  const auto result = compose(cfg, noisy_linear(60, 109), reg);
  ASSERT_FALSE(result.front.members.empty());
  for (std::size_t i = 1; i < result.telemetry.size(); ++i)
    EXPECT_GE(result.telemetry[i].best_fitness,
              result.telemetry[i - 1].best_fitness);
}

TEST(Compose, MultiObjectiveFrontIsNonDominated) {
  const auto reg =
      registry_subset({"standard_scaling", "ridge", "knn", "decision_tree"});
  ComposerConfig cfg = base_config(19);
  cfg.objectives = {ObjectiveSpec::quality(Metric::MAE),
                    ObjectiveSpec::complexity_nodes()};
  const auto result = compose(cfg, noisy_linear(60, 11), reg);
  const auto& members = result.front.members;
  ASSERT_FALSE(members.empty());
  for (std::size_t i = 0; i < members.size(); ++i)
    for (std::size_t j = 0; j < members.size(); ++j)
      if (i != j)
        EXPECT_FALSE(dominates(members[i].fitness, members[j].fitness));
}

TEST(Compose, BudgetRespectedAndFlagged) {
  const auto reg = registry_subset({"standard_scaling", "ridge", "knn"});
  ComposerConfig cfg = base_config(23);
  cfg.max_generations = 100000;
  cfg.time_limit_seconds = 0.3;
  const auto t0 = std::chrono::steady_clock::now();
  const auto result = compose(cfg, noisy_linear(80, 13), reg);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  EXPECT_LT(elapsed, 2.5);  // limit + one evaluation, generously
  EXPECT_LT(result.generations_completed, 100000);
}

TEST(Compose, ZeroBudgetReturnsBestEffort) {
  const auto reg = registry_subset({"standard_scaling", "ridge"});
  ComposerConfig cfg = base_config(29);
  cfg.time_limit_seconds = 0.0;
  const auto result = compose(cfg, noisy_linear(40, 17), reg);
  EXPECT_TRUE(result.budget_exhausted_before_first_evaluation);
}

// -- init_population ----------------------------------------------------

TEST(InitPopulation, InitialAssumptionsKeptVerbatim) {
  const auto reg = registry_subset({"standard_scaling", "ridge", "knn"});
  ComposerConfig cfg = base_config(31);
  Pipeline given = make_pipeline({Node{0, "standard_scaling", {}, {}},
                                  Node{1, "ridge", {}, {0}}});
  cfg.initial_pipelines = {given};
  EvolutionaryComposer composer(cfg, noisy_linear(40, 19), reg);
  auto pop = composer.init_population();
  ASSERT_EQ(static_cast<int>(pop.size()), cfg.pop_size);
  EXPECT_EQ(canonical_signature(pop[0].pipeline), canonical_signature(given));
  for (auto& ind : pop)
    EXPECT_TRUE(validate(ind.pipeline, cfg.structure_class, cfg.max_depth, reg,
                         TaskType::regression, cfg.max_nodes)
                    .ok);
}

TEST(InitPopulation, InvalidAssumptionRaises) {
  const auto reg = registry_subset({"standard_scaling", "ridge"});
  ComposerConfig cfg = base_config(37);
  Pipeline cyclic;
  cyclic.nodes = {Node{0, "ridge", {}, {1}}, Node{1, "ridge", {}, {0}}};
  cyclic.final_node_id = 0;
  cfg.initial_pipelines = {cyclic};
  EvolutionaryComposer composer(cfg, noisy_linear(40, 23), reg);
  EXPECT_THROW(composer.init_population(), InitialAssumptionInvalidError);
}

TEST(InitPopulation, SeededReproducibility) {
  const auto reg = registry_subset({"standard_scaling", "ridge", "knn",
                                    "decision_tree", "pca_topk"});
  ComposerConfig cfg = base_config(41);
  const auto data = noisy_linear(40, 29);
  EvolutionaryComposer a(cfg, data, reg), b(cfg, data, reg);
  auto pa = a.init_population(), pb = b.init_population();
  ASSERT_EQ(pa.size(), pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i)
    EXPECT_EQ(canonical_signature(pa[i].pipeline),
              canonical_signature(pb[i].pipeline));
}

// -- reproduce ------------------------------------------------------------

TEST(Reproduce, DegenerateRatesCopyParents) {
  const auto reg = registry_subset({"standard_scaling", "ridge", "knn"});
  ComposerConfig cfg = base_config(43);
  const auto data = noisy_linear(40, 31);
  EvolutionaryComposer composer(cfg, data, reg);
  auto pop = composer.init_population();
  composer.evaluate_population(pop);
  auto offspring = composer.reproduce(pop, 0.0, 0.0);
  std::set<std::string> parent_sigs;
  for (auto& p : pop) parent_sigs.insert(p.sig());
  ASSERT_EQ(static_cast<int>(offspring.size()), cfg.offspring_size);
  for (auto& child : offspring)
    EXPECT_TRUE(parent_sigs.count(child.sig()));
}

TEST(Reproduce, FuzzNoInvalidOffspringEscape) {
  const auto reg = registry_subset(
      {"standard_scaling", "minmax_scaling", "ridge", "knn", "decision_tree"});
  ComposerConfig cfg = base_config(47);
  cfg.pop_size = 12;
  cfg.offspring_size = 10;
  cfg.max_nodes = 7;
  cfg.max_depth = 4;
  const auto data = noisy_linear(40, 37);
  EvolutionaryComposer composer(cfg, data, reg);
  auto pop = composer.init_population();
  composer.evaluate_population(pop);

  int produced = 0;
  for (int round = 0; round < 100; ++round) {
    auto offspring = composer.reproduce(pop, 0.9, 0.9);
    for (auto& child : offspring) {
      ++produced;
      const auto v = validate(child.pipeline, cfg.structure_class,
                              cfg.max_depth, reg, TaskType::regression,
                              cfg.max_nodes);
      ASSERT_TRUE(v.ok) << v.rule << " after " << produced << " offspring";
    }
  }
  EXPECT_GE(produced, 1000);
}

// -- evaluation / cache -----------------------------------------------------

TEST(Evaluate, DuplicateSignatureHitsCache) {
  const auto reg = registry_subset({"standard_scaling", "ridge"});
  ComposerConfig cfg = base_config(53);
  const auto data = noisy_linear(40, 41);
  EvolutionaryComposer composer(cfg, data, reg);

  Pipeline p = make_pipeline({Node{0, "standard_scaling", {}, {}},
                              Node{1, "ridge", {}, {0}}});
  Pipeline relabeled = make_pipeline({Node{7, "standard_scaling", {}, {}},
                                      Node{3, "ridge", {}, {7}}});
  std::vector<Individual> pop{{p, {}, false, ""}, {relabeled, {}, false, ""}};
  composer.evaluate_population(pop);
  EXPECT_EQ(composer.cache().misses(), 1u);
  EXPECT_EQ(composer.cache().hits(), 1u);
  EXPECT_EQ(pop[0].fitness, pop[1].fitness);
}

TEST(Evaluate, FailedFitGetsWorstFitnessAndRunContinues) {
  const auto reg = registry_subset({"ols", "ridge"});
  // Duplicate columns: plain OLS is singular, ridge is fine.
  Dataset ds;
  ds.task = TaskType::regression;
  ds.features = Matrix(30, 2);
  Rng rng(43);
  for (int i = 0; i < 30; ++i) {
    const double v = rng.next_gaussian();
    ds.features.at(i, 0) = v;
    ds.features.at(i, 1) = v;
    ds.target.push_back(2 * v);
  }
  ComposerConfig cfg = base_config(59);
  cfg.objectives = {ObjectiveSpec::quality(Metric::MAE),
                    ObjectiveSpec::complexity_nodes()};
  EvolutionaryComposer composer(cfg, ds, reg);
  std::vector<Individual> pop{
      {make_pipeline({Node{0, "ols", {}, {}}}), {}, false, ""},
      {make_pipeline({Node{0, "ridge", {}, {}}}), {}, false, ""}};
  composer.evaluate_population(pop);
  EXPECT_EQ(pop[0].fitness[0], 0.0);   // worst quality
  EXPECT_EQ(pop[0].fitness[1], -1.0);  // complexity still computed
  EXPECT_GT(pop[1].fitness[0], 0.0);
}

TEST(Evaluate, CachedFitnessBitExactVersusFresh) {
  const auto reg =
      registry_subset({"standard_scaling", "ridge", "knn", "decision_tree"});
  const auto data = noisy_linear(60, 47);
  ComposerConfig with_cache = base_config(61);
  ComposerConfig no_cache = with_cache;
  no_cache.cache_enabled = false;
  auto a = compose(with_cache, data, reg);
  auto b = compose(no_cache, data, reg);
  ASSERT_FALSE(a.front.members.empty());
  ASSERT_EQ(a.front.members.size(), b.front.members.size());
  EXPECT_EQ(a.front.members[0].fitness, b.front.members[0].fitness);
  EXPECT_EQ(canonical_signature(a.front.members[0].pipeline),
            canonical_signature(b.front.members[0].pipeline));
  EXPECT_LE(a.fits_performed, b.fits_performed);
}

// -- regularize ---------------------------------------------------------

TEST(Regularize, RemovesPassThroughScaler) {
  const auto reg = registry_subset({"standard_scaling", "ridge"});
  // Data already standardized: the scaler changes nothing.
  Rng rng(53);
  Dataset ds;
  ds.task = TaskType::regression;
  ds.features = Matrix(80, 1);
  std::vector<double> raw;
  for (int i = 0; i < 80; ++i) raw.push_back(rng.next_gaussian());
  double mean = 0;
  for (double v : raw) mean += v;
  mean /= raw.size();
  double var = 0;
  for (double v : raw) var += (v - mean) * (v - mean);
  const double stdev = std::sqrt(var / raw.size());
  for (int i = 0; i < 80; ++i) {
    ds.features.at(i, 0) = (raw[i] - mean) / stdev;
    ds.target.push_back(3.0 * ds.features.at(i, 0) +
                        0.05 * rng.next_gaussian());
  }

  ComposerConfig cfg = base_config(67);
  EvolutionaryComposer composer(cfg, ds, reg);
  std::vector<Individual> pop{
      {make_pipeline(
           {Node{0, "standard_scaling", {}, {}}, Node{1, "ridge", {}, {0}}}),
       {},
       false,
       ""}};
  composer.evaluate_population(pop);
  const auto fitness_before = pop[0].fitness;
  composer.regularize(pop);
  EXPECT_EQ(pop[0].pipeline.nodes.size(), 1u);
  EXPECT_EQ(pop[0].pipeline.nodes[0].operation_id, "ridge");
  EXPECT_GE(pop[0].fitness[0], fitness_before[0]);
}

TEST(Regularize, IrreducibleSingleNodeUnchanged) {
  const auto reg = registry_subset({"ridge"});
  ComposerConfig cfg = base_config(71);
  const auto data = noisy_linear(40, 59);
  EvolutionaryComposer composer(cfg, data, reg);
  std::vector<Individual> pop{
      {make_pipeline({Node{0, "ridge", {}, {}}}), {}, false, ""}};
  composer.evaluate_population(pop);
  composer.regularize(pop);
  EXPECT_EQ(pop[0].pipeline.nodes.size(), 1u);
}

TEST(Regularize, IdempotentOnItsOwnOutput) {
  const auto reg =
      registry_subset({"standard_scaling", "minmax_scaling", "ridge"});
  ComposerConfig cfg = base_config(73);
  const auto data = noisy_linear(60, 61);
  EvolutionaryComposer composer(cfg, data, reg);
  std::vector<Individual> pop;
  pop.push_back({make_pipeline({Node{0, "standard_scaling", {}, {}},
                                Node{1, "minmax_scaling", {}, {0}},
                                Node{2, "ridge", {}, {1}}}),
                 {},
                 false,
                 ""});
  composer.evaluate_population(pop);
  composer.regularize(pop);
  const auto first = canonical_signature(pop[0].pipeline);
  composer.regularize(pop);
  EXPECT_EQ(canonical_signature(pop[0].pipeline), first);
}

// -- adaptive rates ------------------------------------------------------

TEST(AdaptiveRates, EmptyHistoryLeavesDefaults) {
  const auto rates = EvolutionaryComposer::update_adaptive_rates({}, 0.8, 0.7);
  EXPECT_DOUBLE_EQ(rates.first, 0.8);
  EXPECT_DOUBLE_EQ(rates.second, 0.7);
}

TEST(AdaptiveRates, ZeroSuccessDecreasesTowardFloor) {
  std::vector<EvolutionaryComposer::OperatorOutcome> history(
      10, {false, true, false});
  double rate = 0.7;
  for (int i = 0; i < 200; ++i)
    rate = EvolutionaryComposer::update_adaptive_rates(history, 0.5, rate)
               .second;
  EXPECT_DOUBLE_EQ(rate, 0.05);
}

TEST(AdaptiveRates, AlwaysClampedUnderRandomHistories) {
  Rng rng(79);
  for (int round = 0; round < 200; ++round) {
    std::vector<EvolutionaryComposer::OperatorOutcome> history;
    const int n = 1 + static_cast<int>(rng.next_index(30));
    for (int i = 0; i < n; ++i)
      history.push_back({rng.next_bool(), rng.next_bool(), rng.next_bool()});
    const double cx = rng.next_uniform(0.0, 1.2);
    const double mu = rng.next_uniform(0.0, 1.2);
    const auto [a, b] =
        EvolutionaryComposer::update_adaptive_rates(history, cx, mu);
    EXPECT_GE(a, 0.05);
    EXPECT_LE(a, 0.95);
    EXPECT_GE(b, 0.05);
    EXPECT_LE(b, 0.95);
  }
}

// -- search quality vs the exhaustive oracle ---------------------------------

TEST(Compose, ReachesEnumerationOptimumOnRegression) {
  const std::vector<std::string> ops{"standard_scaling", "ridge", "knn",
                                     "decision_tree"};
  const auto reg = registry_subset(ops);
  const auto data = fixtures::elusage_like();

  int good = 0;
  const int runs = 10;
  for (int run = 0; run < runs; ++run) {
    const std::uint64_t seed = 100 + run;
    ComposerConfig cfg;
    cfg.pop_size = 20;
    cfg.offspring_size = 20;
    cfg.max_generations = 30;
    cfg.objectives = {ObjectiveSpec::quality(Metric::MAE)};
    cfg.seed = seed;
    cfg.max_depth = 3;
    cfg.max_nodes = 3;

    // Oracle: evaluate every candidate on the same folds the search uses.
    EvolutionaryComposer oracle_eval(cfg, data, reg);
    double oracle_best = 0;
    for (const auto& p : testing::enumerate_pipelines_up_to_3(
             ops, reg, TaskType::regression)) {
      oracle_best = std::max(oracle_best, oracle_eval.objective_vector(p)[0]);
    }
    ASSERT_GT(oracle_best, 0.0);

    const auto result = compose(cfg, data, reg);
    ASSERT_FALSE(result.front.members.empty());
    const double found = result.front.members[0].fitness[0];
    if (found >= 0.99 * oracle_best) ++good;
  }
  EXPECT_GE(good, 9) << good << "/" << runs
                     << " runs reached 99% of the enumeration optimum";
}

}  // namespace
}  // namespace pipeforge
