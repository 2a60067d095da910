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

#ifndef PIPEFORGE_TUNER_HPP_
#define PIPEFORGE_TUNER_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pipeforge/execution.hpp"
#include "pipeforge/pipeline.hpp"

namespace pipeforge {

enum class TuningStrategy { serial_isolated, sequential, simultaneous };

inline std::string tuning_strategy_to_string(TuningStrategy s) {
  switch (s) {
    case TuningStrategy::serial_isolated: return "serial_isolated";
    case TuningStrategy::sequential: return "sequential";
    case TuningStrategy::simultaneous: return "simultaneous";
  }
  return "?";
}

inline std::optional<TuningStrategy> tuning_strategy_from_string(
    const std::string& s) {
  if (s == "serial_isolated") return TuningStrategy::serial_isolated;
  if (s == "sequential") return TuningStrategy::sequential;
  if (s == "simultaneous") return TuningStrategy::simultaneous;
  return std::nullopt;
}

struct TuningConfig {
  TuningStrategy strategy = TuningStrategy::simultaneous;
  int iterations = 100;
  Metric metric = Metric::MAE;
  std::uint64_t seed = 0;
  double validation_split = 0.75;  // fit fraction of the tuning data

  void check() const {
    if (iterations < 1) throw Error("tuning iterations must be >= 1");
  }
};

struct TuningReport {
  TuningStrategy strategy = TuningStrategy::simultaneous;
  int iterations = 0;
  bool tunable = true;   // false: no node had a non-empty space
  bool improved = false;
  double metric_before = 0;
  double metric_after = 0;
  double score_before = 0;  // higher-is-better fitness scores
  double score_after = 0;
  /// Full fit+score cycles of the whole pipeline during the search phase
  /// (the before/after verification evaluations are not included).
  std::uint64_t full_pipeline_evaluations = 0;
  std::uint64_t proposals_evaluated = 0;
};

// ---------------------------------------------------------------------------
// Candidate proposal (pluggable sampler contract)

struct TuningTrial {
  ParamMap assignment;
  double score = 0;  // higher is better
};

/// Default sampler: pure function of (space, history, seed). Uniform over
/// each dimension honoring its scale; every 5th call perturbs the incumbent
/// best instead. Any sampler with this signature can stand in.
inline ParamMap propose_candidate(const ParamSpace& space,
                                  const std::vector<TuningTrial>& history,
                                  std::uint64_t seed) {
  std::uint64_t h = mix64(seed, history.size());
  for (const auto& [name, dom] : space) h = mix64(h, fnv1a(name));
  Rng rng(h);

  const bool exploit = !history.empty() && history.size() % 5 == 4;
  if (exploit) {
    const TuningTrial* best = &history[0];
    for (const auto& t : history)
      if (t.score > best->score) best = &t;
    ParamMap out;
    for (const auto& [name, dom] : space) {
      auto it = best->assignment.find(name);
      out[name] = it != best->assignment.end() ? dom.perturb(it->second, rng)
                                               : dom.sample(rng);
    }
    return out;
  }

  ParamMap out;
  for (const auto& [name, dom] : space) out[name] = dom.sample(rng);
  return out;
}

// ---------------------------------------------------------------------------
// Tuner

namespace detail {

/// Signature with hyperparameters stripped: must be invariant under tuning.
inline std::string topology_signature(const Pipeline& p) {
  Pipeline bare = p;
  for (auto& n : bare.nodes) n.hyperparams.clear();
  return canonical_signature(bare);
}

/// Joint space of every node with parameters, dimensions prefixed by node id.
inline ParamSpace joint_space(const Pipeline& p, const Registry& registry) {
  ParamSpace out;
  for (const auto& n : p.nodes) {
    const OperationSpec* spec = registry.find(n.operation_id);
    if (!spec) continue;
    for (const auto& [name, dom] : spec->hyperparam_space)
      out[std::to_string(n.id) + "." + name] = dom;
  }
  return out;
}

inline Pipeline apply_joint_assignment(const Pipeline& p,
                                       const ParamMap& assignment) {
  Pipeline out = p;
  for (const auto& [key, value] : assignment) {
    const auto dot = key.find('.');
    const int node_id = std::stoi(key.substr(0, dot));
    out.find_node(node_id)->hyperparams[key.substr(dot + 1)] = value;
  }
  return out;
}

/// Metric value from single-column model/probe outputs, handling the
/// label/score duality of classification metrics.
inline double column_metric_score(Metric metric,
                                  const std::vector<double>& outputs,
                                  const std::vector<double>& truth) {
  std::vector<double> predictions = outputs;
  if (metric == Metric::F1)
    for (double& v : predictions) v = v >= 0.5 ? 1.0 : 0.0;
  const auto mv = evaluate_metric(metric, predictions, truth);
  if (!std::isfinite(mv.value)) throw Error("non-finite metric");
  return to_fitness_score(mv);
}

/// Local quality of one node given its captured training input and a
/// candidate parameter assignment. Model nodes score their own held-out
/// predictions; data nodes are scored through a ridge probe on their
/// output; series nodes get a fixed lag-5 ridge probe.
inline double local_node_score(const OperationSpec& spec, const Node& node,
                               const ParamMap& params,
                               const PipelineData& input, Metric metric,
                               const ExecContext& ctx, std::uint64_t seed) {
  Node trial = node;
  trial.hyperparams = params;

  const bool series_in = input.features.cols() == 0 && !input.target.empty();
  OpFitContext op_ctx{ctx.task, ctx.num_classes, ctx.horizon};

  if (series_in && spec.tags.count("emits_series")) {
    // Smooth-type node: probe forecastability of its output series.
    FittedOperation op = op_fit(spec, params, input.features, input.target,
                                op_ctx, seed);
    const auto* sm = std::get_if<SmoothingState>(&op.state);
    const std::vector<double> series =
        sm ? apply_smoothing(*sm, input.target) : input.target;
    LaggedState probe_lag{5, std::max(1, ctx.horizon)};
    auto rows = lagged_training_rows(probe_lag, series);
    const std::size_t split_at = rows.features.rows() * 3 / 4;
    if (split_at < 2 || rows.features.rows() - split_at < 1)
      throw DataShapeError("series too short for a local probe");
    std::vector<std::size_t> head(split_at), tail;
    std::iota(head.begin(), head.end(), std::size_t{0});
    for (std::size_t i = split_at; i < rows.features.rows(); ++i)
      tail.push_back(i);
    auto probe = fit_linear(rows.features.take_rows(head),
                            {rows.targets.begin(), rows.targets.begin() + split_at},
                            1.0);
    auto outputs = predict_linear(probe, rows.features.take_rows(tail));
    return column_metric_score(metric, outputs,
                               {rows.targets.begin() + split_at,
                                rows.targets.end()});
  }

  if (series_in) {
    // Lagged node: build pairs with the candidate window, then split
    // chronologically and probe with ridge.
    FittedOperation op = op_fit(spec, params, input.features, input.target,
                                op_ctx, seed);
    const auto& lag = std::get<LaggedState>(op.state);
    auto rows = lagged_training_rows(lag, input.target);
    const std::size_t split_at = rows.features.rows() * 3 / 4;
    if (split_at < 2 || rows.features.rows() - split_at < 1)
      throw DataShapeError("series too short for a local probe");
    std::vector<std::size_t> head(split_at), tail;
    std::iota(head.begin(), head.end(), std::size_t{0});
    for (std::size_t i = split_at; i < rows.features.rows(); ++i)
      tail.push_back(i);
    auto probe = fit_linear(rows.features.take_rows(head),
                            {rows.targets.begin(), rows.targets.begin() + split_at},
                            1.0);
    auto outputs = predict_linear(probe, rows.features.take_rows(tail));
    return column_metric_score(metric, outputs,
                               {rows.targets.begin() + split_at,
                                rows.targets.end()});
  }

  // Row-wise local split of the node's own input.
  const Matrix& fit_x = input.features;
  const std::vector<double>& fit_y = input.target;
  const std::size_t n = fit_x.rows();
  const std::size_t split_at = n * 3 / 4;
  if (split_at < 2 || n - split_at < 1)
    throw DataShapeError("too few rows for a local probe");
  Rng rng(mix64(seed, 0x6c6f63616cULL));  // "local"
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (ctx.task != TaskType::ts_forecasting) rng.shuffle(idx);
  std::vector<std::size_t> head(idx.begin(), idx.begin() + split_at);
  std::vector<std::size_t> tail(idx.begin() + split_at, idx.end());
  std::sort(head.begin(), head.end());
  std::sort(tail.begin(), tail.end());

  Matrix local_fit = fit_x.take_rows(head);
  Matrix local_val = fit_x.take_rows(tail);
  std::vector<double> y_fit, y_val;
  for (auto i : head) y_fit.push_back(fit_y[i]);
  for (auto i : tail) y_val.push_back(fit_y[i]);

  FittedOperation op = op_fit(spec, params, local_fit, y_fit, op_ctx, seed);
  if (spec.kind == OperationKind::model) {
    Matrix out = op_predict(op, local_val);
    const std::vector<double> outputs =
        ctx.task == TaskType::classification && out.cols() >= 2
            ? out.column(1)
            : out.column(0);
    if (ctx.task == TaskType::classification && metric == Metric::F1) {
      // Label by argmax across the probability columns.
      std::vector<double> labels(out.rows());
      for (std::size_t r = 0; r < out.rows(); ++r) {
        std::size_t arg = 0;
        for (std::size_t c = 1; c < out.cols(); ++c)
          if (out.at(r, c) > out.at(r, arg)) arg = c;
        labels[r] = static_cast<double>(arg);
      }
      const auto mv = evaluate_metric(metric, labels, y_val);
      return to_fitness_score(mv);
    }
    return column_metric_score(metric, outputs, y_val);
  }

  // Data operation: ridge probe on the transformed output.
  Matrix t_fit = op_predict(op, local_fit);
  Matrix t_val = op_predict(op, local_val);
  auto probe = fit_linear(t_fit, y_fit, 1.0);
  auto outputs = predict_linear(probe, t_val);
  return column_metric_score(metric, outputs, y_val);
}

}  // namespace detail

/// Hyperparameter tuning of a fixed topology. Strategies differ in where
/// the error is measured: serial_isolated at each node's own subtree,
/// sequential and simultaneous on the whole pipeline. All are never-worse:
/// the incumbent best (including the input) is returned.
inline std::pair<Pipeline, TuningReport> tune(const Pipeline& pipeline,
                                              const Dataset& data,
                                              const TuningConfig& config,
                                              const Registry& registry) {
  config.check();
  TuningReport report;
  report.strategy = config.strategy;
  report.iterations = config.iterations;

  auto [fit_fold, score_fold] =
      make_scoring_folds(data, config.validation_split, config.seed);
  const std::uint64_t eval_seed = mix64(config.seed, 0x74756e65ULL);  // "tune"

  auto full_score = [&](const Pipeline& p) -> double {
    const auto mv =
        fit_and_score(p, fit_fold, score_fold, config.metric, eval_seed,
                      registry);
    if (!std::isfinite(mv.value)) throw Error("non-finite metric");
    return to_fitness_score(mv);
  };

  const auto before = fit_and_score(pipeline, fit_fold, score_fold,
                                    config.metric, eval_seed, registry);
  report.metric_before = before.value;
  report.score_before = to_fitness_score(before);

  Pipeline best = pipeline;
  double best_score = report.score_before;

  const ParamSpace joint = detail::joint_space(pipeline, registry);
  if (joint.empty()) {
    report.tunable = false;
    report.metric_after = report.metric_before;
    report.score_after = report.score_before;
    return {pipeline, report};
  }

  auto try_candidate = [&](Pipeline candidate) {
    ++report.proposals_evaluated;
    ++report.full_pipeline_evaluations;
    double score;
    try {
      score = full_score(candidate);
    } catch (const Error&) {
      return std::numeric_limits<double>::lowest();
    }
    if (score > best_score) {
      best_score = score;
      best = std::move(candidate);
    }
    return score;
  };

  if (config.strategy == TuningStrategy::simultaneous) {
    std::vector<TuningTrial> history;
    history.push_back({{}, best_score});  // incumbent defaults
    for (int it = 0; it < config.iterations; ++it) {
      ParamMap assignment =
          propose_candidate(joint, history, mix64(config.seed, it));
      const double score =
          try_candidate(detail::apply_joint_assignment(pipeline, assignment));
      history.push_back({std::move(assignment), score});
    }
  } else if (config.strategy == TuningStrategy::sequential) {
    Pipeline incumbent = pipeline;
    double incumbent_score = best_score;
    for (int id : canonical_order(pipeline)) {
      const OperationSpec& spec =
          registry.at(pipeline.find_node(id)->operation_id);
      if (spec.hyperparam_space.empty()) continue;
      std::vector<TuningTrial> history;
      for (int it = 0; it < config.iterations; ++it) {
        ParamMap params = propose_candidate(
            spec.hyperparam_space, history,
            mix64(config.seed, mix64(static_cast<std::uint64_t>(id), it)));
        Pipeline candidate = with_hyperparams(incumbent, id, params);
        const double score = try_candidate(candidate);
        if (score > incumbent_score) {
          incumbent_score = score;
          incumbent = std::move(candidate);
        }
        history.push_back({std::move(params), score});
      }
    }
  } else {  // serial_isolated
    const ExecContext ctx = make_context(fit_fold);
    std::map<int, PipelineData> captured;
    fit_capturing_inputs(pipeline, fit_fold, eval_seed, registry, &captured);

    Pipeline assembled = pipeline;
    for (int id : canonical_order(pipeline)) {
      const Node* node = pipeline.find_node(id);
      const OperationSpec& spec = registry.at(node->operation_id);
      if (spec.hyperparam_space.empty()) continue;
      const PipelineData& input = captured.at(id);

      double best_local = std::numeric_limits<double>::lowest();
      ParamMap best_params = node->hyperparams;
      try {
        best_local = detail::local_node_score(
            spec, *node, spec.effective_params(node->hyperparams), input,
            config.metric, ctx, eval_seed);
      } catch (const Error&) {
      }

      std::vector<TuningTrial> history;
      for (int it = 0; it < config.iterations; ++it) {
        ParamMap params = propose_candidate(
            spec.hyperparam_space, history,
            mix64(config.seed, mix64(static_cast<std::uint64_t>(id), it)));
        ++report.proposals_evaluated;
        double score = std::numeric_limits<double>::lowest();
        try {
          score = detail::local_node_score(spec, *node, params, input,
                                           config.metric, ctx, eval_seed);
        } catch (const Error&) {
        }
        if (score > best_local) {
          best_local = score;
          best_params = params;
        }
        history.push_back({std::move(params), score});
      }
      assembled = with_hyperparams(assembled, id, best_params);
    }
    // One final whole-pipeline verification (not a search evaluation).
    try {
      const double score = full_score(assembled);
      if (score > best_score) {
        best_score = score;
        best = std::move(assembled);
      }
    } catch (const Error&) {
    }
  }

  const auto after = fit_and_score(best, fit_fold, score_fold, config.metric,
                                   eval_seed, registry);
  report.metric_after = after.value;
  report.score_after = to_fitness_score(after);
  report.improved = report.score_after > report.score_before;
  return {best, report};
}

}  // namespace pipeforge

#endif  // PIPEFORGE_TUNER_HPP_
