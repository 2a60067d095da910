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

#ifndef PIPEFORGE_EXECUTION_HPP_
#define PIPEFORGE_EXECUTION_HPP_

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "pipeforge/dataset.hpp"
#include "pipeforge/fitted_operation.hpp"
#include "pipeforge/metrics.hpp"
#include "pipeforge/pipeline.hpp"

namespace pipeforge {

/// Data flowing along pipeline edges. row_ids track the original row a
/// value belongs to (series position for ts), which lets merges align
/// parents that dropped or re-anchored rows. Always strictly increasing.
struct PipelineData {
  Matrix features;
  std::vector<double> target;  // training target / raw series
  std::vector<std::size_t> row_ids;
  bool training = true;
};

inline PipelineData to_pipeline_data(const Dataset& ds, bool training) {
  PipelineData out;
  out.training = training;
  out.target = ds.target;
  out.features = ds.features;
  out.row_ids.resize(ds.rows());
  for (std::size_t i = 0; i < out.row_ids.size(); ++i) out.row_ids[i] = i;
  return out;
}

struct PredictionTable {
  std::vector<std::size_t> row_ids;
  std::vector<double> values;  // predictions; class labels for classification
  Matrix probabilities;        // classification only: rows x num_classes
  int num_classes = 0;

  /// Scores of class 1 for binary ROC AUC.
  std::vector<double> class1_scores() const {
    if (num_classes < 2 || probabilities.cols() < 2)
      throw DegenerateClassError("no class probabilities available");
    return probabilities.column(1);
  }
};

// ---------------------------------------------------------------------------
// Atomized pipelines-as-operations

class FittedPipeline;

/// A pipeline frozen into a single reusable operation. `structure` is the
/// template refit when the atomized node fits inside a new pipeline;
/// `fitted` carries the state at atomization time so prediction equivalence
/// holds before any refit.
struct AtomizedModel {
  Pipeline structure;
  std::shared_ptr<const FittedPipeline> fitted;
};

struct AtomizedFittedState {
  std::shared_ptr<const FittedPipeline> inner;
};

// ---------------------------------------------------------------------------
// Fitted pipeline

struct ExecContext {
  TaskType task = TaskType::regression;
  int num_classes = 0;
  int horizon = 0;
};

/// Structure plus per-node learned state. Immutable after fit; concurrent
/// prediction is safe.
class FittedPipeline {
 public:
  Pipeline structure;
  std::map<int, FittedOperation> states;  // keyed by node id
  ExecContext context;
  std::size_t raw_feature_width = 0;

  const FittedOperation& state_of(int node_id) const {
    auto it = states.find(node_id);
    if (it == states.end())
      throw SchemaMismatchError("no fitted state for node " +
                                std::to_string(node_id));
    return it->second;
  }
};

namespace detail {

inline std::vector<std::size_t> intersect_sorted(
    const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  std::vector<std::size_t> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(out));
  return out;
}

/// Restricts data to the given row ids (which must be a subset of its own).
inline PipelineData restrict_rows(const PipelineData& data,
                                  const std::vector<std::size_t>& ids) {
  if (ids.size() == data.row_ids.size()) return data;
  PipelineData out;
  out.training = data.training;
  out.row_ids = ids;
  std::vector<std::size_t> positions;
  positions.reserve(ids.size());
  std::size_t cursor = 0;
  for (std::size_t id : ids) {
    while (cursor < data.row_ids.size() && data.row_ids[cursor] < id) ++cursor;
    if (cursor == data.row_ids.size() || data.row_ids[cursor] != id)
      throw DataShapeError("row id " + std::to_string(id) + " missing");
    positions.push_back(cursor);
  }
  out.features = data.features.take_rows(positions);
  if (!data.target.empty()) {
    out.target.resize(positions.size());
    for (std::size_t i = 0; i < positions.size(); ++i)
      out.target[i] = data.target[positions[i]];
  }
  return out;
}

/// Merges parent outputs for a secondary node: intersect row ids, then
/// concatenate parent feature blocks in parent_ids order; raw features are
/// appended for `direct` always and for `adaptive` when the node's
/// enrichment flag is on. The target comes from the first parent.
inline PipelineData gather_secondary_input(
    const Node& node, const PipelineData& raw,
    const std::map<int, PipelineData>& outputs) {
  std::vector<const PipelineData*> parents;
  parents.reserve(node.parent_ids.size());
  for (int pid : node.parent_ids) parents.push_back(&outputs.at(pid));

  std::vector<std::size_t> common = parents[0]->row_ids;
  for (std::size_t i = 1; i < parents.size(); ++i)
    common = intersect_sorted(common, parents[i]->row_ids);
  if (common.empty())
    throw DataShapeError("parents of node " + std::to_string(node.id) +
                         " share no rows");

  PipelineData first = restrict_rows(*parents[0], common);
  PipelineData out;
  out.training = raw.training;
  out.row_ids = common;
  out.target = std::move(first.target);
  out.features = std::move(first.features);
  for (std::size_t i = 1; i < parents.size(); ++i) {
    PipelineData part = restrict_rows(*parents[i], common);
    out.features = Matrix::concat_cols(out.features, part.features);
  }

  const bool enrich =
      node.merge_policy == MergePolicy::direct ||
      (node.merge_policy == MergePolicy::adaptive && node.data_enrichment);
  if (enrich && raw.features.cols() > 0) {
    PipelineData raw_part = restrict_rows(raw, common);
    out.features = Matrix::concat_cols(out.features, raw_part.features);
  }
  return out;
}

inline PipelineData gather_input(const Node& node, const PipelineData& raw,
                                 const std::map<int, PipelineData>& outputs) {
  if (node.parent_ids.empty()) return raw;
  return gather_secondary_input(node, raw, outputs);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Node-level fit/apply in PipelineData space

namespace detail {

std::pair<FittedPipeline, PipelineData> fit_pipeline_on_data(
    const Pipeline& pipeline, const PipelineData& raw, const ExecContext& ctx,
    std::uint64_t seed, const Registry& registry);

PipelineData run_fitted_on_data(const FittedPipeline& fitted,
                                const PipelineData& raw,
                                const ExecContext& ctx);

/// Prediction-mode application of one fitted node to its gathered input.
inline PipelineData apply_fitted_node(const FittedOperation& op,
                                      const PipelineData& input,
                                      const ExecContext& ctx) {
  PipelineData out;
  out.training = input.training;

  if (const auto* lag = std::get_if<LaggedState>(&op.state)) {
    const std::int64_t horizon = ctx.horizon > 0 ? ctx.horizon : lag->gap;
    auto rows = lagged_forecast_rows(*lag, input.target, horizon);
    out.features = std::move(rows.features);
    out.row_ids = std::move(rows.row_ids);
    return out;
  }
  if (const auto* sm = std::get_if<SmoothingState>(&op.state)) {
    out = input;
    out.target = apply_smoothing(*sm, input.target);
    return out;
  }
  if (const auto* at =
          std::get_if<std::shared_ptr<const AtomizedFittedState>>(&op.state)) {
    out = input;
    PipelineData inner_out = run_fitted_on_data(*(*at)->inner, input, ctx);
    out.features = std::move(inner_out.features);
    out.row_ids = std::move(inner_out.row_ids);
    if (out.row_ids != input.row_ids && !out.target.empty()) {
      // Inner pipeline re-anchored rows (e.g. contains a lagged transform).
      PipelineData aligned = restrict_rows(input, out.row_ids);
      out.target = std::move(aligned.target);
    }
    return out;
  }

  out = input;
  out.features = op_predict(op, input.features);
  return out;
}

/// Training-mode application: filters drop rows, lagged transforms emit
/// in-sample window/target pairs, models emit in-sample predictions.
/// (Atomized nodes never reach here; their refit captures the training
/// output directly.)
inline PipelineData apply_training_node(const FittedOperation& op,
                                        const PipelineData& input,
                                        const ExecContext& ctx) {
  if (const auto* filt = std::get_if<OutlierFilterState>(&op.state)) {
    const auto keep = outlier_filter_keep(*filt, input.features);
    std::vector<std::size_t> ids(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) ids[i] = input.row_ids[keep[i]];
    return restrict_rows(input, ids);
  }
  if (const auto* lag = std::get_if<LaggedState>(&op.state)) {
    auto rows = lagged_training_rows(*lag, input.target);
    PipelineData out;
    out.training = true;
    out.features = std::move(rows.features);
    out.target = std::move(rows.targets);
    // Window rows anchor at the target's series position; keep the offset
    // of the incoming slice so nested restrictions stay consistent.
    out.row_ids.resize(rows.row_ids.size());
    const std::size_t base = input.row_ids.empty() ? 0 : input.row_ids[0];
    for (std::size_t i = 0; i < rows.row_ids.size(); ++i)
      out.row_ids[i] = base + rows.row_ids[i];
    return out;
  }
  return apply_fitted_node(op, input, ctx);
}

inline std::pair<FittedOperation, PipelineData> fit_node(
    const OperationSpec& spec, const Node& node, const PipelineData& input,
    const ExecContext& ctx, std::uint64_t node_seed, const Registry& registry) {
  if (spec.is_atomized()) {
    auto payload = registry.atomized_payload(spec.operation_id);
    if (!payload)
      throw UnknownOperationError(spec.operation_id + " (missing payload)");
    auto [inner, training_out] = fit_pipeline_on_data(
        payload->structure, input, ctx, node_seed, registry);
    FittedOperation op;
    op.operation_id = spec.operation_id;
    op.input_width = input.features.cols();
    op.output_width = training_out.features.cols();
    op.state = std::make_shared<const AtomizedFittedState>(AtomizedFittedState{
        std::make_shared<const FittedPipeline>(std::move(inner))});
    return {std::move(op), std::move(training_out)};
  }

  OpFitContext op_ctx{ctx.task, ctx.num_classes, ctx.horizon};
  FittedOperation op =
      op_fit(spec, node.hyperparams, input.features, input.target, op_ctx,
             node_seed);
  PipelineData out = apply_training_node(op, input, ctx);
  return {std::move(op), std::move(out)};
}

inline std::pair<FittedPipeline, PipelineData> fit_pipeline_on_data(
    const Pipeline& pipeline, const PipelineData& raw, const ExecContext& ctx,
    std::uint64_t seed, const Registry& registry) {
  FittedPipeline fitted;
  fitted.structure = pipeline;
  fitted.context = ctx;
  fitted.raw_feature_width = raw.features.cols();

  const auto order = canonical_order(pipeline);
  std::map<int, std::size_t> canon_index;
  for (std::size_t i = 0; i < order.size(); ++i) canon_index[order[i]] = i;

  std::map<int, PipelineData> outputs;
  PipelineData final_output;
  for (int id : order) {
    const Node* node = pipeline.find_node(id);
    const OperationSpec& spec = registry.at(node->operation_id);
    try {
      PipelineData input = detail::gather_input(*node, raw, outputs);
      auto [op, out] = fit_node(spec, *node, input, ctx,
                                mix64(seed, canon_index[id]), registry);
      fitted.states.emplace(id, std::move(op));
      if (id == pipeline.final_node_id) final_output = out;
      outputs.emplace(id, std::move(out));
    } catch (const OperationFitError&) {
      throw;
    } catch (const Error& e) {
      throw OperationFitError(id, e.what());
    }
  }
  return {std::move(fitted), std::move(final_output)};
}

inline PipelineData run_fitted_on_data(const FittedPipeline& fitted,
                                       const PipelineData& raw,
                                       const ExecContext& ctx) {
  const auto order = canonical_order(fitted.structure);
  std::map<int, PipelineData> outputs;
  PipelineData final_output;
  for (int id : order) {
    const Node* node = fitted.structure.find_node(id);
    PipelineData input = detail::gather_input(*node, raw, outputs);
    PipelineData out = apply_fitted_node(fitted.state_of(id), input, ctx);
    if (id == fitted.structure.final_node_id) final_output = out;
    outputs.emplace(id, std::move(out));
  }
  return final_output;
}

inline PredictionTable to_prediction_table(const PipelineData& data,
                                           const ExecContext& ctx) {
  PredictionTable out;
  out.row_ids = data.row_ids;
  if (ctx.task == TaskType::classification) {
    out.num_classes = static_cast<int>(data.features.cols());
    out.probabilities = data.features;
    out.values.resize(data.features.rows());
    for (std::size_t r = 0; r < data.features.rows(); ++r) {
      std::size_t arg = 0;
      for (std::size_t c = 1; c < data.features.cols(); ++c)
        if (data.features.at(r, c) > data.features.at(r, arg)) arg = c;
      out.values[r] = static_cast<double>(arg);
    }
  } else {
    out.values = data.features.column(0);
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Public fit / predict

inline ExecContext make_context(const Dataset& ds) {
  ExecContext ctx;
  ctx.task = ds.task;
  ctx.horizon = ds.forecast_horizon;
  if (ds.task == TaskType::classification) {
    int k = ds.num_classes;
    if (k == 0)
      for (double v : ds.target) k = std::max(k, static_cast<int>(v) + 1);
    ctx.num_classes = std::max(k, 2);
  }
  return ctx;
}

/// Fits every node in a topological order. Deterministic given (pipeline,
/// data, seed): per-node seeds derive from the canonical node order, so any
/// relabeling of ids fits identically.
inline FittedPipeline fit(const Pipeline& pipeline, const Dataset& data,
                          std::uint64_t seed, const Registry& registry) {
  data.check_consistent();
  auto result = validate(pipeline, StructureClass::composite,
                         std::numeric_limits<int>::max(), registry, data.task,
                         std::numeric_limits<int>::max());
  if (!result.ok) throw PipelineValidationError(result.rule);
  const ExecContext ctx = make_context(data);
  auto raw = to_pipeline_data(data, /*training=*/true);
  return detail::fit_pipeline_on_data(pipeline, raw, ctx, seed, registry).first;
}

/// Predictions for new data. For ts_forecasting `data` is the prehistory
/// series and the table holds `forecast_horizon` rows; otherwise output rows
/// equal input rows.
inline PredictionTable predict(const FittedPipeline& fitted,
                               const Dataset& data) {
  if (fitted.context.task != TaskType::ts_forecasting &&
      data.features.cols() != fitted.raw_feature_width)
    throw SchemaMismatchError(
        "pipeline was fitted on " + std::to_string(fitted.raw_feature_width) +
        " features, got " + std::to_string(data.features.cols()));
  auto raw = to_pipeline_data(data, /*training=*/false);
  ExecContext ctx = fitted.context;
  if (data.task == TaskType::ts_forecasting && data.forecast_horizon > 0)
    ctx.horizon = data.forecast_horizon;
  PipelineData out = detail::run_fitted_on_data(fitted, raw, ctx);
  return detail::to_prediction_table(out, ctx);
}

// ---------------------------------------------------------------------------
// Scoring helpers shared by the composer, tuner, sensitivity and benchmarks

/// Metric of a fitted pipeline on held-out data. For ts the score fold's
/// values are forecast from the fit fold acting as prehistory.
inline MetricValue score_fitted(const FittedPipeline& fitted,
                                const Dataset& fit_data,
                                const Dataset& score_data, Metric metric) {
  if (fit_data.task == TaskType::ts_forecasting) {
    Dataset prehistory = fit_data;
    prehistory.forecast_horizon = static_cast<int>(score_data.target.size());
    const auto table = predict(fitted, prehistory);
    return evaluate_metric(metric, table.values, score_data.target);
  }
  const auto table = predict(fitted, score_data);
  const auto& predictions =
      metric == Metric::ROC_AUC ? table.class1_scores() : table.values;
  return evaluate_metric(metric, predictions, score_data.target);
}

inline MetricValue fit_and_score(const Pipeline& pipeline,
                                 const Dataset& fit_data,
                                 const Dataset& score_data, Metric metric,
                                 std::uint64_t seed, const Registry& registry) {
  const auto fitted = fit(pipeline, fit_data, seed, registry);
  return score_fitted(fitted, fit_data, score_data, metric);
}

/// Fit/score folds for internal evaluation. Classification retries the
/// shuffle until both folds carry at least two classes.
inline std::pair<Dataset, Dataset> make_scoring_folds(const Dataset& data,
                                                      double fit_fraction,
                                                      std::uint64_t seed) {
  for (int attempt = 0; attempt < 16; ++attempt) {
    auto folds = split(data, fit_fraction, mix64(seed, attempt));
    if (data.task == TaskType::classification) {
      auto distinct = [](const std::vector<double>& v) {
        std::set<double> s(v.begin(), v.end());
        return s.size();
      };
      if (distinct(folds.first.target) < 2 || distinct(folds.second.target) < 2)
        continue;
    }
    return folds;
  }
  throw TooFewRowsError(
      "could not build class-covering fit/score folds from the data");
}

/// Fit that also captures the merged input each node saw while training.
/// The tuner's serial-isolated strategy optimizes against these captures.
inline FittedPipeline fit_capturing_inputs(
    const Pipeline& pipeline, const Dataset& data, std::uint64_t seed,
    const Registry& registry, std::map<int, PipelineData>* captured) {
  data.check_consistent();
  const ExecContext ctx = make_context(data);
  const auto raw = to_pipeline_data(data, /*training=*/true);

  FittedPipeline fitted;
  fitted.structure = pipeline;
  fitted.context = ctx;
  fitted.raw_feature_width = raw.features.cols();

  const auto order = canonical_order(pipeline);
  std::map<int, std::size_t> canon_index;
  for (std::size_t i = 0; i < order.size(); ++i) canon_index[order[i]] = i;

  std::map<int, PipelineData> outputs;
  for (int id : order) {
    const Node* node = pipeline.find_node(id);
    const OperationSpec& spec = registry.at(node->operation_id);
    try {
      PipelineData input = detail::gather_input(*node, raw, outputs);
      if (captured) (*captured)[id] = input;
      auto [op, out] = detail::fit_node(spec, *node, input, ctx,
                                        mix64(seed, canon_index[id]), registry);
      fitted.states.emplace(id, std::move(op));
      outputs.emplace(id, std::move(out));
    } catch (const OperationFitError&) {
      throw;
    } catch (const Error& e) {
      throw OperationFitError(id, e.what());
    }
  }
  return fitted;
}

}  // namespace pipeforge

#endif  // PIPEFORGE_EXECUTION_HPP_
