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

#ifndef PIPEFORGE_FITTED_OPERATION_HPP_
#define PIPEFORGE_FITTED_OPERATION_HPP_

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "pipeforge/models.hpp"
#include "pipeforge/operations.hpp"
#include "pipeforge/transforms.hpp"

namespace pipeforge {

struct MergePassState {};  // merge_concat: gathering already did the work

// Fitted inner pipeline of an atomized node; defined in execution.hpp.
struct AtomizedFittedState;

using OperationState =
    std::variant<LinearModelState, LogisticState, TreeState, KnnState,
                 NaiveBayesState, StandardScalerState, MinMaxScalerState,
                 ImputationState, OutlierFilterState, PcaState, LaggedState,
                 SmoothingState, MergePassState,
                 std::shared_ptr<const AtomizedFittedState>>;

/// Learned state of one node; immutable once fitted, safe to share across
/// threads for prediction.
struct FittedOperation {
  std::string operation_id;
  std::size_t input_width = 0;
  std::size_t output_width = 0;
  OperationState state;
};

/// Task facts an operation may need beyond its own hyperparameters.
struct OpFitContext {
  TaskType task = TaskType::regression;
  int num_classes = 0;
  int horizon = 0;  // ts forecast length
};

/// Fits one matrix-in operation (models and column transforms). Series and
/// flow operations (lagged_transform, moving_average_smoothing,
/// merge_concat, atomized entries) are driven by the execution engine, which
/// owns the series/row bookkeeping they need.
inline FittedOperation op_fit(const OperationSpec& spec, const ParamMap& custom,
                              const Matrix& features,
                              const std::vector<double>& target,
                              const OpFitContext& ctx, std::uint64_t seed) {
  spec.check_params(custom);
  const ParamMap params = spec.effective_params(custom);
  const std::string& id = spec.operation_id;
  const bool classify = ctx.task == TaskType::classification;

  FittedOperation out;
  out.operation_id = id;
  out.input_width = features.cols();
  out.output_width = features.cols();

  if (id == "ols") {
    out.state = fit_linear(features, target, 0.0);
    out.output_width = 1;
  } else if (id == "ridge") {
    out.state = fit_linear(features, target, param_as_double(params, "lambda", 1.0));
    out.output_width = 1;
  } else if (id == "logistic_regression") {
    out.state = fit_logistic(features, target, ctx.num_classes,
                             param_as_double(params, "l2", 1e-4));
    out.output_width = std::get<LogisticState>(out.state).num_classes;
  } else if (id == "decision_tree") {
    out.state = fit_tree(features, target, classify ? ctx.num_classes : 0,
                         param_as_int(params, "max_depth", 3),
                         param_as_int(params, "min_samples_split", 2));
    out.output_width = classify ? ctx.num_classes : 1;
  } else if (id == "knn") {
    out.state = fit_knn(features, target, classify ? ctx.num_classes : 0,
                        param_as_int(params, "k", 5));
    out.output_width = classify ? std::max(ctx.num_classes, 1) : 1;
  } else if (id == "naive_bayes_gaussian") {
    out.state = fit_naive_bayes(features, target, ctx.num_classes,
                                param_as_double(params, "var_smoothing", 1e-9));
    out.output_width = std::get<NaiveBayesState>(out.state).num_classes;
  } else if (id == "standard_scaling") {
    out.state = fit_standard_scaler(features);
  } else if (id == "minmax_scaling") {
    out.state = fit_minmax_scaler(features);
  } else if (id == "mean_imputation") {
    out.state = fit_mean_imputation(features);
  } else if (id == "zscore_outlier_filter") {
    out.state = fit_outlier_filter(features,
                                   param_as_double(params, "threshold", 3.0));
  } else if (id == "pca_topk") {
    out.state = fit_pca(features, param_as_int(params, "k", 2), seed);
    out.output_width = std::get<PcaState>(out.state).n_components;
  } else if (id == "lagged_transform") {
    LaggedState st;
    st.window = param_as_int(params, "window", 10);
    st.gap = ctx.horizon > 0 ? ctx.horizon : 1;
    if (target.size() < static_cast<std::size_t>(st.window + st.gap))
      throw DataShapeError("series too short for lagged window");
    out.state = st;
    out.input_width = 0;
    out.output_width = static_cast<std::size_t>(st.window);
  } else if (id == "moving_average_smoothing") {
    SmoothingState st;
    st.window = param_as_int(params, "window", 3);
    out.state = st;
    out.input_width = 0;
    out.output_width = 0;
  } else if (id == "merge_concat") {
    out.state = MergePassState{};
  } else {
    throw UnknownOperationError(id);
  }
  return out;
}

namespace detail {

inline void check_width(const FittedOperation& op, const Matrix& x) {
  if (x.cols() != op.input_width)
    throw SchemaMismatchError("operation '" + op.operation_id + "' expects " +
                              std::to_string(op.input_width) +
                              " features, got " + std::to_string(x.cols()));
}

}  // namespace detail

/// Column-level prediction/transform for matrix-in operations. Models yield
/// a prediction column (or clipped class-probability columns); transforms
/// yield a feature matrix; the outlier filter is an identity here because
/// row removal only happens while fitting.
inline Matrix op_predict(const FittedOperation& op, const Matrix& features) {
  detail::check_width(op, features);
  if (const auto* lin = std::get_if<LinearModelState>(&op.state))
    return Matrix::from_column(predict_linear(*lin, features));
  if (const auto* lr = std::get_if<LogisticState>(&op.state))
    return predict_logistic(*lr, features);
  if (const auto* tree = std::get_if<TreeState>(&op.state))
    return tree->num_classes > 0
               ? predict_tree_proba(*tree, features)
               : Matrix::from_column(predict_tree_regression(*tree, features));
  if (const auto* knn = std::get_if<KnnState>(&op.state))
    return knn->num_classes > 0
               ? predict_knn_proba(*knn, features)
               : Matrix::from_column(predict_knn_regression(*knn, features));
  if (const auto* nb = std::get_if<NaiveBayesState>(&op.state))
    return predict_naive_bayes_proba(*nb, features);
  if (const auto* sc = std::get_if<StandardScalerState>(&op.state))
    return apply_standard_scaler(*sc, features);
  if (const auto* mm = std::get_if<MinMaxScalerState>(&op.state))
    return apply_minmax_scaler(*mm, features);
  if (const auto* im = std::get_if<ImputationState>(&op.state))
    return apply_mean_imputation(*im, features);
  if (std::holds_alternative<OutlierFilterState>(op.state)) return features;
  if (const auto* pca = std::get_if<PcaState>(&op.state))
    return apply_pca(*pca, features);
  if (std::holds_alternative<MergePassState>(op.state)) return features;
  throw SchemaMismatchError("operation '" + op.operation_id +
                            "' is not a matrix-level operation");
}

inline bool is_model_state(const FittedOperation& op) {
  return std::holds_alternative<LinearModelState>(op.state) ||
         std::holds_alternative<LogisticState>(op.state) ||
         std::holds_alternative<TreeState>(op.state) ||
         std::holds_alternative<KnnState>(op.state) ||
         std::holds_alternative<NaiveBayesState>(op.state) ||
         std::holds_alternative<std::shared_ptr<const AtomizedFittedState>>(
             op.state);
}

}  // namespace pipeforge

#endif  // PIPEFORGE_FITTED_OPERATION_HPP_
