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

#ifndef PIPEFORGE_OPERATIONS_HPP_
#define PIPEFORGE_OPERATIONS_HPP_

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pipeforge/dataset.hpp"
#include "pipeforge/errors.hpp"
#include "pipeforge/hyperparams.hpp"

namespace pipeforge {

enum class OperationKind { model, data_processing, task_specific_model, data_flow };

inline std::string kind_to_string(OperationKind k) {
  switch (k) {
    case OperationKind::model: return "model";
    case OperationKind::data_processing: return "data_processing";
    case OperationKind::task_specific_model: return "task_specific_model";
    case OperationKind::data_flow: return "data_flow";
  }
  return "?";
}

inline std::optional<OperationKind> kind_from_string(const std::string& s) {
  if (s == "model") return OperationKind::model;
  if (s == "data_processing") return OperationKind::data_processing;
  if (s == "task_specific_model") return OperationKind::task_specific_model;
  if (s == "data_flow") return OperationKind::data_flow;
  return std::nullopt;
}

// Fitted composite pipeline wrapped as a single reusable operation; the
// payload lives behind the registry so specs stay plain data. Defined in
// execution.hpp.
struct AtomizedModel;
using AtomizedModelPtr = std::shared_ptr<const AtomizedModel>;

/// Registry entry describing one building block: identity, tag metadata,
/// task compatibility and the declared hyperparameter space.
struct OperationSpec {
  std::string operation_id;
  std::string display_name;
  OperationKind kind = OperationKind::model;
  std::set<std::string> tags;
  std::set<TaskType> tasks;
  ParamSpace hyperparam_space;
  /// For atomized entries: node count of the wrapped pipeline, charged to
  /// complexity objectives so nesting cannot hide structure.
  int atomized_node_count = 0;

  bool supports(TaskType task) const { return tasks.count(task) > 0; }
  bool is_atomized() const { return atomized_node_count > 0; }

  ParamMap defaults() const {
    ParamMap out;
    for (const auto& [name, dom] : hyperparam_space)
      out[name] = dom.default_value;
    return out;
  }

  /// Explicit params merged over defaults.
  ParamMap effective_params(const ParamMap& custom) const {
    ParamMap out = defaults();
    for (const auto& [k, v] : custom) out[k] = v;
    return out;
  }

  void check_params(const ParamMap& params) const {
    for (const auto& [name, value] : params) {
      auto it = hyperparam_space.find(name);
      if (it == hyperparam_space.end())
        throw InvalidHyperparamError("operation '" + operation_id +
                                     "' has no parameter '" + name + "'");
      if (!it->second.contains(value))
        throw InvalidHyperparamError("value " + hyper_value_to_string(value) +
                                     " outside the declared domain of '" +
                                     operation_id + "." + name + "'");
    }
  }
};

/// Immutable-after-load collection of operation specs, plus payloads for
/// atomized entries. Reads are thread safe once loading is done.
class Registry {
 public:
  void add(OperationSpec spec) {
    for (const auto& [name, dom] : spec.hyperparam_space)
      if (!dom.contains(dom.default_value))
        throw InvalidHyperparamError("default of '" + spec.operation_id + "." +
                                     name + "' lies outside its own domain");
    specs_[spec.operation_id] = std::move(spec);
  }

  const OperationSpec* find(const std::string& id) const {
    auto it = specs_.find(id);
    return it == specs_.end() ? nullptr : &it->second;
  }

  const OperationSpec& at(const std::string& id) const {
    const auto* spec = find(id);
    if (!spec) throw UnknownOperationError(id);
    return *spec;
  }

  std::size_t size() const { return specs_.size(); }

  /// All specs in operation_id order.
  std::vector<OperationSpec> all() const {
    std::vector<OperationSpec> out;
    out.reserve(specs_.size());
    for (const auto& [id, spec] : specs_) out.push_back(spec);
    return out;
  }

  /// Specs matching the task whose tags include all of `tags_include` and
  /// none of `tags_exclude`. Stable operation_id ordering.
  std::vector<OperationSpec> filter(const std::set<std::string>& tags_include,
                                    const std::set<std::string>& tags_exclude,
                                    TaskType task) const {
    std::vector<OperationSpec> out;
    for (const auto& [id, spec] : specs_) {
      if (!spec.supports(task)) continue;
      bool ok = true;
      for (const auto& t : tags_include)
        if (!spec.tags.count(t)) { ok = false; break; }
      if (ok)
        for (const auto& t : tags_exclude)
          if (spec.tags.count(t)) { ok = false; break; }
      if (ok) out.push_back(spec);
    }
    return out;
  }

  void register_atomized(const OperationSpec& spec, AtomizedModelPtr payload) {
    add(spec);
    atomized_[spec.operation_id] = std::move(payload);
  }

  AtomizedModelPtr atomized_payload(const std::string& id) const {
    auto it = atomized_.find(id);
    return it == atomized_.end() ? nullptr : it->second;
  }

 private:
  std::map<std::string, OperationSpec> specs_;
  std::map<std::string, AtomizedModelPtr> atomized_;
};

// ---------------------------------------------------------------------------
// JSON representation ({"operations": [...]}; see docs/registry.schema.json)

inline nlohmann::json domain_to_json(const ParamDomain& dom) {
  nlohmann::json j;
  if (const auto* ir = std::get_if<IntRange>(&dom.domain)) {
    j["type"] = "int";
    j["low"] = ir->low;
    j["high"] = ir->high;
    j["default"] = std::get<std::int64_t>(dom.default_value);
  } else if (const auto* rr = std::get_if<RealRange>(&dom.domain)) {
    j["type"] = "real";
    j["low"] = rr->low;
    j["high"] = rr->high;
    j["scale"] = rr->log_scale ? "log" : "linear";
    j["default"] = std::get<double>(dom.default_value);
  } else {
    const auto& cs = std::get<CategoricalSet>(dom.domain);
    j["type"] = "categorical";
    j["choices"] = cs.choices;
    j["default"] = std::get<std::string>(dom.default_value);
  }
  return j;
}

inline ParamDomain domain_from_json(const nlohmann::json& j,
                                    const std::string& where) {
  ParamDomain dom;
  const std::string type = j.value("type", "");
  if (type == "int") {
    dom.domain = IntRange{j.at("low").get<std::int64_t>(),
                          j.at("high").get<std::int64_t>()};
    dom.default_value = j.at("default").get<std::int64_t>();
  } else if (type == "real") {
    dom.domain = RealRange{j.at("low").get<double>(), j.at("high").get<double>(),
                           j.value("scale", "linear") == "log"};
    dom.default_value = j.at("default").get<double>();
  } else if (type == "categorical") {
    CategoricalSet cs;
    for (const auto& c : j.at("choices")) cs.choices.push_back(c.get<std::string>());
    dom.domain = cs;
    dom.default_value = j.at("default").get<std::string>();
  } else {
    throw SchemaError(where, "unknown domain type '" + type + "'");
  }
  return dom;
}

inline nlohmann::json registry_to_json(const Registry& registry) {
  nlohmann::json ops = nlohmann::json::array();
  for (const auto& spec : registry.all()) {
    if (spec.is_atomized()) continue;  // runtime-only entries
    nlohmann::json j;
    j["operation_id"] = spec.operation_id;
    j["display_name"] = spec.display_name;
    j["kind"] = kind_to_string(spec.kind);
    j["tags"] = spec.tags;
    std::vector<std::string> tasks;
    for (auto t : spec.tasks) tasks.push_back(task_to_string(t));
    j["tasks"] = tasks;
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [name, dom] : spec.hyperparam_space)
      params[name] = domain_to_json(dom);
    j["hyperparams"] = params;
    ops.push_back(j);
  }
  return nlohmann::json{{"operations", ops}};
}

inline Registry registry_from_json(const nlohmann::json& root) {
  Registry registry;
  if (!root.contains("operations") || !root["operations"].is_array())
    throw SchemaError("$", "registry document needs an 'operations' array");
  for (const auto& j : root["operations"]) {
    OperationSpec spec;
    spec.operation_id = j.at("operation_id").get<std::string>();
    spec.display_name = j.value("display_name", spec.operation_id);
    auto kind = kind_from_string(j.at("kind").get<std::string>());
    if (!kind)
      throw SchemaError(spec.operation_id, "unknown kind");
    spec.kind = *kind;
    for (const auto& t : j.value("tags", nlohmann::json::array()))
      spec.tags.insert(t.get<std::string>());
    for (const auto& t : j.at("tasks")) {
      auto task = task_from_string(t.get<std::string>());
      if (!task) throw SchemaError(spec.operation_id, "unknown task");
      spec.tasks.insert(*task);
    }
    if (j.contains("hyperparams"))
      for (const auto& [name, dj] : j["hyperparams"].items())
        spec.hyperparam_space[name] =
            domain_from_json(dj, spec.operation_id + "." + name);
    registry.add(std::move(spec));
  }
  return registry;
}

inline Registry load_registry_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open registry '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path, e.what());
  }
  return registry_from_json(j);
}

// ---------------------------------------------------------------------------
// Built-in default registry

inline ParamDomain int_domain(std::int64_t lo, std::int64_t hi, std::int64_t d) {
  return ParamDomain{IntRange{lo, hi}, d};
}
inline ParamDomain real_domain(double lo, double hi, bool log_scale, double d) {
  return ParamDomain{RealRange{lo, hi, log_scale}, d};
}

/// The operation set the framework ships with. The JSON file under data/
/// mirrors this exactly; PIPEFORGE_REGISTRY can point the CLI at an edited
/// copy without recompiling.
inline Registry default_registry() {
  using TT = TaskType;
  const std::set<TT> tabular = {TT::classification, TT::regression};
  const std::set<TT> regr_like = {TT::regression, TT::ts_forecasting};
  const std::set<TT> all_tasks = {TT::classification, TT::regression,
                                  TT::ts_forecasting};
  Registry r;

  auto add = [&](OperationSpec spec) { r.add(std::move(spec)); };

  add({"ols", "Ordinary Least Squares", OperationKind::model,
       {"simple", "linear", "interpretable"}, regr_like, {}});
  add({"ridge", "Ridge Regression", OperationKind::model,
       {"simple", "linear", "interpretable"}, regr_like,
       {{"lambda", real_domain(1e-4, 1e2, true, 1.0)}}});
  add({"logistic_regression", "Logistic Regression", OperationKind::model,
       {"simple", "linear", "interpretable"}, {TT::classification},
       {{"l2", real_domain(1e-6, 1.0, true, 1e-4)}}});
  add({"decision_tree", "Decision Tree", OperationKind::model,
       {"non-linear", "interpretable", "tree"}, all_tasks,
       {{"max_depth", int_domain(1, 6, 3)},
        {"min_samples_split", int_domain(2, 10, 2)}}});
  add({"knn", "k Nearest Neighbors", OperationKind::model,
       {"simple", "non-linear", "distance"}, all_tasks,
       {{"k", int_domain(1, 15, 5)}}});
  add({"naive_bayes_gaussian", "Gaussian Naive Bayes", OperationKind::model,
       {"simple", "bayesian"}, {TT::classification},
       {{"var_smoothing", real_domain(1e-12, 1e-3, true, 1e-9)}}});

  add({"standard_scaling", "Standard Scaler", OperationKind::data_processing,
       {"preprocessing", "scaling", "linear"}, all_tasks, {}});
  add({"minmax_scaling", "Min-Max Scaler", OperationKind::data_processing,
       {"preprocessing", "scaling", "linear"}, all_tasks, {}});
  add({"mean_imputation", "Mean Imputation", OperationKind::data_processing,
       {"preprocessing", "imputation"}, tabular, {}});
  add({"zscore_outlier_filter", "Z-Score Outlier Filter",
       OperationKind::data_processing,
       {"preprocessing", "filtering", "non-linear"}, tabular,
       {{"threshold", real_domain(1.5, 5.0, false, 3.0)}}});
  add({"pca_topk", "PCA (top components)", OperationKind::data_processing,
       {"preprocessing", "dimension_reduction", "linear"}, all_tasks,
       {{"k", int_domain(1, 8, 2)}}});
  // accepts_series / emits_series drive the data-kind validation pass.
  add({"lagged_transform", "Lagged Window Transform",
       OperationKind::data_processing,
       {"ts_specific", "lagging", "accepts_series"}, {TT::ts_forecasting},
       {{"window", int_domain(2, 20, 10)}}});
  add({"moving_average_smoothing", "Moving Average Smoothing",
       OperationKind::data_processing,
       {"ts_specific", "smoothing", "accepts_series", "emits_series"},
       {TT::ts_forecasting}, {{"window", int_domain(2, 10, 3)}}});

  add({"merge_concat", "Merge (concatenate)", OperationKind::data_flow,
       {"data_flow", "non-default"}, all_tasks, {}});

  return r;
}

}  // namespace pipeforge

#endif  // PIPEFORGE_OPERATIONS_HPP_
