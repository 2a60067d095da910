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

#ifndef PIPEFORGE_SENSITIVITY_HPP_
#define PIPEFORGE_SENSITIVITY_HPP_

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pipeforge/execution.hpp"
#include "pipeforge/pipeline.hpp"

namespace pipeforge {

enum class SAApproach { deletion, replacement };

/// Importance below -kSAImportanceEpsilon counts as a real improvement;
/// the band around zero absorbs float jitter from exactly-neutral nodes.
inline constexpr double kSAImportanceEpsilon = 1e-9;

struct SAConfig {
  std::set<SAApproach> approaches = {SAApproach::deletion,
                                     SAApproach::replacement};
  int iterations = 1;  // N in the importance index
  Metric metric = Metric::ROC_AUC;
  std::uint64_t seed = 0;
  double fit_fraction = 0.75;

  void check() const {
    if (approaches.empty()) throw Error("at least one SA approach required");
    if (iterations < 1) throw Error("SA iterations must be >= 1");
  }
};

struct SANodeReport {
  bool deletable = false;
  double importance_delete = std::numeric_limits<double>::quiet_NaN();
  double importance_replace = std::numeric_limits<double>::quiet_NaN();
  std::string best_replacement;  // empty when none improves or none tried
  bool delete_improves = false;
  bool replace_improves = false;
};

struct SAReport {
  std::map<int, SANodeReport> per_node;
  double sustainability_index = 1.0;  // 1 - n_del / n_total
  int n_total = 0;
  int n_del = 0;
  int n_repl = 0;
  Metric metric = Metric::ROC_AUC;
  int iterations = 1;
};

/// Mean of (1 - F'/F) over paired per-iteration scores. Exposed on its own
/// so the arithmetic is testable against closed-form values.
inline double importance_from_scores(const std::vector<double>& original,
                                     const std::vector<double>& modified) {
  if (original.size() != modified.size() || original.empty())
    throw DataShapeError("importance needs equal non-empty score lists");
  double acc = 0;
  for (std::size_t i = 0; i < original.size(); ++i) {
    const double f = std::max(original[i], 1e-12);  // F > 0 by contract
    acc += 1.0 - modified[i] / f;
  }
  return acc / original.size();
}

namespace detail {

/// Per-iteration higher-is-better scores of a pipeline, refit with
/// iteration-specific folds/seeds. Fit failures score 0 (worst).
inline std::vector<double> sa_scores(const Pipeline& pipeline,
                                     const Dataset& data,
                                     const SAConfig& config,
                                     const Registry& registry) {
  std::vector<double> out;
  for (int n = 0; n < config.iterations; ++n) {
    const std::uint64_t it_seed = mix64(config.seed, n);
    double score = 0.0;
    try {
      auto [fit_fold, score_fold] =
          make_scoring_folds(data, config.fit_fraction, it_seed);
      const auto mv = fit_and_score(pipeline, fit_fold, score_fold,
                                    config.metric, it_seed, registry);
      score = std::isfinite(mv.value) ? to_fitness_score(mv) : 0.0;
    } catch (const Error&) {
      score = 0.0;
    }
    out.push_back(score);
  }
  return out;
}

inline std::vector<OperationSpec> replacement_candidates(
    const Registry& registry, const OperationSpec& current, TaskType task) {
  std::vector<OperationSpec> out;
  for (const auto& cand : registry.filter({}, {}, task)) {
    if (cand.operation_id == current.operation_id) continue;
    if (cand.kind != current.kind) continue;
    if ((cand.tags.count("accepts_series") > 0) !=
        (current.tags.count("accepts_series") > 0))
      continue;
    if ((cand.tags.count("emits_series") > 0) !=
        (current.tags.count("emits_series") > 0))
      continue;
    out.push_back(cand);
  }
  return out;
}

}  // namespace detail

/// Structural importance of one node under one approach. Deletion compares
/// against the pipeline without the node; replacement against the best
/// same-kind substitute with default parameters. Positive = the node
/// matters; negative = the modification would improve the score.
inline double node_importance(const Pipeline& pipeline, int node_id,
                              const Dataset& data, const SAConfig& config,
                              SAApproach approach, const Registry& registry,
                              std::string* best_replacement = nullptr) {
  config.check();
  const Node* node = pipeline.find_node(node_id);
  if (!node) throw NodeNotModifiableError(node_id);
  const auto original = detail::sa_scores(pipeline, data, config, registry);

  if (approach == SAApproach::deletion) {
    if (node_id == pipeline.final_node_id) throw NodeNotModifiableError(node_id);
    Pipeline pruned = with_node_removed(pipeline, node_id);
    if (!validate(pruned, StructureClass::composite,
                  std::numeric_limits<int>::max(), registry, data.task,
                  std::numeric_limits<int>::max())
             .ok)
      throw NodeNotModifiableError(node_id);
    return importance_from_scores(
        original, detail::sa_scores(pruned, data, config, registry));
  }

  const OperationSpec& current = registry.at(node->operation_id);
  const auto candidates =
      detail::replacement_candidates(registry, current, data.task);
  if (candidates.empty()) throw NodeNotModifiableError(node_id);

  double best = std::numeric_limits<double>::infinity();
  for (const auto& cand : candidates) {
    Pipeline swapped =
        with_operation_changed(pipeline, node_id, cand.operation_id);
    const double imp = importance_from_scores(
        original, detail::sa_scores(swapped, data, config, registry));
    if (imp < best) {
      best = imp;
      if (best_replacement) *best_replacement = cand.operation_id;
    }
  }
  return best;
}

/// Full structural report: importance per node and approach, deletion /
/// replacement candidate counts, sustainability index.
inline SAReport analyze(const Pipeline& pipeline, const Dataset& data,
                        const SAConfig& config, const Registry& registry) {
  config.check();
  SAReport report;
  report.metric = config.metric;
  report.iterations = config.iterations;
  report.n_total = static_cast<int>(pipeline.nodes.size());

  for (const auto& node : pipeline.nodes) {
    SANodeReport nr;
    if (config.approaches.count(SAApproach::deletion) &&
        node.id != pipeline.final_node_id) {
      try {
        nr.importance_delete = node_importance(
            pipeline, node.id, data, config, SAApproach::deletion, registry);
        nr.deletable = true;
        nr.delete_improves = nr.importance_delete < -kSAImportanceEpsilon;
      } catch (const NodeNotModifiableError&) {
        nr.deletable = false;
      }
    }
    if (config.approaches.count(SAApproach::replacement)) {
      try {
        std::string best;
        nr.importance_replace =
            node_importance(pipeline, node.id, data, config,
                            SAApproach::replacement, registry, &best);
        nr.replace_improves = nr.importance_replace < -kSAImportanceEpsilon;
        if (nr.replace_improves) nr.best_replacement = best;
      } catch (const NodeNotModifiableError&) {
      }
    }
    if (nr.delete_improves) ++report.n_del;
    if (nr.replace_improves && !nr.delete_improves) ++report.n_repl;
    report.per_node[node.id] = std::move(nr);
  }

  report.sustainability_index =
      1.0 - static_cast<double>(report.n_del) / report.n_total;
  return report;
}

/// Applies the single most negative-importance modification from the
/// report (deletion wins ties); identity when nothing improves.
inline Pipeline improve(const Pipeline& pipeline, const SAReport& report) {
  int best_node = -1;
  bool best_is_delete = false;
  std::string best_replacement;
  double best_importance = -kSAImportanceEpsilon;

  for (const auto& [id, nr] : report.per_node) {
    if (nr.delete_improves &&
        (nr.importance_delete < best_importance ||
         (nr.importance_delete == best_importance && !best_is_delete))) {
      best_importance = nr.importance_delete;
      best_node = id;
      best_is_delete = true;
      best_replacement.clear();
    }
    if (nr.replace_improves && nr.importance_replace < best_importance) {
      best_importance = nr.importance_replace;
      best_node = id;
      best_is_delete = false;
      best_replacement = nr.best_replacement;
    }
  }
  if (best_node < 0) return pipeline;
  return best_is_delete
             ? with_node_removed(pipeline, best_node)
             : with_operation_changed(pipeline, best_node, best_replacement);
}

// ---------------------------------------------------------------------------
// Exports

/// Graphviz rendering with importance buckets as colors (delete-approach
/// values where present, replacement otherwise).
inline std::string sa_report_to_dot(const Pipeline& pipeline,
                                    const SAReport& report) {
  auto color_for = [](double imp) {
    if (std::isnan(imp)) return "lightgray";
    if (imp < -kSAImportanceEpsilon) return "indianred";
    if (imp > 0.05) return "palegreen";
    return "khaki";
  };
  std::ostringstream os;
  os << "digraph pipeline {\n  rankdir=LR;\n";
  for (const auto& node : pipeline.nodes) {
    double imp = std::numeric_limits<double>::quiet_NaN();
    auto it = report.per_node.find(node.id);
    if (it != report.per_node.end())
      imp = !std::isnan(it->second.importance_delete)
                ? it->second.importance_delete
                : it->second.importance_replace;
    os << "  n" << node.id << " [label=\"" << node.operation_id;
    if (!std::isnan(imp)) {
      os.precision(3);
      os << "\\nS_imp=" << imp;
    }
    os << "\" style=filled fillcolor=" << color_for(imp) << "];\n";
  }
  for (const auto& node : pipeline.nodes)
    for (int pid : node.parent_ids)
      os << "  n" << pid << " -> n" << node.id << ";\n";
  os << "}\n";
  return os.str();
}

}  // namespace pipeforge

#endif  // PIPEFORGE_SENSITIVITY_HPP_
