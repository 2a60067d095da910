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

#ifndef PIPEFORGE_PIPELINE_HPP_
#define PIPEFORGE_PIPELINE_HPP_

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pipeforge/hyperparams.hpp"
#include "pipeforge/operations.hpp"

namespace pipeforge {

inline constexpr int kDefaultMaxDepth = 5;
inline constexpr int kDefaultMaxNodes = 15;

/// How a secondary node combines its inputs: sequential = parents'
/// outputs only; direct = parents' outputs plus the raw input features;
/// adaptive = raw features appended only when the node's enrichment flag is
/// set (the flag belongs to the search space).
enum class MergePolicy { sequential, direct, adaptive };

inline std::string merge_policy_to_string(MergePolicy p) {
  switch (p) {
    case MergePolicy::sequential: return "sequential";
    case MergePolicy::direct: return "direct";
    case MergePolicy::adaptive: return "adaptive";
  }
  return "?";
}

inline std::optional<MergePolicy> merge_policy_from_string(const std::string& s) {
  if (s == "sequential") return MergePolicy::sequential;
  if (s == "direct") return MergePolicy::direct;
  if (s == "adaptive") return MergePolicy::adaptive;
  return std::nullopt;
}

/// Graph families a search may be restricted to: linear = path graph,
/// ensemble = all root-to-sink paths equally long, composite = any DAG with
/// a unique final node.
enum class StructureClass { linear, ensemble, composite };

inline std::string structure_class_to_string(StructureClass c) {
  switch (c) {
    case StructureClass::linear: return "linear";
    case StructureClass::ensemble: return "ensemble";
    case StructureClass::composite: return "composite";
  }
  return "?";
}

inline std::optional<StructureClass> structure_class_from_string(
    const std::string& s) {
  if (s == "linear") return StructureClass::linear;
  if (s == "ensemble") return StructureClass::ensemble;
  if (s == "composite") return StructureClass::composite;
  return std::nullopt;
}

struct Node {
  int id = 0;
  std::string operation_id;
  ParamMap hyperparams;         // only explicitly set entries
  std::vector<int> parent_ids;  // order is semantic: merge column order
  MergePolicy merge_policy = MergePolicy::adaptive;
  bool data_enrichment = false;
};

/// A DAG of operation nodes with a unique final node. Treated as immutable:
/// every structural edit below returns a new instance.
struct Pipeline {
  std::vector<Node> nodes;
  int final_node_id = -1;

  const Node* find_node(int id) const {
    for (const auto& n : nodes)
      if (n.id == id) return &n;
    return nullptr;
  }

  Node* find_node(int id) {
    for (auto& n : nodes)
      if (n.id == id) return &n;
    return nullptr;
  }

  std::size_t size() const { return nodes.size(); }
};

/// Convenience constructor used heavily by tests and fixtures.
inline Pipeline make_pipeline(std::vector<Node> nodes) {
  Pipeline p;
  p.nodes = std::move(nodes);
  // Sink = the node nobody lists as a parent (when unique).
  std::set<int> referenced;
  for (const auto& n : p.nodes)
    for (int pid : n.parent_ids) referenced.insert(pid);
  for (const auto& n : p.nodes)
    if (!referenced.count(n.id)) p.final_node_id = n.id;
  return p;
}

inline std::map<int, std::vector<int>> children_of(const Pipeline& p) {
  std::map<int, std::vector<int>> out;
  for (const auto& n : p.nodes) out.emplace(n.id, std::vector<int>{});
  for (const auto& n : p.nodes)
    for (int pid : n.parent_ids) {
      auto it = out.find(pid);
      if (it != out.end()) it->second.push_back(n.id);
    }
  return out;
}

namespace detail {

/// Topological order by Kahn's algorithm; empty result signals a cycle (or
/// dangling parents). Ready nodes are taken in id order, which is enough
/// for structural checks; canonical ordering lives elsewhere.
inline std::vector<int> topological_order(const Pipeline& p) {
  std::map<int, std::size_t> missing;
  for (const auto& n : p.nodes) missing[n.id] = n.parent_ids.size();
  auto children = children_of(p);
  std::set<int> ready;
  for (const auto& [id, m] : missing)
    if (m == 0) ready.insert(id);
  std::vector<int> order;
  while (!ready.empty()) {
    const int id = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(id);
    for (int child : children[id])
      if (--missing[child] == 0) ready.insert(child);
  }
  if (order.size() != p.nodes.size()) return {};
  return order;
}

}  // namespace detail

/// Longest root-to-sink path counted in nodes. The stored structure is
/// always recomputed here; callers must not cache depth across edits.
inline int compute_depth(const Pipeline& pipeline) {
  auto order = detail::topological_order(pipeline);
  if (order.empty())
    throw PipelineValidationError("cycle_detected");
  std::map<int, int> depth;
  int best = 0;
  for (int id : order) {
    const Node* n = pipeline.find_node(id);
    int d = 1;
    for (int pid : n->parent_ids) d = std::max(d, depth[pid] + 1);
    depth[id] = d;
    best = std::max(best, d);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Validation

struct ValidationResult {
  bool ok = true;
  std::string rule;  // first violated rule id; empty when ok
  int node_id = -1;
  std::string message;

  static ValidationResult pass() { return {}; }
  static ValidationResult fail(std::string rule_id, int node = -1,
                               std::string msg = "") {
    return {false, std::move(rule_id), node, std::move(msg)};
  }
};

namespace detail {

enum class DataKind { table, series };

/// Output kind of a node given its input kind, driven by registry tags so
/// new operations can opt into series handling without code changes.
inline DataKind op_output_kind(const OperationSpec& spec, DataKind input) {
  if (spec.kind == OperationKind::data_flow) return input;  // pass-through
  if (spec.tags.count("emits_series")) return DataKind::series;
  return DataKind::table;
}

inline bool op_accepts(const OperationSpec& spec, DataKind input) {
  if (spec.kind == OperationKind::data_flow) return true;
  const bool wants_series = spec.tags.count("accepts_series") > 0;
  return wants_series == (input == DataKind::series);
}

}  // namespace detail

/// Structural + semantic validation. Violations are data, not exceptions:
/// the composer's reproduction loop calls this on every candidate.
inline ValidationResult validate(const Pipeline& pipeline,
                                 StructureClass structure_class, int max_depth,
                                 const Registry& registry, TaskType task,
                                 int max_nodes = kDefaultMaxNodes) {
  if (pipeline.nodes.empty()) return ValidationResult::fail("empty_pipeline");

  std::set<int> ids;
  for (const auto& n : pipeline.nodes)
    if (!ids.insert(n.id).second)
      return ValidationResult::fail("duplicate_node_id", n.id);

  for (const auto& n : pipeline.nodes) {
    std::set<int> seen;
    for (int pid : n.parent_ids) {
      if (!ids.count(pid))
        return ValidationResult::fail("unknown_parent", n.id,
                                      "parent " + std::to_string(pid));
      if (pid == n.id) return ValidationResult::fail("cycle_detected", n.id);
      if (!seen.insert(pid).second)
        return ValidationResult::fail("duplicate_parent", n.id);
    }
  }

  const auto order = detail::topological_order(pipeline);
  if (order.empty()) return ValidationResult::fail("cycle_detected");

  auto children = children_of(pipeline);
  std::vector<int> sinks;
  for (const auto& n : pipeline.nodes)
    if (children[n.id].empty()) sinks.push_back(n.id);
  if (sinks.empty()) return ValidationResult::fail("no_sink");
  if (sinks.size() > 1)
    return ValidationResult::fail("multiple_sinks", sinks[1]);
  if (pipeline.final_node_id != sinks[0])
    return ValidationResult::fail("final_node_mismatch", pipeline.final_node_id);
  // With one sink and acyclicity, every node reaches it unless isolated
  // subgraphs existed, which the unique-sink rule already excludes.

  const int depth = compute_depth(pipeline);
  if (depth > max_depth)
    return ValidationResult::fail("max_depth_exceeded", -1,
                                  std::to_string(depth) + " > " +
                                      std::to_string(max_depth));
  if (static_cast<int>(pipeline.nodes.size()) > max_nodes)
    return ValidationResult::fail("max_nodes_exceeded");

  if (structure_class == StructureClass::linear) {
    for (const auto& n : pipeline.nodes)
      if (n.parent_ids.size() > 1 || children[n.id].size() > 1)
        return ValidationResult::fail("not_path_graph", n.id);
  } else if (structure_class == StructureClass::ensemble) {
    // Node-to-sink path lengths, memoized over the reverse topological order.
    std::map<int, std::set<int>> lengths;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const int id = *it;
      if (children[id].empty()) {
        lengths[id] = {1};
        continue;
      }
      std::set<int>& mine = lengths[id];
      for (int child : children[id])
        for (int l : lengths[child]) mine.insert(l + 1);
    }
    std::set<int> root_lengths;
    for (const auto& n : pipeline.nodes)
      if (n.parent_ids.empty())
        for (int l : lengths[n.id]) root_lengths.insert(l);
    if (root_lengths.size() > 1)
      return ValidationResult::fail("not_equal_paths");
  }

  for (const auto& n : pipeline.nodes) {
    const OperationSpec* spec = registry.find(n.operation_id);
    if (!spec)
      return ValidationResult::fail("unknown_operation", n.id, n.operation_id);
    if (!spec->supports(task))
      return ValidationResult::fail("task_incompatible", n.id,
                                    n.operation_id + " does not support " +
                                        task_to_string(task));
    try {
      spec->check_params(n.hyperparams);
    } catch (const InvalidHyperparamError& e) {
      return ValidationResult::fail("hyperparam_out_of_space", n.id, e.what());
    }
    if (spec->kind == OperationKind::data_flow && n.parent_ids.empty())
      return ValidationResult::fail("merge_requires_parents", n.id);
  }

  // Data-kind pass: time-series pipelines must lag the series before any
  // tabular operation sees it, and only series operations may sit upstream.
  {
    using detail::DataKind;
    const DataKind raw = task == TaskType::ts_forecasting ? DataKind::series
                                                          : DataKind::table;
    std::map<int, DataKind> out_kind;
    for (int id : order) {
      const Node* n = pipeline.find_node(id);
      const OperationSpec& spec = registry.at(n->operation_id);
      DataKind input = raw;
      if (!n->parent_ids.empty()) {
        input = out_kind[n->parent_ids[0]];
        for (int pid : n->parent_ids)
          if (out_kind[pid] != input)
            return ValidationResult::fail("data_kind_mismatch", id,
                                          "parents emit mixed data kinds");
      }
      if (!detail::op_accepts(spec, input))
        return ValidationResult::fail(
            "data_kind_mismatch", id,
            n->operation_id + " cannot consume this input kind");
      out_kind[id] = detail::op_output_kind(spec, input);
    }
    const OperationSpec& sink_spec =
        registry.at(pipeline.find_node(pipeline.final_node_id)->operation_id);
    if (sink_spec.kind != OperationKind::model)
      return ValidationResult::fail("final_node_not_model",
                                    pipeline.final_node_id);
    if (out_kind[pipeline.final_node_id] == DataKind::series)
      return ValidationResult::fail("final_node_emits_series",
                                    pipeline.final_node_id);
  }

  return ValidationResult::pass();
}

// ---------------------------------------------------------------------------
// Canonical ordering and signature

namespace detail {

inline std::string params_repr(const ParamMap& params) {
  std::string out;
  for (const auto& [k, v] : params) {
    out += k;
    out += '=';
    out += hyper_value_to_string(v);
    out += ';';
  }
  return out;
}

inline std::string node_label(const Node& n) {
  std::string out = n.operation_id;
  out += '{';
  out += params_repr(n.hyperparams);
  out += '}';
  out += merge_policy_to_string(n.merge_policy)[0];
  out += n.data_enrichment ? '+' : '-';
  return out;
}

/// Ancestor-side expansion: node label plus parent expansions in parent
/// order (parent order is semantic).
inline const std::string& ancestor_expansion(const Pipeline& p, int id,
                                             std::map<int, std::string>& memo) {
  auto it = memo.find(id);
  if (it != memo.end()) return it->second;
  const Node* n = p.find_node(id);
  std::string out = node_label(*n);
  out += '(';
  for (std::size_t i = 0; i < n->parent_ids.size(); ++i) {
    if (i) out += ',';
    out += ancestor_expansion(p, n->parent_ids[i], memo);
  }
  out += ')';
  return memo.emplace(id, std::move(out)).first->second;
}

/// Descendant-side expansion; child order is not semantic so children are
/// sorted. Used only to disambiguate canonical-order ties.
inline const std::string& descendant_expansion(
    const Pipeline& p, int id, const std::map<int, std::vector<int>>& children,
    std::map<int, std::string>& memo) {
  auto it = memo.find(id);
  if (it != memo.end()) return it->second;
  const Node* n = p.find_node(id);
  std::vector<std::string> parts;
  for (int child : children.at(id))
    parts.push_back(descendant_expansion(p, child, children, memo));
  std::sort(parts.begin(), parts.end());
  std::string out = node_label(*n);
  out += '[';
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ',';
    out += parts[i];
  }
  out += ']';
  return memo.emplace(id, std::move(out)).first->second;
}

}  // namespace detail

/// Node ids in a relabeling-invariant topological order: ready nodes are
/// emitted in order of (ancestor expansion, descendant expansion). Drives
/// the cache signature, serialization ids and per-node seeds.
inline std::vector<int> canonical_order(const Pipeline& pipeline) {
  auto children = children_of(pipeline);
  std::map<int, std::string> anc_memo, desc_memo;
  std::map<int, std::size_t> missing;
  for (const auto& n : pipeline.nodes) missing[n.id] = n.parent_ids.size();

  auto key_less = [&](int a, int b) {
    const auto& ea = detail::ancestor_expansion(pipeline, a, anc_memo);
    const auto& eb = detail::ancestor_expansion(pipeline, b, anc_memo);
    if (ea != eb) return ea < eb;
    const auto& da = detail::descendant_expansion(pipeline, a, children, desc_memo);
    const auto& db = detail::descendant_expansion(pipeline, b, children, desc_memo);
    if (da != db) return da < db;
    return a < b;
  };

  std::vector<int> ready;
  for (const auto& n : pipeline.nodes)
    if (n.parent_ids.empty()) ready.push_back(n.id);
  std::vector<int> order;
  while (!ready.empty()) {
    auto best = std::min_element(ready.begin(), ready.end(), key_less);
    const int id = *best;
    ready.erase(best);
    order.push_back(id);
    for (int child : children[id])
      if (--missing[child] == 0) ready.push_back(child);
  }
  if (order.size() != pipeline.nodes.size())
    throw PipelineValidationError("cycle_detected");
  return order;
}

/// Relabeling-invariant structural identity: the full node list rendered
/// with canonical dense ids. Equal signatures reconstruct equal graphs.
inline std::string canonical_signature(const Pipeline& pipeline) {
  const auto order = canonical_order(pipeline);
  std::map<int, int> dense;
  for (std::size_t i = 0; i < order.size(); ++i)
    dense[order[i]] = static_cast<int>(i);
  std::string out;
  for (int id : order) {
    const Node* n = pipeline.find_node(id);
    out += detail::node_label(*n);
    out += '<';
    for (std::size_t i = 0; i < n->parent_ids.size(); ++i) {
      if (i) out += ',';
      out += std::to_string(dense[n->parent_ids[i]]);
    }
    out += '>';
  }
  return out;
}

/// The node plus everything upstream of it.
inline std::set<int> ancestors_of(const Pipeline& p, int node_id) {
  std::set<int> out;
  std::vector<int> stack{node_id};
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    if (!out.insert(id).second) continue;
    const Node* n = p.find_node(id);
    if (n)
      for (int pid : n->parent_ids) stack.push_back(pid);
  }
  return out;
}

/// The sub-pipeline computing `node_id`'s output: the node, its ancestors,
/// and the edges among them, with `node_id` as the new sink.
inline Pipeline subtree_pipeline(const Pipeline& p, int node_id) {
  const auto keep = ancestors_of(p, node_id);
  Pipeline out;
  out.final_node_id = node_id;
  for (const auto& n : p.nodes)
    if (keep.count(n.id)) out.nodes.push_back(n);
  return out;
}

// ---------------------------------------------------------------------------
// Edit operations (return new instances; inputs stay untouched)

inline int next_free_node_id(const Pipeline& p) {
  int mx = -1;
  for (const auto& n : p.nodes) mx = std::max(mx, n.id);
  return mx + 1;
}

/// Removes a non-sink node, splicing its parents into each child's parent
/// list at the position the removed node occupied (duplicates dropped).
inline Pipeline with_node_removed(const Pipeline& p, int node_id) {
  const Node* removed = p.find_node(node_id);
  if (!removed || node_id == p.final_node_id)
    throw NodeNotModifiableError(node_id);
  Pipeline out;
  out.final_node_id = p.final_node_id;
  for (const auto& n : p.nodes) {
    if (n.id == node_id) continue;
    Node copy = n;
    std::vector<int> parents;
    for (int pid : copy.parent_ids) {
      if (pid != node_id) {
        if (std::find(parents.begin(), parents.end(), pid) == parents.end())
          parents.push_back(pid);
        continue;
      }
      for (int grand : removed->parent_ids)
        if (std::find(parents.begin(), parents.end(), grand) == parents.end())
          parents.push_back(grand);
    }
    copy.parent_ids = std::move(parents);
    out.nodes.push_back(std::move(copy));
  }
  return out;
}

/// Swaps a node's operation; explicit hyperparameters reset because the new
/// operation's space need not share names.
inline Pipeline with_operation_changed(const Pipeline& p, int node_id,
                                       const std::string& operation_id) {
  Pipeline out = p;
  Node* n = out.find_node(node_id);
  if (!n) throw NodeNotModifiableError(node_id);
  n->operation_id = operation_id;
  n->hyperparams.clear();
  return out;
}

inline Pipeline with_hyperparams(const Pipeline& p, int node_id,
                                 ParamMap params) {
  Pipeline out = p;
  Node* n = out.find_node(node_id);
  if (!n) throw NodeNotModifiableError(node_id);
  n->hyperparams = std::move(params);
  return out;
}

}  // namespace pipeforge

#endif  // PIPEFORGE_PIPELINE_HPP_
