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

#ifndef PIPEFORGE_SERDE_HPP_
#define PIPEFORGE_SERDE_HPP_

#include <bit>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pipeforge/composer.hpp"
#include "pipeforge/execution.hpp"
#include "pipeforge/pipeline.hpp"

namespace pipeforge {

using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Binary primitives (little-endian, doubles bit-exact)

class BinaryWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u64(s.size());
    buf_.append(s);
  }
  void vec_f64(const std::vector<double>& v) {
    u64(v.size());
    for (double x : v) f64(x);
  }
  const std::string& bytes() const { return buf_; }

 private:
  std::string buf_;
};

class BinaryReader {
 public:
  explicit BinaryReader(std::string data) : data_(std::move(data)) {}

  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(data_[pos_++]);
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
    return v;
  }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint64_t n = u64();
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::vector<double> vec_f64() {
    const std::uint64_t n = u64();
    std::vector<double> v(n);
    for (auto& x : v) x = f64();
    return v;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::uint64_t n) {
    if (pos_ + n > data_.size())
      throw SchemaError("binary state", "truncated payload");
  }
  std::string data_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Operation state payloads

namespace detail {

enum class StateTag : std::uint8_t {
  linear = 1,
  logistic,
  tree,
  knn,
  naive_bayes,
  standard_scaler,
  minmax_scaler,
  imputation,
  outlier_filter,
  pca,
  lagged,
  smoothing,
  merge_pass,
  atomized,
};

inline void save_matrix(BinaryWriter& w, const Matrix& m) {
  w.u64(m.rows());
  w.u64(m.cols());
  for (double v : m.data()) w.f64(v);
}

inline Matrix load_matrix(BinaryReader& r) {
  const std::size_t rows = r.u64(), cols = r.u64();
  Matrix m(rows, cols);
  for (auto& v : m.data()) v = r.f64();
  return m;
}

void save_fitted_pipeline(BinaryWriter& w, const FittedPipeline& fp);
FittedPipeline load_fitted_pipeline(BinaryReader& r);

inline void save_state(BinaryWriter& w, const OperationState& state) {
  if (const auto* s = std::get_if<LinearModelState>(&state)) {
    w.u8(static_cast<std::uint8_t>(StateTag::linear));
    w.vec_f64(s->coefficients);
  } else if (const auto* s = std::get_if<LogisticState>(&state)) {
    w.u8(static_cast<std::uint8_t>(StateTag::logistic));
    w.vec_f64(s->feature_means);
    w.vec_f64(s->feature_stds);
    w.vec_f64(s->weights);
    w.i64(s->num_classes);
  } else if (const auto* s = std::get_if<TreeState>(&state)) {
    w.u8(static_cast<std::uint8_t>(StateTag::tree));
    w.i64(s->num_classes);
    w.u64(s->nodes.size());
    for (const auto& n : s->nodes) {
      w.i64(n.feature);
      w.f64(n.threshold);
      w.i64(n.left);
      w.i64(n.right);
      w.f64(n.value);
      w.vec_f64(n.class_probs);
    }
  } else if (const auto* s = std::get_if<KnnState>(&state)) {
    w.u8(static_cast<std::uint8_t>(StateTag::knn));
    save_matrix(w, s->train_x);
    w.vec_f64(s->train_y);
    w.i64(s->k);
    w.i64(s->num_classes);
  } else if (const auto* s = std::get_if<NaiveBayesState>(&state)) {
    w.u8(static_cast<std::uint8_t>(StateTag::naive_bayes));
    w.vec_f64(s->log_priors);
    w.vec_f64(s->means);
    w.vec_f64(s->vars);
    w.i64(s->num_classes);
  } else if (const auto* s = std::get_if<StandardScalerState>(&state)) {
    w.u8(static_cast<std::uint8_t>(StateTag::standard_scaler));
    w.vec_f64(s->means);
    w.vec_f64(s->stds);
  } else if (const auto* s = std::get_if<MinMaxScalerState>(&state)) {
    w.u8(static_cast<std::uint8_t>(StateTag::minmax_scaler));
    w.vec_f64(s->mins);
    w.vec_f64(s->ranges);
  } else if (const auto* s = std::get_if<ImputationState>(&state)) {
    w.u8(static_cast<std::uint8_t>(StateTag::imputation));
    w.vec_f64(s->column_means);
  } else if (const auto* s = std::get_if<OutlierFilterState>(&state)) {
    w.u8(static_cast<std::uint8_t>(StateTag::outlier_filter));
    w.vec_f64(s->means);
    w.vec_f64(s->stds);
    w.f64(s->threshold);
  } else if (const auto* s = std::get_if<PcaState>(&state)) {
    w.u8(static_cast<std::uint8_t>(StateTag::pca));
    w.vec_f64(s->column_means);
    w.vec_f64(s->components);
    w.u64(s->n_components);
    w.u64(s->input_dims);
  } else if (const auto* s = std::get_if<LaggedState>(&state)) {
    w.u8(static_cast<std::uint8_t>(StateTag::lagged));
    w.i64(s->window);
    w.i64(s->gap);
  } else if (const auto* s = std::get_if<SmoothingState>(&state)) {
    w.u8(static_cast<std::uint8_t>(StateTag::smoothing));
    w.i64(s->window);
  } else if (std::holds_alternative<MergePassState>(state)) {
    w.u8(static_cast<std::uint8_t>(StateTag::merge_pass));
  } else if (const auto* s =
                 std::get_if<std::shared_ptr<const AtomizedFittedState>>(
                     &state)) {
    w.u8(static_cast<std::uint8_t>(StateTag::atomized));
    if (!*s || !(*s)->inner)
      throw UnserializableStateError("atomized node without fitted inner");
    save_fitted_pipeline(w, *(*s)->inner);
  } else {
    throw UnserializableStateError("unknown operation state");
  }
}

inline OperationState load_state(BinaryReader& r) {
  switch (static_cast<StateTag>(r.u8())) {
    case StateTag::linear:
      return LinearModelState{r.vec_f64()};
    case StateTag::logistic: {
      LogisticState s;
      s.feature_means = r.vec_f64();
      s.feature_stds = r.vec_f64();
      s.weights = r.vec_f64();
      s.num_classes = static_cast<int>(r.i64());
      return s;
    }
    case StateTag::tree: {
      TreeState s;
      s.num_classes = static_cast<int>(r.i64());
      const std::uint64_t n = r.u64();
      s.nodes.resize(n);
      for (auto& node : s.nodes) {
        node.feature = static_cast<int>(r.i64());
        node.threshold = r.f64();
        node.left = static_cast<int>(r.i64());
        node.right = static_cast<int>(r.i64());
        node.value = r.f64();
        node.class_probs = r.vec_f64();
      }
      return s;
    }
    case StateTag::knn: {
      KnnState s;
      s.train_x = load_matrix(r);
      s.train_y = r.vec_f64();
      s.k = r.i64();
      s.num_classes = static_cast<int>(r.i64());
      return s;
    }
    case StateTag::naive_bayes: {
      NaiveBayesState s;
      s.log_priors = r.vec_f64();
      s.means = r.vec_f64();
      s.vars = r.vec_f64();
      s.num_classes = static_cast<int>(r.i64());
      return s;
    }
    case StateTag::standard_scaler: {
      StandardScalerState s;
      s.means = r.vec_f64();
      s.stds = r.vec_f64();
      return s;
    }
    case StateTag::minmax_scaler: {
      MinMaxScalerState s;
      s.mins = r.vec_f64();
      s.ranges = r.vec_f64();
      return s;
    }
    case StateTag::imputation:
      return ImputationState{r.vec_f64()};
    case StateTag::outlier_filter: {
      OutlierFilterState s;
      s.means = r.vec_f64();
      s.stds = r.vec_f64();
      s.threshold = r.f64();
      return s;
    }
    case StateTag::pca: {
      PcaState s;
      s.column_means = r.vec_f64();
      s.components = r.vec_f64();
      s.n_components = r.u64();
      s.input_dims = r.u64();
      return s;
    }
    case StateTag::lagged: {
      LaggedState s;
      s.window = r.i64();
      s.gap = r.i64();
      return s;
    }
    case StateTag::smoothing:
      return SmoothingState{r.i64()};
    case StateTag::merge_pass:
      return MergePassState{};
    case StateTag::atomized:
      return std::make_shared<const AtomizedFittedState>(AtomizedFittedState{
          std::make_shared<const FittedPipeline>(load_fitted_pipeline(r))});
  }
  throw SchemaError("binary state", "unknown state tag");
}

inline void save_fitted_operation(BinaryWriter& w, const FittedOperation& op) {
  w.str(op.operation_id);
  w.u64(op.input_width);
  w.u64(op.output_width);
  save_state(w, op.state);
}

inline FittedOperation load_fitted_operation(BinaryReader& r) {
  FittedOperation op;
  op.operation_id = r.str();
  op.input_width = r.u64();
  op.output_width = r.u64();
  op.state = load_state(r);
  return op;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Pipeline document (JSON)

namespace detail {

inline ordered_json hyper_value_to_json(const HyperValue& v) {
  if (std::holds_alternative<std::int64_t>(v)) return std::get<std::int64_t>(v);
  if (std::holds_alternative<double>(v)) return std::get<double>(v);
  return std::get<std::string>(v);
}

inline HyperValue hyper_value_from_json(const nlohmann::json& j,
                                        const std::string& where) {
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  if (j.is_boolean()) return static_cast<std::int64_t>(j.get<bool>());
  throw SchemaError(where, "unsupported parameter value type");
}

inline ordered_json params_to_json(const ParamMap& params) {
  ordered_json out = ordered_json::object();
  for (const auto& [k, v] : params) out[k] = hyper_value_to_json(v);
  return out;
}

}  // namespace detail

ordered_json pipeline_to_document(const Pipeline& pipeline,
                                  const Registry& registry,
                                  bool with_fitted_paths);

namespace detail {

inline ordered_json node_record(const Node& node, int dense_id,
                                const std::map<int, int>& dense,
                                const Registry& registry,
                                bool with_fitted_paths) {
  const OperationSpec& spec = registry.at(node.operation_id);
  ordered_json rec;
  rec["operation_id"] = dense_id;
  rec["operation_type"] = node.operation_id;
  rec["operation_name"] = spec.display_name;
  rec["custom_params"] = params_to_json(node.hyperparams);
  rec["params"] = params_to_json(spec.effective_params(node.hyperparams));
  ordered_json from = ordered_json::array();
  for (int pid : node.parent_ids) from.push_back(dense.at(pid));
  rec["nodes_from"] = from;
  rec["merge_policy"] = merge_policy_to_string(node.merge_policy);
  rec["data_enrichment"] = node.data_enrichment;
  if (spec.is_atomized()) {
    const auto payload = registry.atomized_payload(node.operation_id);
    if (!payload)
      throw UnserializableStateError("atomized '" + node.operation_id +
                                     "' has no payload");
    ordered_json meta;
    meta["node_count"] = spec.atomized_node_count;
    std::vector<std::string> tasks;
    for (auto t : spec.tasks) tasks.push_back(task_to_string(t));
    meta["tasks"] = tasks;
    meta["accepts_series"] = spec.tags.count("accepts_series") > 0;
    rec["atomized_meta"] = meta;
    rec["inner_pipeline"] =
        pipeline_to_document(payload->structure, registry, false);
  }
  if (with_fitted_paths)
    rec["fitted_operation_path"] =
        "fitted_operations/operation_" + std::to_string(dense_id) + ".pfo";
  return rec;
}

}  // namespace detail

/// The persistence document: operation counts, depth, and the node list
/// with dense topological ids.
inline ordered_json pipeline_to_document(const Pipeline& pipeline,
                                         const Registry& registry,
                                         bool with_fitted_paths) {
  const auto order = canonical_order(pipeline);
  std::map<int, int> dense;
  for (std::size_t i = 0; i < order.size(); ++i)
    dense[order[i]] = static_cast<int>(i);

  std::map<std::string, int> counts;
  for (const auto& n : pipeline.nodes) ++counts[n.operation_id];

  ordered_json doc;
  ordered_json totals = ordered_json::object();
  for (const auto& [op, count] : counts) totals[op] = count;
  doc["total_pipeline_operations"] = totals;
  doc["depth"] = compute_depth(pipeline);
  ordered_json nodes = ordered_json::array();
  for (std::size_t i = 0; i < order.size(); ++i)
    nodes.push_back(detail::node_record(*pipeline.find_node(order[i]),
                                        static_cast<int>(i), dense, registry,
                                        with_fitted_paths));
  doc["nodes"] = nodes;
  return doc;
}

struct ImportedPipeline {
  Pipeline pipeline;
  std::optional<FittedPipeline> fitted;
};

namespace detail {

inline Pipeline pipeline_from_document(const nlohmann::json& doc,
                                       Registry& registry,
                                       const std::string& where);

/// Rebuilds an atomized registry entry from its document metadata.
inline void restore_atomized_spec(const nlohmann::json& rec,
                                  Registry& registry,
                                  const std::string& where) {
  const std::string op_id = rec.at("operation_type").get<std::string>();
  if (registry.find(op_id)) return;  // already present
  if (!rec.contains("atomized_meta") || !rec.contains("inner_pipeline"))
    throw SchemaError(where, "atomized node without embedded inner pipeline");
  Pipeline inner = pipeline_from_document(rec["inner_pipeline"], registry,
                                          where + ".inner_pipeline");
  OperationSpec spec;
  spec.operation_id = op_id;
  spec.display_name = rec.value("operation_name", op_id);
  spec.kind = OperationKind::model;
  spec.tags.insert("atomized");
  if (rec["atomized_meta"].value("accepts_series", false))
    spec.tags.insert("accepts_series");
  for (const auto& t : rec["atomized_meta"].at("tasks")) {
    auto task = task_from_string(t.get<std::string>());
    if (!task) throw SchemaError(where, "unknown task in atomized_meta");
    spec.tasks.insert(*task);
  }
  spec.atomized_node_count = rec["atomized_meta"].at("node_count").get<int>();
  registry.register_atomized(
      spec, std::make_shared<const AtomizedModel>(
                AtomizedModel{std::move(inner), nullptr}));
}

inline Pipeline pipeline_from_document(const nlohmann::json& doc,
                                       Registry& registry,
                                       const std::string& where) {
  if (!doc.contains("nodes") || !doc["nodes"].is_array())
    throw SchemaError(where, "missing 'nodes' array");
  const auto& nodes = doc["nodes"];
  const int n = static_cast<int>(nodes.size());

  Pipeline p;
  std::set<int> seen;
  for (const auto& rec : nodes) {
    const std::string rec_where =
        where + ".nodes[" + std::to_string(p.nodes.size()) + "]";
    Node node;
    node.id = rec.at("operation_id").get<int>();
    if (node.id < 0 || node.id >= n || !seen.insert(node.id).second)
      throw SchemaError(rec_where, "node ids must be dense 0..n-1");
    node.operation_id = rec.at("operation_type").get<std::string>();
    if (rec.contains("custom_params"))
      for (const auto& [k, v] : rec["custom_params"].items())
        node.hyperparams[k] =
            hyper_value_from_json(v, rec_where + ".custom_params." + k);
    if (rec.contains("params"))
      for (const auto& [k, _] : node.hyperparams)
        if (!rec["params"].contains(k))
          throw SchemaError(rec_where, "params must include custom_params");
    for (const auto& pid : rec.at("nodes_from")) {
      const int parent = pid.get<int>();
      if (parent < 0 || parent >= n)
        throw DanglingReferenceError(rec_where + ": nodes_from references " +
                                     std::to_string(parent));
      node.parent_ids.push_back(parent);
    }
    if (rec.contains("merge_policy")) {
      auto mp = merge_policy_from_string(rec["merge_policy"].get<std::string>());
      if (!mp) throw SchemaError(rec_where, "unknown merge_policy");
      node.merge_policy = *mp;
    }
    node.data_enrichment = rec.value("data_enrichment", false);

    if (rec.contains("atomized_meta"))
      restore_atomized_spec(rec, registry, rec_where);
    if (!registry.find(node.operation_id))
      throw UnknownOperationError(node.operation_id);
    p.nodes.push_back(std::move(node));
  }

  std::set<int> referenced;
  for (const auto& node : p.nodes)
    for (int pid : node.parent_ids) referenced.insert(pid);
  for (const auto& node : p.nodes)
    if (!referenced.count(node.id)) p.final_node_id = node.id;

  if (doc.contains("depth") &&
      doc["depth"].get<int>() != compute_depth(p))
    throw SchemaError(where, "stored depth disagrees with the graph");
  return p;
}

inline void save_fitted_pipeline(BinaryWriter& w, const FittedPipeline& fp) {
  // Structure travels as a minimal self-contained node list (no registry
  // involvement) so .pfo files stay loadable for nested atomized states.
  ordered_json structure;
  ordered_json nodes = ordered_json::array();
  for (const auto& n : fp.structure.nodes) {
    ordered_json rec;
    rec["id"] = n.id;
    rec["operation_type"] = n.operation_id;
    rec["custom_params"] = params_to_json(n.hyperparams);
    rec["nodes_from"] = n.parent_ids;
    rec["merge_policy"] = merge_policy_to_string(n.merge_policy);
    rec["data_enrichment"] = n.data_enrichment;
    nodes.push_back(rec);
  }
  structure["nodes"] = nodes;
  structure["final_node_id"] = fp.structure.final_node_id;
  w.str(structure.dump());

  w.u8(static_cast<std::uint8_t>(fp.context.task));
  w.i64(fp.context.num_classes);
  w.i64(fp.context.horizon);
  w.u64(fp.raw_feature_width);
  w.u64(fp.states.size());
  for (const auto& [id, op] : fp.states) {
    w.i64(id);
    save_fitted_operation(w, op);
  }
}

inline FittedPipeline load_fitted_pipeline(BinaryReader& r) {
  FittedPipeline fp;
  const auto structure = nlohmann::json::parse(r.str());
  for (const auto& rec : structure.at("nodes")) {
    Node n;
    n.id = rec.at("id").get<int>();
    n.operation_id = rec.at("operation_type").get<std::string>();
    for (const auto& [k, v] : rec.at("custom_params").items())
      n.hyperparams[k] = hyper_value_from_json(v, "fitted structure");
    for (const auto& pid : rec.at("nodes_from"))
      n.parent_ids.push_back(pid.get<int>());
    n.merge_policy =
        merge_policy_from_string(rec.at("merge_policy").get<std::string>())
            .value_or(MergePolicy::adaptive);
    n.data_enrichment = rec.value("data_enrichment", false);
    fp.structure.nodes.push_back(std::move(n));
  }
  fp.structure.final_node_id = structure.at("final_node_id").get<int>();
  fp.context.task = static_cast<TaskType>(r.u8());
  fp.context.num_classes = static_cast<int>(r.i64());
  fp.context.horizon = static_cast<int>(r.i64());
  fp.raw_feature_width = r.u64();
  const std::uint64_t count = r.u64();
  for (std::uint64_t i = 0; i < count; ++i) {
    const int id = static_cast<int>(r.i64());
    fp.states.emplace(id, load_fitted_operation(r));
  }
  return fp;
}

constexpr char kFittedMagic[4] = {'P', 'F', 'F', 'O'};
constexpr std::uint32_t kFittedVersion = 1;

inline void write_fitted_container(const std::filesystem::path& path,
                                   const FittedOperation& op) {
  BinaryWriter payload;
  save_fitted_operation(payload, op);
  BinaryWriter file;
  file.u8(kFittedMagic[0]);
  file.u8(kFittedMagic[1]);
  file.u8(kFittedMagic[2]);
  file.u8(kFittedMagic[3]);
  file.u32(kFittedVersion);
  file.str(op.operation_id);
  file.u64(payload.bytes().size());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << file.bytes() << payload.bytes();
}

inline FittedOperation read_fitted_container(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DanglingReferenceError("missing fitted state '" +
                                        path.string() + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  BinaryReader r(std::move(bytes));
  char magic[4];
  for (char& c : magic) c = static_cast<char>(r.u8());
  if (std::string_view(magic, 4) != std::string_view(kFittedMagic, 4))
    throw SchemaError(path.string(), "bad magic bytes");
  if (r.u32() != kFittedVersion)
    throw SchemaError(path.string(), "unsupported container version");
  r.str();  // operation_id, informational
  r.u64();  // payload size
  return load_fitted_operation(r);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Dataset CSV writing (fixtures, export archives, prediction dumps)

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_dataset_csv(const Dataset& ds,
                              const std::filesystem::path& path,
                              const std::string& target_name = "target") {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  if (ds.task == TaskType::ts_forecasting) {
    out << target_name << "\n";
    for (double v : ds.target) out << format_double(v) << "\n";
    return;
  }
  for (std::size_t c = 0; c < ds.features.cols(); ++c) {
    out << (c < ds.feature_names.size() ? ds.feature_names[c]
                                        : "x" + std::to_string(c))
        << ",";
  }
  out << target_name << "\n";
  for (std::size_t r = 0; r < ds.features.rows(); ++r) {
    for (std::size_t c = 0; c < ds.features.cols(); ++c) {
      const double v = ds.features.at(r, c);
      if (!std::isnan(v)) out << format_double(v);
      out << ",";
    }
    out << format_double(ds.target[r]) << "\n";
  }
}

// ---------------------------------------------------------------------------
// Export / import

/// Writes pipeline.json (+ fitted_operations/, + data/ when datasets are
/// supplied) under out_dir. Returns the document.
inline ordered_json export_pipeline(const Pipeline& pipeline,
                                    const Registry& registry,
                                    const std::filesystem::path& out_dir,
                                    const FittedPipeline* fitted = nullptr,
                                    const Dataset* train = nullptr,
                                    const Dataset* validation = nullptr) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir.string() + "'");

  ordered_json doc = pipeline_to_document(pipeline, registry, fitted != nullptr);
  if (fitted) {
    ordered_json ctx;
    ctx["task"] = task_to_string(fitted->context.task);
    ctx["num_classes"] = fitted->context.num_classes;
    ctx["horizon"] = fitted->context.horizon;
    ctx["raw_feature_width"] = fitted->raw_feature_width;
    doc["fitted_context"] = ctx;
  }

  {
    std::ofstream out(out_dir / "pipeline.json");
    if (!out) throw IoError("cannot write pipeline.json");
    out << doc.dump(4) << "\n";
  }

  if (fitted) {
    fs::create_directories(out_dir / "fitted_operations", ec);
    const auto order = canonical_order(pipeline);
    for (std::size_t i = 0; i < order.size(); ++i)
      detail::write_fitted_container(
          out_dir / "fitted_operations" /
              ("operation_" + std::to_string(i) + ".pfo"),
          fitted->state_of(order[i]));
  }
  if (train || validation) {
    fs::create_directories(out_dir / "data", ec);
    if (train) write_dataset_csv(*train, out_dir / "data" / "train.csv");
    if (validation)
      write_dataset_csv(*validation, out_dir / "data" / "validation.csv");
  }
  return doc;
}

/// Reads a pipeline directory (or pipeline.json path). Fitted states load
/// when every node carries a fitted_operation_path. Atomized specs embedded
/// in the document are registered into `registry`.
inline ImportedPipeline import_pipeline(const std::filesystem::path& path,
                                        Registry& registry) {
  namespace fs = std::filesystem;
  fs::path json_path = path;
  if (fs::is_directory(json_path)) json_path /= "pipeline.json";
  std::ifstream in(json_path);
  if (!in) throw IoError("cannot open '" + json_path.string() + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(json_path.string(), e.what());
  }

  ImportedPipeline out;
  out.pipeline = detail::pipeline_from_document(doc, registry, "$");

  bool all_fitted = !out.pipeline.nodes.empty();
  for (const auto& rec : doc["nodes"])
    all_fitted = all_fitted && rec.contains("fitted_operation_path");
  if (!all_fitted) return out;

  FittedPipeline fitted;
  fitted.structure = out.pipeline;
  if (doc.contains("fitted_context")) {
    const auto& ctx = doc["fitted_context"];
    auto task = task_from_string(ctx.value("task", ""));
    if (!task) throw SchemaError("fitted_context", "unknown task");
    fitted.context.task = *task;
    fitted.context.num_classes = ctx.value("num_classes", 0);
    fitted.context.horizon = ctx.value("horizon", 0);
    fitted.raw_feature_width = ctx.value("raw_feature_width", 0);
  }
  const fs::path base = json_path.parent_path();
  for (const auto& rec : doc["nodes"]) {
    const int id = rec.at("operation_id").get<int>();
    const std::string rel = rec.at("fitted_operation_path").get<std::string>();
    FittedOperation op = detail::read_fitted_container(base / rel);
    if (op.operation_id != rec.at("operation_type").get<std::string>())
      throw SchemaError(rel, "fitted state belongs to operation '" +
                                 op.operation_id + "'");
    fitted.states.emplace(id, std::move(op));
  }
  out.fitted = std::move(fitted);
  return out;
}

// ---------------------------------------------------------------------------
// Atomization

struct Atomized {
  OperationSpec spec;
  AtomizedModelPtr payload;
};

/// Wraps a fitted pipeline as a single model operation. Prediction through
/// the wrapper equals prediction through the inner pipeline; embedding the
/// wrapper in a new pipeline refits the inner structure as one unit.
inline Atomized atomize(const FittedPipeline& fitted,
                        const std::string& operation_id,
                        const Registry& registry) {
  Atomized out;
  out.spec.operation_id = operation_id;
  out.spec.display_name = "Atomized pipeline (" +
                          std::to_string(fitted.structure.nodes.size()) +
                          " nodes)";
  out.spec.kind = OperationKind::model;
  out.spec.tags.insert("atomized");
  out.spec.tasks.insert(fitted.context.task);
  out.spec.atomized_node_count =
      effective_node_count(fitted.structure, registry);

  // The wrapper consumes whatever the inner primaries consume.
  bool accepts_series = false;
  for (const auto& n : fitted.structure.nodes)
    if (n.parent_ids.empty()) {
      const OperationSpec* spec = registry.find(n.operation_id);
      accepts_series |= spec && spec->tags.count("accepts_series") > 0;
    }
  if (accepts_series) out.spec.tags.insert("accepts_series");

  out.payload = std::make_shared<const AtomizedModel>(AtomizedModel{
      fitted.structure, std::make_shared<const FittedPipeline>(fitted)});
  return out;
}

/// Ready-to-predict single-node wrapper around an atomized model (no refit).
inline FittedPipeline atomized_as_fitted(const Atomized& atomized) {
  if (!atomized.payload->fitted)
    throw UnserializableStateError("atomized payload has no fitted state");
  FittedPipeline out;
  Node node;
  node.id = 0;
  node.operation_id = atomized.spec.operation_id;
  out.structure.nodes.push_back(node);
  out.structure.final_node_id = 0;
  out.context = atomized.payload->fitted->context;
  out.raw_feature_width = atomized.payload->fitted->raw_feature_width;
  FittedOperation op;
  op.operation_id = atomized.spec.operation_id;
  op.input_width = atomized.payload->fitted->raw_feature_width;
  op.state = std::make_shared<const AtomizedFittedState>(
      AtomizedFittedState{atomized.payload->fitted});
  out.states.emplace(0, std::move(op));
  return out;
}

/// Incremental adaptation: the previous solution, atomized, joins the
/// registry and the initial population, then composition runs on the new
/// data over the reduced search space.
inline ComposeResult adapt(const FittedPipeline& previous,
                           const Dataset& new_data, ComposerConfig config,
                           Registry& registry,
                           const std::string& atomized_id = "atomized_prior") {
  Atomized atomized = atomize(previous, atomized_id, registry);
  registry.register_atomized(atomized.spec, atomized.payload);

  Pipeline wrapper;
  Node node;
  node.id = 0;
  node.operation_id = atomized_id;
  wrapper.nodes.push_back(node);
  wrapper.final_node_id = 0;
  config.initial_pipelines.push_back(wrapper);

  return compose(config, new_data, registry);
}

// ---------------------------------------------------------------------------
// Whole-pipeline fitted-state bytes (determinism checks, tooling)

inline std::string fitted_pipeline_to_bytes(const FittedPipeline& fp) {
  BinaryWriter w;
  detail::save_fitted_pipeline(w, fp);
  return w.bytes();
}

inline FittedPipeline fitted_pipeline_from_bytes(const std::string& bytes) {
  BinaryReader r(bytes);
  return detail::load_fitted_pipeline(r);
}

}  // namespace pipeforge

#endif  // PIPEFORGE_SERDE_HPP_
