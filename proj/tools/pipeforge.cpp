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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pipeforge/benchmark.hpp"
#include "pipeforge/composer.hpp"
#include "pipeforge/fixtures.hpp"
#include "pipeforge/run_manifest.hpp"
#include "pipeforge/sensitivity.hpp"
#include "pipeforge/serde.hpp"
#include "pipeforge/tuner.hpp"

namespace fs = std::filesystem;
using namespace pipeforge;

namespace {

// Exit codes: 0 ok, 1 runtime failure, 2 usage error.
constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct CommonFlags {
  std::string data_path;
  std::string task_name;
  std::string target;
  int horizon = 0;
  std::uint64_t seed = 0;
  std::string registry_path;
  std::string out_dir;
  int jobs = 1;
};

Registry resolve_registry(const std::string& flag_path) {
  if (!flag_path.empty()) return load_registry_file(flag_path);
  if (const char* env = std::getenv("PIPEFORGE_REGISTRY"))
    if (*env) return load_registry_file(env);
  return default_registry();
}

TaskType parse_task(const std::string& name) {
  auto task = task_from_string(name);
  if (!task) throw Error("unknown task '" + name + "'");
  return *task;
}

Metric parse_metric_or_default(const std::string& name, TaskType task) {
  if (name.empty()) return default_metric_for(task);
  auto metric = metric_from_string(name);
  if (!metric) throw Error("unknown metric '" + name + "'");
  return *metric;
}

std::vector<ObjectiveSpec> parse_objectives(const std::string& list,
                                            TaskType task) {
  if (list.empty())
    return {ObjectiveSpec::quality(default_metric_for(task))};
  std::vector<ObjectiveSpec> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "node_count")
      out.push_back(ObjectiveSpec::complexity_nodes());
    else if (item == "depth")
      out.push_back(ObjectiveSpec::complexity_depth());
    else if (auto metric = metric_from_string(item))
      out.push_back(ObjectiveSpec::quality(*metric));
    else
      throw Error("unknown objective '" + item + "'");
  }
  return out;
}

Dataset load_data(const CommonFlags& flags, TaskType task) {
  return load_csv(flags.data_path, task, flags.target, flags.horizon);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
}

void write_telemetry_csv(const fs::path& path,
                         const std::vector<TelemetryRow>& rows) {
  std::ostringstream os;
  os << "generation,best_fitness,median_fitness,diversity,cache_hit_rate,"
        "rss_bytes\n";
  os.precision(17);
  for (const auto& r : rows)
    os << r.generation << ',' << r.best_fitness << ',' << r.median_fitness
       << ',' << r.diversity << ',' << r.cache_hit_rate << ',' << r.rss_bytes
       << "\n";
  write_text(path, os.str());
}

RunManifest start_manifest(const std::string& command,
                           const std::vector<std::string>& argv,
                           const CommonFlags& flags) {
  RunManifest m;
  m.command = command;
  m.arguments = argv;
  m.seed = flags.seed;
  m.started_at = iso_timestamp_now();
  if (!flags.data_path.empty())
    m.input_hashes[flags.data_path] = hash_file_hex(flags.data_path);
  if (!flags.registry_path.empty())
    m.input_hashes[flags.registry_path] = hash_file_hex(flags.registry_path);
  return m;
}

void finish_manifest(RunManifest& m, const fs::path& out_dir) {
  m.finished_at = iso_timestamp_now();
  write_manifest(m, out_dir);
}

nlohmann::ordered_json front_summary(const ComposeResult& result) {
  nlohmann::ordered_json j;
  j["generations_completed"] = result.generations_completed;
  j["budget_exhausted_before_first_evaluation"] =
      result.budget_exhausted_before_first_evaluation;
  j["fits_performed"] = result.fits_performed;
  j["cache_hits"] = result.cache_hits;
  j["cache_misses"] = result.cache_misses;
  nlohmann::ordered_json members = nlohmann::ordered_json::array();
  for (const auto& m : result.front.members) {
    nlohmann::ordered_json e;
    e["fitness"] = m.fitness;
    e["nodes"] = m.pipeline.nodes.size();
    e["signature"] = canonical_signature(m.pipeline);
    members.push_back(e);
  }
  j["front"] = members;
  return j;
}

struct ComposeFlags {
  CommonFlags common;
  int generations = 200;
  int pop_size = 10;
  int offspring_size = 0;  // 0: same as pop
  double timeout = 600.0;
  std::string objectives;
  std::string structure = "composite";
  int max_depth = kDefaultMaxDepth;
  int max_nodes = kDefaultMaxNodes;
  bool no_cache = false;
  bool adaptive = false;
};

ComposerConfig build_compose_config(const ComposeFlags& flags, TaskType task) {
  ComposerConfig cfg;
  cfg.pop_size = flags.pop_size;
  cfg.offspring_size =
      flags.offspring_size > 0 ? flags.offspring_size : flags.pop_size;
  cfg.max_generations = flags.generations;
  cfg.time_limit_seconds = flags.timeout;
  auto structure = structure_class_from_string(flags.structure);
  if (!structure) throw Error("unknown structure class '" + flags.structure + "'");
  cfg.structure_class = *structure;
  cfg.max_depth = flags.max_depth;
  cfg.max_nodes = flags.max_nodes;
  cfg.objectives = parse_objectives(flags.objectives, task);
  cfg.seed = flags.common.seed;
  cfg.cache_enabled = !flags.no_cache;
  cfg.jobs = flags.common.jobs;
  if (flags.adaptive)
    cfg.adaptive_scheme = ComposerConfig::AdaptiveScheme::rate_adaptation;
  return cfg;
}

void export_compose_artifacts(const ComposeResult& result, const Dataset& data,
                              const Registry& registry, std::uint64_t seed,
                              const fs::path& out, RunManifest& manifest) {
  fs::create_directories(out);
  write_telemetry_csv(out / "telemetry.csv", result.telemetry);
  manifest.outputs.push_back((out / "telemetry.csv").string());

  write_text(out / "result.json", front_summary(result).dump(4) + "\n");
  manifest.outputs.push_back((out / "result.json").string());

  if (result.front.members.empty()) return;
  const Individual* best = result.front.best_by(0);
  const auto fitted = fit(best->pipeline, data, seed, registry);
  export_pipeline(best->pipeline, registry, out / "pipeline", &fitted);
  manifest.outputs.push_back((out / "pipeline" / "pipeline.json").string());

  if (result.front.members.size() > 1) {
    for (std::size_t i = 0; i < result.front.members.size(); ++i) {
      const auto dir = out / "front" / std::to_string(i);
      export_pipeline(result.front.members[i].pipeline, registry, dir);
      manifest.outputs.push_back((dir / "pipeline.json").string());
    }
  }
}

int cmd_compose(const ComposeFlags& flags,
                const std::vector<std::string>& argv) {
  const TaskType task = parse_task(flags.common.task_name);
  Registry registry = resolve_registry(flags.common.registry_path);
  const Dataset data = load_data(flags.common, task);
  ComposerConfig cfg = build_compose_config(flags, task);

  RunManifest manifest = start_manifest("compose", argv, flags.common);
  auto result = compose(cfg, data, registry);

  const fs::path out(flags.common.out_dir);
  export_compose_artifacts(result, data, registry, cfg.seed, out, manifest);
  finish_manifest(manifest, out);

  const Individual* best = result.front.best_by(0);
  std::cout << "compose: " << result.generations_completed
            << " generations, front size " << result.front.members.size();
  if (best) std::cout << ", best fitness " << best->fitness[0];
  std::cout << "\n";
  return kExitOk;
}

struct TuneFlags {
  CommonFlags common;
  std::string pipeline_dir;
  std::string strategy = "simultaneous";
  int iterations = 100;
  std::string metric;
};

int cmd_tune(const TuneFlags& flags, const std::vector<std::string>& argv) {
  const TaskType task = parse_task(flags.common.task_name);
  Registry registry = resolve_registry(flags.common.registry_path);
  const Dataset data = load_data(flags.common, task);
  auto imported = import_pipeline(flags.pipeline_dir, registry);

  TuningConfig cfg;
  auto strategy = tuning_strategy_from_string(flags.strategy);
  if (!strategy) throw Error("unknown strategy '" + flags.strategy + "'");
  cfg.strategy = *strategy;
  cfg.iterations = flags.iterations;
  cfg.metric = parse_metric_or_default(flags.metric, task);
  cfg.seed = flags.common.seed;

  RunManifest manifest = start_manifest("tune", argv, flags.common);
  manifest.input_hashes[flags.pipeline_dir + "/pipeline.json"] =
      hash_file_hex(fs::path(flags.pipeline_dir) / "pipeline.json");

  auto [tuned, report] = tune(imported.pipeline, data, cfg, registry);

  const fs::path out(flags.common.out_dir);
  fs::create_directories(out);
  const auto fitted = fit(tuned, data, cfg.seed, registry);
  export_pipeline(tuned, registry, out / "pipeline", &fitted);
  manifest.outputs.push_back((out / "pipeline" / "pipeline.json").string());

  nlohmann::ordered_json j;
  j["strategy"] = tuning_strategy_to_string(report.strategy);
  j["iterations"] = report.iterations;
  j["tunable"] = report.tunable;
  j["improved"] = report.improved;
  j["metric"] = metric_to_string(cfg.metric);
  j["metric_before"] = report.metric_before;
  j["metric_after"] = report.metric_after;
  j["score_before"] = report.score_before;
  j["score_after"] = report.score_after;
  j["full_pipeline_evaluations"] = report.full_pipeline_evaluations;
  j["proposals_evaluated"] = report.proposals_evaluated;
  write_text(out / "tuning_report.json", j.dump(4) + "\n");
  manifest.outputs.push_back((out / "tuning_report.json").string());
  finish_manifest(manifest, out);

  std::cout << "tune: " << metric_to_string(cfg.metric) << " "
            << report.metric_before << " -> " << report.metric_after << "\n";
  return kExitOk;
}

struct AnalyzeFlags {
  CommonFlags common;
  std::string pipeline_dir;
  std::string approaches = "delete,replace";
  int iterations = 1;
  std::string metric;
};

int cmd_analyze(const AnalyzeFlags& flags,
                const std::vector<std::string>& argv) {
  const TaskType task = parse_task(flags.common.task_name);
  Registry registry = resolve_registry(flags.common.registry_path);
  const Dataset data = load_data(flags.common, task);
  auto imported = import_pipeline(flags.pipeline_dir, registry);

  SAConfig cfg;
  cfg.approaches.clear();
  std::stringstream ss(flags.approaches);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "delete" || item == "deletion")
      cfg.approaches.insert(SAApproach::deletion);
    else if (item == "replace" || item == "replacement")
      cfg.approaches.insert(SAApproach::replacement);
    else
      throw Error("unknown approach '" + item + "'");
  }
  cfg.iterations = flags.iterations;
  cfg.metric = parse_metric_or_default(flags.metric, task);
  cfg.seed = flags.common.seed;

  RunManifest manifest = start_manifest("analyze", argv, flags.common);
  auto report = analyze(imported.pipeline, data, cfg, registry);

  nlohmann::ordered_json j;
  j["metric"] = metric_to_string(report.metric);
  j["iterations"] = report.iterations;
  j["sustainability_index"] = report.sustainability_index;
  j["n_total"] = report.n_total;
  j["n_del"] = report.n_del;
  j["n_repl"] = report.n_repl;
  nlohmann::ordered_json per_node = nlohmann::ordered_json::object();
  for (const auto& [id, nr] : report.per_node) {
    nlohmann::ordered_json e;
    e["deletable"] = nr.deletable;
    if (!std::isnan(nr.importance_delete))
      e["importance_delete"] = nr.importance_delete;
    if (!std::isnan(nr.importance_replace))
      e["importance_replace"] = nr.importance_replace;
    e["delete_improves"] = nr.delete_improves;
    e["replace_improves"] = nr.replace_improves;
    if (!nr.best_replacement.empty())
      e["best_replacement"] = nr.best_replacement;
    per_node[std::to_string(id)] = e;
  }
  j["per_node"] = per_node;

  const fs::path out(flags.common.out_dir);
  fs::create_directories(out);
  write_text(out / "sa_report.json", j.dump(4) + "\n");
  write_text(out / "importance.dot",
             sa_report_to_dot(imported.pipeline, report));
  manifest.outputs.push_back((out / "sa_report.json").string());
  manifest.outputs.push_back((out / "importance.dot").string());
  finish_manifest(manifest, out);

  std::cout << "analyze: sustainability " << report.sustainability_index
            << " (n_del " << report.n_del << ", n_repl " << report.n_repl
            << " of " << report.n_total << ")\n";
  return kExitOk;
}

struct PredictFlags {
  CommonFlags common;
  std::string pipeline_dir;
};

int cmd_predict(const PredictFlags& flags,
                const std::vector<std::string>& argv) {
  Registry registry = resolve_registry(flags.common.registry_path);
  auto imported = import_pipeline(flags.pipeline_dir, registry);
  if (!imported.fitted)
    throw Error("pipeline at '" + flags.pipeline_dir +
                "' has no fitted states; run compose or tune first");

  const TaskType task = flags.common.task_name.empty()
                            ? imported.fitted->context.task
                            : parse_task(flags.common.task_name);
  const Dataset data = load_data(flags.common, task);

  RunManifest manifest = start_manifest("predict", argv, flags.common);
  const auto table = predict(*imported.fitted, data);

  std::ostringstream os;
  os.precision(17);
  os << "row_id,prediction";
  for (int c = 0; c < table.num_classes; ++c) os << ",p" << c;
  os << "\n";
  for (std::size_t r = 0; r < table.values.size(); ++r) {
    os << table.row_ids[r] << ',' << table.values[r];
    for (int c = 0; c < table.num_classes; ++c)
      os << ',' << table.probabilities.at(r, c);
    os << "\n";
  }

  const fs::path out(flags.common.out_dir);
  fs::create_directories(out);
  write_text(out / "predictions.csv", os.str());
  manifest.outputs.push_back((out / "predictions.csv").string());
  finish_manifest(manifest, out);

  std::cout << "predict: " << table.values.size() << " rows\n";
  return kExitOk;
}

struct AdaptFlags {
  ComposeFlags compose;
  std::string pipeline_dir;
};

int cmd_adapt(const AdaptFlags& flags, const std::vector<std::string>& argv) {
  const TaskType task = parse_task(flags.compose.common.task_name);
  Registry registry = resolve_registry(flags.compose.common.registry_path);
  const Dataset data = load_data(flags.compose.common, task);
  auto imported = import_pipeline(flags.pipeline_dir, registry);
  if (!imported.fitted)
    throw Error("adapt needs a fitted pipeline export");

  ComposerConfig cfg = build_compose_config(flags.compose, task);
  RunManifest manifest = start_manifest("adapt", argv, flags.compose.common);

  auto result = adapt(*imported.fitted, data, cfg, registry);

  const fs::path out(flags.compose.common.out_dir);
  export_compose_artifacts(result, data, registry, cfg.seed, out, manifest);
  finish_manifest(manifest, out);

  std::cout << "adapt: front size " << result.front.members.size() << "\n";
  return kExitOk;
}

struct BenchmarkFlags {
  std::string suite = "all";
  int repeats = 3;
  std::uint64_t seed = 0;
  int generations = 15;
  int pop_size = 10;
  double timeout = 60.0;
  int tune_iterations = 30;
  int jobs = 1;
  std::string registry_path;
  std::string out_dir;
};

int cmd_benchmark(const BenchmarkFlags& flags,
                  const std::vector<std::string>& argv) {
  Registry registry = resolve_registry(flags.registry_path);
  bench::BenchmarkOptions opt;
  opt.repeats = flags.repeats;
  opt.generations = flags.generations;
  opt.pop_size = flags.pop_size;
  opt.timeout_seconds = flags.timeout;
  opt.tune_iterations = flags.tune_iterations;
  opt.seed = flags.seed;
  opt.jobs = flags.jobs;

  std::vector<bench::Row> rows;
  const bool all = flags.suite == "all";
  if (all || flags.suite == "regression")
    for (const auto& item : fixtures::regression_suite())
      for (auto& r :
           bench::run_tabular_benchmark("regression", item, registry, opt))
        rows.push_back(std::move(r));
  if (all || flags.suite == "classification")
    for (const auto& item : fixtures::classification_suite())
      for (auto& r :
           bench::run_tabular_benchmark("classification", item, registry, opt))
        rows.push_back(std::move(r));
  if (all || flags.suite == "timeseries")
    for (const auto& item : fixtures::timeseries_suite())
      for (auto& r :
           bench::run_timeseries_benchmark("timeseries", item, registry, opt))
        rows.push_back(std::move(r));
  if (rows.empty()) throw Error("unknown suite '" + flags.suite + "'");

  CommonFlags pseudo;
  pseudo.seed = flags.seed;
  pseudo.registry_path = flags.registry_path;
  RunManifest manifest = start_manifest("benchmark", argv, pseudo);

  const fs::path out(flags.out_dir);
  fs::create_directories(out);
  write_text(out / "benchmark.csv", bench::rows_to_csv(rows));
  write_text(out / "benchmark.txt", bench::rows_to_table(rows));
  manifest.outputs.push_back((out / "benchmark.csv").string());
  manifest.outputs.push_back((out / "benchmark.txt").string());
  finish_manifest(manifest, out);

  std::cout << bench::rows_to_table(rows);
  return kExitOk;
}

void add_common_flags(CLI::App* cmd, CommonFlags& flags, bool data_required) {
  auto* data = cmd->add_option("--data", flags.data_path, "input CSV path");
  auto* target =
      cmd->add_option("--target", flags.target, "target column name");
  if (data_required) {
    data->required();
    target->required();
  }
  cmd->add_option("--horizon", flags.horizon, "forecast horizon (ts only)");
  cmd->add_option("--seed", flags.seed, "random seed");
  cmd->add_option("--registry", flags.registry_path,
                  "operation registry JSON (overrides PIPEFORGE_REGISTRY)");
  cmd->add_option("--jobs", flags.jobs, "parallel evaluation workers");
  cmd->add_option("--out", flags.out_dir, "output directory")->required();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pipeforge: evolutionary design of composite ML pipelines"};
  app.require_subcommand(1);

  std::vector<std::string> raw_args(argv + 1, argv + argc);

  ComposeFlags compose_flags;
  auto* compose_cmd =
      app.add_subcommand("compose", "search for a pipeline structure");
  add_common_flags(compose_cmd, compose_flags.common, true);
  compose_cmd->add_option("--task", compose_flags.common.task_name,
                          "classification | regression | ts")
      ->required();
  compose_cmd->add_option("--generations", compose_flags.generations);
  compose_cmd->add_option("--pop-size", compose_flags.pop_size);
  compose_cmd->add_option("--offspring-size", compose_flags.offspring_size);
  compose_cmd->add_option("--timeout", compose_flags.timeout,
                          "time budget in seconds");
  compose_cmd->add_option("--objectives", compose_flags.objectives,
                          "comma list: metric names, node_count, depth");
  compose_cmd->add_option("--structure", compose_flags.structure,
                          "linear | ensemble | composite");
  compose_cmd->add_option("--max-depth", compose_flags.max_depth);
  compose_cmd->add_option("--max-nodes", compose_flags.max_nodes);
  compose_cmd->add_flag("--no-cache", compose_flags.no_cache,
                        "disable the fitness cache");
  compose_cmd->add_flag("--adaptive", compose_flags.adaptive,
                        "adapt operator rates during evolution");

  TuneFlags tune_flags;
  auto* tune_cmd = app.add_subcommand("tune", "tune node hyperparameters");
  add_common_flags(tune_cmd, tune_flags.common, true);
  tune_cmd->add_option("--task", tune_flags.common.task_name)->required();
  tune_cmd->add_option("--pipeline", tune_flags.pipeline_dir,
                       "pipeline export directory")
      ->required();
  tune_cmd->add_option("--strategy", tune_flags.strategy,
                       "serial_isolated | sequential | simultaneous");
  tune_cmd->add_option("--iterations", tune_flags.iterations);
  tune_cmd->add_option("--metric", tune_flags.metric);

  AnalyzeFlags analyze_flags;
  auto* analyze_cmd =
      app.add_subcommand("analyze", "structural sensitivity analysis");
  add_common_flags(analyze_cmd, analyze_flags.common, true);
  analyze_cmd->add_option("--task", analyze_flags.common.task_name)->required();
  analyze_cmd->add_option("--pipeline", analyze_flags.pipeline_dir)->required();
  analyze_cmd->add_option("--approaches", analyze_flags.approaches,
                          "comma list of delete,replace");
  analyze_cmd->add_option("--iterations", analyze_flags.iterations,
                          "SA iterations N");
  analyze_cmd->add_option("--metric", analyze_flags.metric);

  PredictFlags predict_flags;
  auto* predict_cmd =
      app.add_subcommand("predict", "predict with an exported pipeline");
  add_common_flags(predict_cmd, predict_flags.common, true);
  predict_cmd->add_option("--task", predict_flags.common.task_name,
                          "defaults to the fitted pipeline's task");
  predict_cmd->add_option("--pipeline", predict_flags.pipeline_dir)->required();

  AdaptFlags adapt_flags;
  auto* adapt_cmd = app.add_subcommand(
      "adapt", "re-compose on new data from an atomized previous solution");
  add_common_flags(adapt_cmd, adapt_flags.compose.common, true);
  adapt_cmd->add_option("--task", adapt_flags.compose.common.task_name)
      ->required();
  adapt_cmd->add_option("--pipeline", adapt_flags.pipeline_dir)->required();
  adapt_cmd->add_option("--generations", adapt_flags.compose.generations);
  adapt_cmd->add_option("--pop-size", adapt_flags.compose.pop_size);
  adapt_cmd->add_option("--timeout", adapt_flags.compose.timeout);
  adapt_cmd->add_option("--objectives", adapt_flags.compose.objectives);
  adapt_cmd->add_option("--structure", adapt_flags.compose.structure);

  BenchmarkFlags bench_flags;
  auto* bench_cmd =
      app.add_subcommand("benchmark", "run the bundled fixture suites");
  bench_cmd->add_option("--suite", bench_flags.suite,
                        "regression | classification | timeseries | all");
  bench_cmd->add_option("--repeats", bench_flags.repeats);
  bench_cmd->add_option("--seed", bench_flags.seed);
  bench_cmd->add_option("--generations", bench_flags.generations);
  bench_cmd->add_option("--pop-size", bench_flags.pop_size);
  bench_cmd->add_option("--timeout", bench_flags.timeout,
                        "per-compose time budget in seconds");
  bench_cmd->add_option("--tune-iterations", bench_flags.tune_iterations);
  bench_cmd->add_option("--jobs", bench_flags.jobs);
  bench_cmd->add_option("--registry", bench_flags.registry_path);
  bench_cmd->add_option("--out", bench_flags.out_dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (compose_cmd->parsed()) return cmd_compose(compose_flags, raw_args);
    if (tune_cmd->parsed()) return cmd_tune(tune_flags, raw_args);
    if (analyze_cmd->parsed()) return cmd_analyze(analyze_flags, raw_args);
    if (predict_cmd->parsed()) return cmd_predict(predict_flags, raw_args);
    if (adapt_cmd->parsed()) return cmd_adapt(adapt_flags, raw_args);
    if (bench_cmd->parsed()) return cmd_benchmark(bench_flags, raw_args);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
