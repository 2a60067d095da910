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

#ifndef PIPEFORGE_BENCHMARK_HPP_
#define PIPEFORGE_BENCHMARK_HPP_

#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "pipeforge/composer.hpp"
#include "pipeforge/fixtures.hpp"
#include "pipeforge/serde.hpp"
#include "pipeforge/tuner.hpp"

namespace pipeforge::bench {

struct BenchmarkOptions {
  int repeats = 3;
  int generations = 15;
  int pop_size = 10;
  double timeout_seconds = 60.0;
  int tune_iterations = 30;
  std::uint64_t seed = 0;
  int jobs = 1;
  double split_ratio = 0.8;
};

/// One aggregated table cell: mean +- std over repeats, or an error note
/// when every repeat failed.
struct Cell {
  double mean = 0;
  double stddev = 0;
  int n = 0;
  std::string error;

  void add(double v) {
    values_.push_back(v);
    n = static_cast<int>(values_.size());
    mean = 0;
    for (double x : values_) mean += x;
    mean /= n;
    double var = 0;
    for (double x : values_) var += (x - mean) * (x - mean);
    stddev = n > 1 ? std::sqrt(var / (n - 1)) : 0.0;
  }

 private:
  std::vector<double> values_;
};

struct Row {
  std::string suite;
  std::string dataset;
  std::string metric;
  Cell composed;   // untuned composed pipeline
  Cell tuned;      // composed + tuned
  Cell baseline;   // best single-model default
  std::string baseline_name;
};

/// Single-operation default pipelines for every model the registry offers
/// for the task (ts models sit behind a default lagged transform).
inline std::vector<std::pair<std::string, Pipeline>> baseline_pipelines(
    const Registry& registry, TaskType task) {
  std::vector<std::pair<std::string, Pipeline>> out;
  for (const auto& spec : registry.filter({}, {}, task)) {
    if (spec.kind != OperationKind::model || spec.is_atomized()) continue;
    Pipeline p;
    Node sink;
    sink.id = 0;
    sink.operation_id = spec.operation_id;
    p.nodes.push_back(sink);
    p.final_node_id = 0;
    if (task == TaskType::ts_forecasting) {
      Node lag;
      lag.id = 1;
      lag.operation_id = "lagged_transform";
      p.nodes.push_back(lag);
      p.find_node(0)->parent_ids.push_back(1);
    }
    out.emplace_back(spec.operation_id, p);
  }
  return out;
}

/// Flat last-value forecast, the reference any composed ts pipeline has to
/// beat.
inline std::vector<double> naive_last_value_forecast(
    const std::vector<double>& train_series, std::size_t horizon) {
  return std::vector<double>(horizon, train_series.back());
}

namespace detail {

inline ComposerConfig compose_config(const BenchmarkOptions& opt, TaskType task,
                                     std::uint64_t seed) {
  ComposerConfig cfg;
  cfg.pop_size = opt.pop_size;
  cfg.offspring_size = opt.pop_size;
  cfg.max_generations = opt.generations;
  cfg.time_limit_seconds = opt.timeout_seconds;
  cfg.objectives = {ObjectiveSpec::quality(default_metric_for(task))};
  cfg.seed = seed;
  cfg.jobs = opt.jobs;
  cfg.max_depth = 4;
  cfg.max_nodes = 8;
  return cfg;
}

inline double metric_on_test(const Pipeline& pipeline, const Dataset& train,
                             const Dataset& test, Metric metric,
                             std::uint64_t seed, const Registry& registry) {
  return fit_and_score(pipeline, train, test, metric, seed, registry).value;
}

}  // namespace detail

/// Benchmarks one tabular dataset: composed vs composed+tuned vs best
/// single-model baseline for every metric of the task. Failures are
/// recorded in the affected cell; the suite keeps going.
inline std::vector<Row> run_tabular_benchmark(const std::string& suite,
                                              const fixtures::NamedDataset& item,
                                              const Registry& registry,
                                              const BenchmarkOptions& opt) {
  const TaskType task = item.data.task;
  const std::vector<Metric> metrics =
      task == TaskType::classification
          ? std::vector<Metric>{Metric::F1, Metric::ROC_AUC}
          : std::vector<Metric>{Metric::MAE, Metric::RMSE};

  std::map<Metric, Row> rows;
  for (Metric m : metrics) {
    rows[m].suite = suite;
    rows[m].dataset = item.name;
    rows[m].metric = metric_to_string(m);
  }

  for (int rep = 0; rep < opt.repeats; ++rep) {
    const std::uint64_t seed = mix64(opt.seed, rep);
    try {
      auto [train, test] = split(item.data, opt.split_ratio, seed);

      // Best single-model default baseline, chosen per metric on the test
      // side (a generous baseline).
      for (Metric m : metrics) {
        double best = 0;
        std::string best_name;
        bool have = false;
        for (const auto& [name, p] : baseline_pipelines(registry, task)) {
          try {
            const double v =
                detail::metric_on_test(p, train, test, m, seed, registry);
            const bool better =
                metric_higher_is_better(m) ? v > best : v < best;
            if (!have || better) {
              best = v;
              best_name = name;
              have = true;
            }
          } catch (const Error&) {
          }
        }
        if (have) {
          rows[m].baseline.add(best);
          rows[m].baseline_name = best_name;
        }
      }

      auto result = compose(detail::compose_config(opt, task, seed), train,
                            registry);
      if (result.front.members.empty()) throw Error("empty front");
      const Pipeline best = result.front.best_by(0)->pipeline;
      for (Metric m : metrics)
        rows[m].composed.add(
            detail::metric_on_test(best, train, test, m, seed, registry));

      TuningConfig tc;
      tc.strategy = TuningStrategy::simultaneous;
      tc.iterations = opt.tune_iterations;
      tc.metric = default_metric_for(task);
      tc.seed = seed;
      auto [tuned, report] = tune(best, train, tc, registry);
      for (Metric m : metrics)
        rows[m].tuned.add(
            detail::metric_on_test(tuned, train, test, m, seed, registry));
    } catch (const Error& e) {
      for (Metric m : metrics)
        if (rows[m].composed.error.empty()) rows[m].composed.error = e.what();
    }
  }

  std::vector<Row> out;
  for (Metric m : metrics) out.push_back(rows[m]);
  return out;
}

/// Benchmarks one series: composed pipeline MAPE vs the naive-last-value
/// baseline, per horizon bucket.
inline std::vector<Row> run_timeseries_benchmark(
    const std::string& suite, const fixtures::NamedDataset& item,
    const Registry& registry, const BenchmarkOptions& opt,
    const std::vector<int>& horizons = {10, 50}) {
  std::vector<Row> out;
  for (int horizon : horizons) {
    Row row;
    row.suite = suite;
    row.dataset = item.name;
    row.metric = "mape_h" + std::to_string(horizon);
    row.baseline_name = "naive_last";

    for (int rep = 0; rep < opt.repeats; ++rep) {
      const std::uint64_t seed = mix64(opt.seed, mix64(horizon, rep));
      try {
        Dataset data = item.data;
        data.forecast_horizon = horizon;
        auto [train, test] = split(data, opt.split_ratio, seed);

        const auto naive =
            naive_last_value_forecast(train.target, test.target.size());
        row.baseline.add(mape(naive, test.target));

        auto result = compose(
            detail::compose_config(opt, TaskType::ts_forecasting, seed), train,
            registry);
        if (result.front.members.empty()) throw Error("empty front");
        const Pipeline best = result.front.best_by(0)->pipeline;
        row.composed.add(detail::metric_on_test(best, train, test,
                                                Metric::MAPE, seed, registry));

        TuningConfig tc;
        tc.iterations = opt.tune_iterations;
        tc.metric = Metric::MAPE;
        tc.seed = seed;
        auto [tuned, report] = tune(best, train, tc, registry);
        row.tuned.add(detail::metric_on_test(tuned, train, test, Metric::MAPE,
                                             seed, registry));
      } catch (const Error& e) {
        if (row.composed.error.empty()) row.composed.error = e.what();
      }
    }
    out.push_back(row);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rendering

inline std::string cell_to_string(const Cell& c) {
  if (c.n == 0) return c.error.empty() ? "-" : "error";
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << c.mean << "+-" << c.stddev;
  return os.str();
}

inline std::string rows_to_csv(const std::vector<Row>& rows) {
  std::ostringstream os;
  os << "suite,dataset,metric,composed_mean,composed_std,tuned_mean,tuned_std,"
        "baseline_mean,baseline_std,baseline_name,error\n";
  os.precision(10);
  for (const auto& r : rows) {
    os << r.suite << ',' << r.dataset << ',' << r.metric << ',';
    os << r.composed.mean << ',' << r.composed.stddev << ',';
    os << r.tuned.mean << ',' << r.tuned.stddev << ',';
    os << r.baseline.mean << ',' << r.baseline.stddev << ',';
    os << r.baseline_name << ',' << r.composed.error << "\n";
  }
  return os.str();
}

inline std::string rows_to_table(const std::vector<Row>& rows) {
  std::ostringstream os;
  os << std::left << std::setw(16) << "dataset" << std::setw(10) << "metric"
     << std::setw(18) << "composed" << std::setw(18) << "tuned"
     << std::setw(18) << "baseline" << "best_single\n";
  for (const auto& r : rows) {
    os << std::left << std::setw(16) << r.dataset << std::setw(10) << r.metric
       << std::setw(18) << cell_to_string(r.composed) << std::setw(18)
       << cell_to_string(r.tuned) << std::setw(18)
       << cell_to_string(r.baseline) << r.baseline_name << "\n";
  }
  return os.str();
}

}  // namespace pipeforge::bench

#endif  // PIPEFORGE_BENCHMARK_HPP_
