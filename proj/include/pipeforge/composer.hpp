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

#ifndef PIPEFORGE_COMPOSER_HPP_
#define PIPEFORGE_COMPOSER_HPP_

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#ifdef __linux__
#include <unistd.h>
#include <fstream>
#endif

#include "pipeforge/execution.hpp"
#include "pipeforge/metrics.hpp"
#include "pipeforge/pipeline.hpp"

namespace pipeforge {

// ---------------------------------------------------------------------------
// Configuration

struct ObjectiveSpec {
  enum class Kind { quality, complexity };
  enum class ComplexityKind { node_count, depth };

  Kind kind = Kind::quality;
  Metric metric = Metric::MAE;                              // quality only
  ComplexityKind complexity = ComplexityKind::node_count;   // complexity only

  static ObjectiveSpec quality(Metric m) {
    ObjectiveSpec o;
    o.kind = Kind::quality;
    o.metric = m;
    return o;
  }
  static ObjectiveSpec complexity_nodes() {
    ObjectiveSpec o;
    o.kind = Kind::complexity;
    o.complexity = ComplexityKind::node_count;
    return o;
  }
  static ObjectiveSpec complexity_depth() {
    ObjectiveSpec o;
    o.kind = Kind::complexity;
    o.complexity = ComplexityKind::depth;
    return o;
  }
};

struct ComposerConfig {
  int pop_size = 10;
  int offspring_size = 10;
  int max_generations = 20;
  double time_limit_seconds = 600.0;
  double crossover_rate = 0.8;
  double mutation_rate = 0.8;
  enum class Selection { tournament, spea2_like };
  Selection selection_type = Selection::tournament;
  StructureClass structure_class = StructureClass::composite;
  int max_depth = kDefaultMaxDepth;
  int max_nodes = kDefaultMaxNodes;
  /// objectives[0] is the primary quality objective used for telemetry and
  /// single-objective selection. All fitness values are higher-is-better.
  std::vector<ObjectiveSpec> objectives;
  std::uint64_t seed = 0;
  enum class AdaptiveScheme { none, rate_adaptation };
  AdaptiveScheme adaptive_scheme = AdaptiveScheme::none;
  std::vector<Pipeline> initial_pipelines;
  bool cache_enabled = true;
  bool regularization_enabled = true;
  int jobs = 1;
  double fit_fraction = 0.75;  // internal fit/score split of the train data

  void check() const {
    if (pop_size < 2) throw Error("pop_size must be >= 2");
    bool has_quality = false;
    for (const auto& o : objectives)
      has_quality |= o.kind == ObjectiveSpec::Kind::quality;
    if (objectives.empty() || !has_quality)
      throw Error("at least one quality objective is required");
  }
};

// ---------------------------------------------------------------------------
// Individuals, dominance, Pareto front

struct Individual {
  Pipeline pipeline;
  std::vector<double> fitness;  // one per objective, higher is better
  bool evaluated = false;
  std::string signature;  // canonical; filled lazily

  // Reproduction provenance, feeding the adaptive-rate scheme.
  double parent_primary = 0.0;
  bool via_crossover = false;
  bool via_mutation = false;

  const std::string& sig() {
    if (signature.empty()) signature = canonical_signature(pipeline);
    return signature;
  }
};

/// a dominates b: >= on every objective, > on at least one.
inline bool dominates(const std::vector<double>& a,
                      const std::vector<double>& b) {
  bool strictly = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return false;
    if (a[i] > b[i]) strictly = true;
  }
  return strictly;
}

/// Archive of mutually non-dominated individuals. With one objective it
/// holds exactly the incumbent best.
struct ParetoFront {
  std::vector<Individual> members;

  void update(const Individual& cand) {
    if (!cand.evaluated) return;
    for (const auto& m : members)
      if (dominates(m.fitness, cand.fitness) || m.fitness == cand.fitness)
        return;
    members.erase(std::remove_if(members.begin(), members.end(),
                                 [&](const Individual& m) {
                                   return dominates(cand.fitness, m.fitness);
                                 }),
                  members.end());
    members.push_back(cand);
  }

  const Individual* best_by(std::size_t objective) const {
    const Individual* best = nullptr;
    for (const auto& m : members)
      if (!best || m.fitness[objective] > best->fitness[objective]) best = &m;
    return best;
  }
};

/// Memo of evaluated pipeline signatures. Structurally identical pipelines
/// (up to node-id relabeling) share one entry through the canonical
/// signature. Thread safe.
class FitnessCache {
 public:
  std::optional<std::vector<double>> lookup(const std::string& sig) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = map_.find(sig);
    if (it == map_.end()) {
      ++misses_;
      return std::nullopt;
    }
    ++hits_;
    return it->second;
  }

  void insert(const std::string& sig, const std::vector<double>& fitness) {
    std::lock_guard<std::mutex> lock(mu_);
    map_[sig] = fitness;  // last writer wins; values agree by construction
  }

  std::uint64_t hits() const { return hits_; }
  std::uint64_t misses() const { return misses_; }
  std::size_t size() const { return map_.size(); }

 private:
  std::mutex mu_;
  std::unordered_map<std::string, std::vector<double>> map_;
  std::atomic<std::uint64_t> hits_{0};
  std::atomic<std::uint64_t> misses_{0};
};

struct TelemetryRow {
  int generation = 0;
  double best_fitness = 0;    // primary quality objective, archive best
  double median_fitness = 0;  // population median on the primary objective
  int diversity = 0;          // distinct signatures in the population
  double cache_hit_rate = 0;
  long long rss_bytes = 0;
};

/// Resident set size of this process; 0 where unsupported.
inline long long current_rss_bytes() {
#ifdef __linux__
  std::ifstream statm("/proc/self/statm");
  long long pages = 0, resident = 0;
  if (statm >> pages >> resident)
    return resident * static_cast<long long>(sysconf(_SC_PAGESIZE));
#endif
  return 0;
}

struct ComposeResult {
  ParetoFront front;
  std::vector<TelemetryRow> telemetry;
  int generations_completed = 0;
  bool budget_exhausted_before_first_evaluation = false;
  std::uint64_t fits_performed = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t cache_misses = 0;
  std::uint64_t reproduction_stalls = 0;
};

/// Node count charged to complexity objectives; atomized entries cost their
/// full inner node count so nesting cannot hide structure.
inline int effective_node_count(const Pipeline& p, const Registry& registry) {
  int total = 0;
  for (const auto& n : p.nodes) {
    const OperationSpec* spec = registry.find(n.operation_id);
    total += spec && spec->is_atomized() ? spec->atomized_node_count : 1;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Random pipeline growth

namespace detail {

inline std::vector<OperationSpec> growth_candidates(const Registry& registry,
                                                    TaskType task,
                                                    bool models_only) {
  std::vector<OperationSpec> out;
  for (const auto& spec : registry.filter({}, {}, task)) {
    if (spec.tags.count("accepts_series")) continue;  // placed explicitly
    if (models_only && spec.kind != OperationKind::model) continue;
    if (spec.kind == OperationKind::data_flow) continue;
    out.push_back(spec);
  }
  return out;
}

}  // namespace detail

/// Random valid pipeline for the task: a sink model grown backward with
/// data operations and models; ts pipelines get a lagged (and sometimes
/// smoothed) series head on every branch.
inline Pipeline grow_random_pipeline(Rng& rng, const Registry& registry,
                                     TaskType task,
                                     StructureClass structure_class,
                                     int max_depth, int max_nodes) {
  const auto models = detail::growth_candidates(registry, task, true);
  const auto any_op = detail::growth_candidates(registry, task, false);
  if (models.empty())
    throw Error("registry has no model for task " + task_to_string(task));

  const bool ts = task == TaskType::ts_forecasting;
  // The series head consumes one level (two with smoothing).
  const int head_depth = ts ? 1 : 0;
  const int table_budget = std::max(1, max_depth - head_depth);

  for (int attempt = 0; attempt < 64; ++attempt) {
    Pipeline p;
    int next_id = 0;
    const int depth_target = static_cast<int>(rng.next_int(1, table_budget));

    Node sink;
    sink.id = next_id++;
    sink.operation_id = models[rng.next_index(models.size())].operation_id;
    p.nodes.push_back(sink);
    p.final_node_id = sink.id;

    // Grow table-space levels above the sink.
    std::vector<int> frontier{sink.id};
    for (int level = 1; level < depth_target; ++level) {
      std::vector<int> next_frontier;
      for (int id : frontier) {
        int branches = 1;
        if (structure_class == StructureClass::composite && level == 1 &&
            rng.next_bool(0.35))
          branches = 2;
        if (structure_class == StructureClass::ensemble && level == 1)
          branches = static_cast<int>(rng.next_int(2, 3));
        for (int b = 0; b < branches; ++b) {
          if (static_cast<int>(p.nodes.size()) >= max_nodes) break;
          Node parent;
          parent.id = next_id++;
          parent.operation_id =
              any_op[rng.next_index(any_op.size())].operation_id;
          p.nodes.push_back(parent);
          p.find_node(id)->parent_ids.push_back(parent.id);
          next_frontier.push_back(parent.id);
        }
      }
      frontier = std::move(next_frontier);
      if (frontier.empty()) break;
    }

    if (ts) {
      // Every current root gets a lagged head; one smoothing stage may
      // precede it when depth allows.
      std::vector<int> roots;
      for (const auto& n : p.nodes)
        if (n.parent_ids.empty()) roots.push_back(n.id);
      for (int id : roots) {
        if (static_cast<int>(p.nodes.size()) >= max_nodes) break;
        Node lag;
        lag.id = next_id++;
        lag.operation_id = "lagged_transform";
        if (rng.next_bool(0.5))
          lag.hyperparams["window"] = rng.next_int(2, 20);
        p.nodes.push_back(lag);
        p.find_node(id)->parent_ids.push_back(lag.id);
        if (compute_depth(p) < max_depth && rng.next_bool(0.3) &&
            static_cast<int>(p.nodes.size()) < max_nodes &&
            registry.find("moving_average_smoothing")) {
          Node smooth;
          smooth.id = next_id++;
          smooth.operation_id = "moving_average_smoothing";
          p.nodes.push_back(smooth);
          p.find_node(lag.id)->parent_ids.push_back(smooth.id);
        }
      }
    }

    if (validate(p, structure_class, max_depth, registry, task, max_nodes).ok)
      return p;
  }

  // Minimal always-valid fallback.
  Pipeline p;
  Node sink;
  sink.id = 0;
  sink.operation_id = models[0].operation_id;
  p.nodes.push_back(sink);
  p.final_node_id = 0;
  if (ts) {
    Node lag;
    lag.id = 1;
    lag.operation_id = "lagged_transform";
    p.nodes.push_back(lag);
    p.find_node(0)->parent_ids.push_back(1);
  }
  return p;
}

// ---------------------------------------------------------------------------
// Evolutionary composer

class EvolutionaryComposer {
 public:
  EvolutionaryComposer(ComposerConfig config, const Dataset& train,
                       const Registry& registry)
      : config_(std::move(config)),
        registry_(registry),
        rng_(config_.seed),
        train_rows_(train.rows()) {
    config_.check();
    if (train.rows() == 0) throw TooFewRowsError("training data is empty");
    make_internal_folds(train);
  }

  // -- Main evolutionary loop -----------------------------------------------

  ComposeResult compose() {
    start_ = Clock::now();
    ComposeResult result;

    auto pop = init_population();
    evaluate_population(pop);
    for (auto& ind : pop) front_.update(ind);
    if (out_of_time() && !everything_evaluated(pop)) {
      result.budget_exhausted_before_first_evaluation = true;
      finish(result);
      return result;
    }

    double crossover_rate = config_.crossover_rate;
    double mutation_rate = config_.mutation_rate;

    for (int gen = 1; gen <= config_.max_generations && !out_of_time(); ++gen) {
      if (config_.adaptive_scheme ==
          ComposerConfig::AdaptiveScheme::rate_adaptation)
        std::tie(crossover_rate, mutation_rate) = update_adaptive_rates(
            operator_history_, crossover_rate, mutation_rate);

      if (config_.regularization_enabled) regularize(pop);
      for (auto& ind : pop) front_.update(ind);

      auto parents = select_parents(pop, config_.offspring_size);
      auto offspring =
          reproduce(parents, crossover_rate, mutation_rate);
      evaluate_population(offspring);
      record_operator_outcomes(parents, offspring);
      for (auto& ind : offspring) front_.update(ind);

      pop = select_survivors(std::move(pop), std::move(offspring));
      result.telemetry.push_back(snapshot(gen, pop));
      result.generations_completed = gen;
    }

    finish(result);
    return result;
  }

  // -- Spec operations, public for tests ------------------------------------

  std::vector<Individual> init_population() {
    std::vector<Individual> pop;
    for (std::size_t i = 0; i < config_.initial_pipelines.size(); ++i) {
      const auto& p = config_.initial_pipelines[i];
      auto v = validate(p, config_.structure_class, config_.max_depth,
                        registry_, task(), config_.max_nodes);
      if (!v.ok) throw InitialAssumptionInvalidError(i, v.rule);
      if (static_cast<int>(pop.size()) < config_.pop_size)
        pop.push_back({p, {}, false, ""});
    }
    while (static_cast<int>(pop.size()) < config_.pop_size)
      pop.push_back({grow_random_pipeline(rng_, registry_, task(),
                                          config_.structure_class,
                                          config_.max_depth, config_.max_nodes),
                     {},
                     false,
                     ""});
    return pop;
  }

  /// Fills fitness vectors; cache hits perform zero fits. Individuals whose
  /// fit fails get the worst-possible quality (0) with complexity intact.
  void evaluate_population(std::vector<Individual>& pop) {
    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < pop.size(); ++i)
      if (!pop[i].evaluated) todo.push_back(i);

    const int jobs = std::max(1, config_.jobs);
    if (jobs == 1) {
      // The first pending individual always gets evaluated so a degenerate
      // budget still yields a best-effort front.
      for (std::size_t k = 0; k < todo.size(); ++k) {
        if (k > 0 && out_of_time()) return;
        evaluate_individual(pop[todo[k]]);
      }
      return;
    }

    std::atomic<std::size_t> cursor{0};
    auto worker = [&] {
      for (;;) {
        const std::size_t slot = cursor.fetch_add(1);
        if (slot >= todo.size() || (slot > 0 && out_of_time())) return;
        evaluate_individual(pop[todo[slot]]);
      }
    };
    std::vector<std::thread> threads;
    for (int t = 0; t < jobs; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  /// Structural simplification: greedily drop nodes whose deletion keeps
  /// the pipeline valid and does not reduce fit-fold fitness, then adopt
  /// the simplified pipeline only when its official (score-fold) quality is
  /// not worse. Runs to a fixed point, so it is idempotent.
  void regularize(std::vector<Individual>& pop) {
    for (auto& ind : pop) {
      if (!ind.evaluated) continue;
      Pipeline current = ind.pipeline;
      bool changed = false;
      bool progress = true;
      while (progress) {
        progress = false;
        for (int id : canonical_order(current)) {
          if (id == current.final_node_id) continue;
          Pipeline pruned;
          try {
            pruned = with_node_removed(current, id);
          } catch (const NodeNotModifiableError&) {
            continue;
          }
          if (!validate(pruned, config_.structure_class, config_.max_depth,
                        registry_, task(), config_.max_nodes)
                   .ok)
            continue;
          const double before = fit_fold_quality(current);
          const double after = fit_fold_quality(pruned);
          if (after >= before) {
            current = std::move(pruned);
            changed = true;
            progress = true;
            break;  // restart the sweep over the new structure
          }
        }
      }
      if (!changed) continue;

      Individual candidate{std::move(current), {}, false, ""};
      evaluate_individual(candidate);
      if (!candidate.evaluated) continue;
      bool not_worse = true;
      for (std::size_t i = 0; i < config_.objectives.size(); ++i)
        if (config_.objectives[i].kind == ObjectiveSpec::Kind::quality &&
            candidate.fitness[i] < ind.fitness[i])
          not_worse = false;
      if (not_worse) ind = std::move(candidate);
    }
  }

  /// Crossover + mutation inside a validation retry loop. After
  /// the retry bound a stalled pair falls back to a parent copy with one
  /// forced exploitation mutation.
  std::vector<Individual> reproduce(const std::vector<Individual>& parents,
                                    double crossover_rate,
                                    double mutation_rate) {
    constexpr int kRetryBound = 20;
    std::vector<Individual> offspring;
    if (parents.empty()) return offspring;

    const std::size_t want = config_.offspring_size;
    std::size_t pair_index = 0;
    while (offspring.size() < want) {
      const Individual& p1 = parents[(2 * pair_index) % parents.size()];
      const Individual& p2 = parents[(2 * pair_index + 1) % parents.size()];
      ++pair_index;

      bool accepted = false;
      for (int attempt = 0; attempt < kRetryBound && !accepted; ++attempt) {
        Pipeline c1 = p1.pipeline, c2 = p2.pipeline;
        bool used_crossover = false, used_mutation = false;
        if (rng_.next_bool(crossover_rate)) {
          used_crossover = true;
          if (rng_.next_bool())
            std::tie(c1, c2) = crossover_subtree_exchange(p1.pipeline, p2.pipeline);
          else
            std::tie(c1, c2) = crossover_one_point(p1.pipeline, p2.pipeline);
        }
        if (rng_.next_bool(mutation_rate)) {
          used_mutation = true;
          c1 = mutate(c1);
        }
        if (rng_.next_bool(mutation_rate)) {
          used_mutation = true;
          c2 = mutate(c2);
        }
        if (is_valid(c1) && is_valid(c2)) {
          offspring.push_back({std::move(c1), {}, false, ""});
          offspring.back().parent_primary = primary_fitness(p1);
          offspring.back().via_crossover = used_crossover;
          offspring.back().via_mutation = used_mutation;
          if (offspring.size() < want) {
            offspring.push_back({std::move(c2), {}, false, ""});
            offspring.back().parent_primary = primary_fitness(p2);
            offspring.back().via_crossover = used_crossover;
            offspring.back().via_mutation = used_mutation;
          }
          accepted = true;
        }
      }
      if (!accepted) {
        ++stalls_;
        Pipeline fallback = mutate_change_hyperparams(p1.pipeline);
        if (!is_valid(fallback)) fallback = p1.pipeline;
        offspring.push_back({std::move(fallback), {}, false, ""});
        offspring.back().parent_primary = primary_fitness(p1);
        offspring.back().via_mutation = true;
      }
    }
    offspring.resize(want);
    return offspring;
  }

  struct OperatorOutcome {
    bool via_crossover = false;
    bool via_mutation = false;
    bool improved = false;
  };

  /// Success-ratio rate adaptation, clamped to [0.05, 0.95]. Empty history
  /// leaves the rates unchanged.
  static std::pair<double, double> update_adaptive_rates(
      const std::vector<OperatorOutcome>& history, double crossover_rate,
      double mutation_rate) {
    if (history.empty()) return {crossover_rate, mutation_rate};
    double cx_n = 0, cx_wins = 0, mu_n = 0, mu_wins = 0;
    for (const auto& h : history) {
      if (h.via_crossover) {
        cx_n += 1;
        cx_wins += h.improved ? 1 : 0;
      }
      if (h.via_mutation) {
        mu_n += 1;
        mu_wins += h.improved ? 1 : 0;
      }
    }
    auto adjust = [](double rate, double n, double wins) {
      if (n > 0) rate *= 0.85 + 0.6 * (wins / n);
      return std::clamp(rate, 0.05, 0.95);
    };
    return {adjust(crossover_rate, cx_n, cx_wins),
            adjust(mutation_rate, mu_n, mu_wins)};
  }

  const ParetoFront& front() const { return front_; }
  FitnessCache& cache() { return cache_; }
  std::uint64_t fits_performed() const { return fits_; }
  const Dataset& fit_fold() const { return fit_fold_; }
  const Dataset& score_fold() const { return score_fold_; }

  /// Objective vector of one pipeline (public for oracle tests; uses the
  /// same folds and seeding as the search).
  std::vector<double> objective_vector(const Pipeline& pipeline) {
    Individual tmp{pipeline, {}, false, ""};
    compute_objectives(tmp);
    return tmp.fitness;
  }

 private:
  using Clock = std::chrono::steady_clock;

  TaskType task() const { return fit_fold_.task; }

  void make_internal_folds(const Dataset& train) {
    auto folds = make_scoring_folds(train, config_.fit_fraction, config_.seed);
    fit_fold_ = std::move(folds.first);
    score_fold_ = std::move(folds.second);
  }

  bool out_of_time() const {
    const auto elapsed =
        std::chrono::duration<double>(Clock::now() - start_).count();
    return elapsed > config_.time_limit_seconds;
  }

  static bool everything_evaluated(const std::vector<Individual>& pop) {
    for (const auto& i : pop)
      if (!i.evaluated) return false;
    return true;
  }

  bool is_valid(const Pipeline& p) const {
    return validate(p, config_.structure_class, config_.max_depth, registry_,
                    fit_fold_.task, config_.max_nodes)
        .ok;
  }

  double primary_fitness(const Individual& ind) const {
    return ind.evaluated ? ind.fitness[0] : 0.0;
  }

  // -- Evaluation -----------------------------------------------------------

  void evaluate_individual(Individual& ind) {
    const std::string& sig = ind.sig();
    if (config_.cache_enabled) {
      if (auto cached = cache_.lookup(sig)) {
        ind.fitness = *cached;
        ind.evaluated = true;
        return;
      }
    }
    compute_objectives(ind);
    if (config_.cache_enabled && ind.evaluated) cache_.insert(sig, ind.fitness);
  }

  void compute_objectives(Individual& ind) {
    std::vector<double> fitness(config_.objectives.size(), 0.0);
    for (std::size_t i = 0; i < config_.objectives.size(); ++i) {
      const auto& obj = config_.objectives[i];
      if (obj.kind == ObjectiveSpec::Kind::complexity)
        fitness[i] =
            obj.complexity == ObjectiveSpec::ComplexityKind::node_count
                ? -static_cast<double>(
                      effective_node_count(ind.pipeline, registry_))
                : -static_cast<double>(compute_depth(ind.pipeline));
    }

    const std::uint64_t eval_seed = mix64(config_.seed, fnv1a(ind.sig()));
    try {
      fits_.fetch_add(1);
      const auto fitted = fit(ind.pipeline, fit_fold_, eval_seed, registry_);
      for (std::size_t i = 0; i < config_.objectives.size(); ++i) {
        const auto& obj = config_.objectives[i];
        if (obj.kind != ObjectiveSpec::Kind::quality) continue;
        const auto mv = score_fitted(fitted, fit_fold_, score_fold_, obj.metric);
        if (!std::isfinite(mv.value)) throw Error("non-finite metric");
        fitness[i] = to_fitness_score(mv);
      }
    } catch (const Error&) {
      // Worst-possible quality, complexity untouched: the run continues.
      for (std::size_t i = 0; i < config_.objectives.size(); ++i)
        if (config_.objectives[i].kind == ObjectiveSpec::Kind::quality)
          fitness[i] = 0.0;
    }
    ind.fitness = std::move(fitness);
    ind.evaluated = true;
  }

  /// In-sample quality on the fit fold (regularization's guidance signal).
  double fit_fold_quality(const Pipeline& p) {
    const std::string sig = canonical_signature(p);
    {
      std::lock_guard<std::mutex> lock(regularizer_mu_);
      auto it = fit_fold_quality_memo_.find(sig);
      if (it != fit_fold_quality_memo_.end()) return it->second;
    }
    Metric metric = Metric::MAE;
    for (const auto& obj : config_.objectives)
      if (obj.kind == ObjectiveSpec::Kind::quality) {
        metric = obj.metric;
        break;
      }
    double score = 0.0;
    try {
      const auto mv = fit_and_score(p, fit_fold_, fit_fold_, metric,
                                    mix64(config_.seed, fnv1a(sig)), registry_);
      score = std::isfinite(mv.value) ? to_fitness_score(mv) : 0.0;
    } catch (const Error&) {
      score = 0.0;
    }
    std::lock_guard<std::mutex> lock(regularizer_mu_);
    fit_fold_quality_memo_[sig] = score;
    return score;
  }

  // -- Selection ------------------------------------------------------------

  bool better_single(const Individual& a, const Individual& b) const {
    if (a.fitness[0] != b.fitness[0]) return a.fitness[0] > b.fitness[0];
    return a.signature < b.signature;  // deterministic tie-break
  }

  std::vector<Individual> select_parents(std::vector<Individual>& pop,
                                         int count) {
    std::vector<Individual> parents;
    const bool multi = config_.objectives.size() > 1;
    for (auto& ind : pop) ind.sig();  // materialize for tie-breaks

    if (config_.selection_type == ComposerConfig::Selection::spea2_like) {
      // Strength-style: prefer individuals dominated by fewer others.
      std::vector<int> dominated_by(pop.size(), 0);
      for (std::size_t i = 0; i < pop.size(); ++i)
        for (std::size_t j = 0; j < pop.size(); ++j)
          if (i != j && dominates(pop[j].fitness, pop[i].fitness))
            ++dominated_by[i];
      for (int c = 0; c < count; ++c) {
        const std::size_t a = rng_.next_index(pop.size());
        const std::size_t b = rng_.next_index(pop.size());
        parents.push_back(dominated_by[a] <= dominated_by[b] ? pop[a] : pop[b]);
      }
      return parents;
    }

    for (int c = 0; c < count; ++c) {
      if (multi) {
        const auto& a = pop[rng_.next_index(pop.size())];
        const auto& b = pop[rng_.next_index(pop.size())];
        if (dominates(a.fitness, b.fitness))
          parents.push_back(a);
        else if (dominates(b.fitness, a.fitness))
          parents.push_back(b);
        else
          parents.push_back(rng_.next_bool() ? a : b);
      } else {
        const Individual* best = nullptr;
        for (int t = 0; t < 3; ++t) {
          const auto& cand = pop[rng_.next_index(pop.size())];
          if (!best || better_single(cand, *best)) best = &cand;
        }
        parents.push_back(*best);
      }
    }
    return parents;
  }

  std::vector<Individual> select_survivors(std::vector<Individual> pop,
                                           std::vector<Individual> offspring) {
    std::vector<Individual> pool = std::move(pop);
    for (auto& o : offspring)
      if (o.evaluated) pool.push_back(std::move(o));
    for (auto& ind : pool) ind.sig();

    if (config_.objectives.size() == 1) {
      std::sort(pool.begin(), pool.end(),
                [&](const Individual& a, const Individual& b) {
                  return better_single(a, b);
                });
      pool.resize(std::min<std::size_t>(pool.size(), config_.pop_size));
      return pool;
    }
    return nsga2_truncate(std::move(pool), config_.pop_size);
  }

  std::vector<Individual> nsga2_truncate(std::vector<Individual> pool,
                                         std::size_t keep) {
    // Non-dominated sorting.
    const std::size_t n = pool.size();
    std::vector<std::vector<std::size_t>> fronts;
    std::vector<int> domination_count(n, 0);
    std::vector<std::vector<std::size_t>> dominated(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        if (dominates(pool[i].fitness, pool[j].fitness))
          dominated[i].push_back(j);
        else if (dominates(pool[j].fitness, pool[i].fitness))
          ++domination_count[i];
      }
    std::vector<std::size_t> current;
    for (std::size_t i = 0; i < n; ++i)
      if (domination_count[i] == 0) current.push_back(i);
    while (!current.empty()) {
      fronts.push_back(current);
      std::vector<std::size_t> next;
      for (auto i : current)
        for (auto j : dominated[i])
          if (--domination_count[j] == 0) next.push_back(j);
      current = std::move(next);
    }

    std::vector<Individual> out;
    for (const auto& f : fronts) {
      if (out.size() + f.size() <= keep) {
        for (auto i : f) out.push_back(pool[i]);
        continue;
      }
      // Partial front: crowding distance, largest first.
      const std::size_t m = config_.objectives.size();
      std::vector<double> crowd(f.size(), 0.0);
      for (std::size_t obj = 0; obj < m; ++obj) {
        std::vector<std::size_t> idx(f.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
          return pool[f[a]].fitness[obj] < pool[f[b]].fitness[obj];
        });
        crowd[idx.front()] = crowd[idx.back()] =
            std::numeric_limits<double>::infinity();
        const double span = pool[f[idx.back()]].fitness[obj] -
                            pool[f[idx.front()]].fitness[obj];
        if (span <= 0) continue;
        for (std::size_t r = 1; r + 1 < idx.size(); ++r)
          crowd[idx[r]] += (pool[f[idx[r + 1]]].fitness[obj] -
                            pool[f[idx[r - 1]]].fitness[obj]) /
                           span;
      }
      std::vector<std::size_t> order(f.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (crowd[a] != crowd[b]) return crowd[a] > crowd[b];
        return pool[f[a]].signature < pool[f[b]].signature;
      });
      for (auto r : order) {
        if (out.size() >= keep) break;
        out.push_back(pool[f[r]]);
      }
      break;
    }
    return out;
  }

  // -- Variation operators ---------------------------------------------------

  Pipeline mutate(const Pipeline& p) {
    switch (rng_.next_index(6)) {
      case 0: return mutate_add_node(p);
      case 1: return mutate_add_subtree(p);
      case 2: return mutate_replace_subtree(p);
      case 3: return mutate_change_operation(p);
      case 4: return mutate_change_hyperparams(p);
      default: return mutate_remove_node(p);
    }
  }

  const Node& random_node(const Pipeline& p) {
    return p.nodes[rng_.next_index(p.nodes.size())];
  }

  std::vector<OperationSpec> table_ops() {
    return detail::growth_candidates(registry_, task(), false);
  }

  // Exploration group.

  Pipeline mutate_add_node(const Pipeline& p) {
    auto ops = table_ops();
    if (ops.empty()) return p;
    Pipeline out = p;
    Node fresh;
    fresh.id = next_free_node_id(out);
    fresh.operation_id = ops[rng_.next_index(ops.size())].operation_id;

    // Prefer splicing on an existing edge; otherwise add a primary parent.
    std::vector<std::pair<int, int>> edges;  // child, parent
    for (const auto& n : out.nodes)
      for (int pid : n.parent_ids) edges.emplace_back(n.id, pid);
    if (!edges.empty() && rng_.next_bool(0.7)) {
      auto [child_id, parent_id] = edges[rng_.next_index(edges.size())];
      fresh.parent_ids = {parent_id};
      out.nodes.push_back(fresh);
      Node* child = out.find_node(child_id);
      for (int& pid : child->parent_ids)
        if (pid == parent_id) pid = fresh.id;
    } else {
      const int target = random_node(out).id;
      out.nodes.push_back(fresh);
      out.find_node(target)->parent_ids.push_back(fresh.id);
    }
    return out;
  }

  Pipeline mutate_add_subtree(const Pipeline& p) {
    Pipeline donor = grow_random_pipeline(rng_, registry_, task(),
                                          StructureClass::composite,
                                          std::max(1, config_.max_depth - 1),
                                          3);
    Pipeline out = p;
    const int base = next_free_node_id(out);
    for (Node n : donor.nodes) {
      n.id += base;
      for (int& pid : n.parent_ids) pid += base;
      out.nodes.push_back(std::move(n));
    }
    const int target = random_node(p).id;
    out.find_node(target)->parent_ids.push_back(donor.final_node_id + base);
    return out;
  }

  Pipeline mutate_replace_subtree(const Pipeline& p) {
    const Node& at = random_node(p);
    if (at.id == p.final_node_id && p.nodes.size() == 1)
      return mutate_add_node(p);
    Pipeline donor = grow_random_pipeline(rng_, registry_, task(),
                                          StructureClass::composite,
                                          std::max(1, config_.max_depth - 1),
                                          4);
    return graft_subtree(p, at.id, donor);
  }

  // Exploitation group.

  Pipeline mutate_change_operation(const Pipeline& p) {
    Pipeline out = p;
    Node* n = out.find_node(random_node(out).id);
    const OperationSpec* current = registry_.find(n->operation_id);
    if (!current) return out;
    std::vector<OperationSpec> swaps;
    for (const auto& cand : registry_.filter({}, {}, task())) {
      if (cand.operation_id == n->operation_id) continue;
      if (cand.kind != current->kind) continue;
      if ((cand.tags.count("accepts_series") > 0) !=
          (current->tags.count("accepts_series") > 0))
        continue;
      if ((cand.tags.count("emits_series") > 0) !=
          (current->tags.count("emits_series") > 0))
        continue;
      swaps.push_back(cand);
    }
    if (swaps.empty()) return out;
    n->operation_id = swaps[rng_.next_index(swaps.size())].operation_id;
    n->hyperparams.clear();
    return out;
  }

  Pipeline mutate_change_hyperparams(const Pipeline& p) {
    Pipeline out = p;
    std::vector<int> with_space;
    for (const auto& n : out.nodes) {
      const OperationSpec* spec = registry_.find(n.operation_id);
      if (spec && !spec->hyperparam_space.empty()) with_space.push_back(n.id);
    }
    if (!with_space.empty()) {
      Node* n = out.find_node(with_space[rng_.next_index(with_space.size())]);
      const OperationSpec& spec = registry_.at(n->operation_id);
      bool any = false;
      for (const auto& [name, dom] : spec.hyperparam_space)
        if (rng_.next_bool(0.5)) {
          n->hyperparams[name] = dom.sample(rng_);
          any = true;
        }
      if (!any) {
        auto it = spec.hyperparam_space.begin();
        std::advance(it, rng_.next_index(spec.hyperparam_space.size()));
        n->hyperparams[it->first] = it->second.sample(rng_);
      }
    }
    // The enrichment flag is part of the search space (adaptive merges).
    std::vector<int> secondary;
    for (const auto& n : out.nodes)
      if (!n.parent_ids.empty() && n.merge_policy == MergePolicy::adaptive)
        secondary.push_back(n.id);
    if (!secondary.empty() && rng_.next_bool(0.3)) {
      Node* n = out.find_node(secondary[rng_.next_index(secondary.size())]);
      n->data_enrichment = !n->data_enrichment;
    }
    return out;
  }

  Pipeline mutate_remove_node(const Pipeline& p) {
    std::vector<int> removable;
    for (const auto& n : p.nodes)
      if (n.id != p.final_node_id) removable.push_back(n.id);
    if (removable.empty()) return p;
    return with_node_removed(p, removable[rng_.next_index(removable.size())]);
  }

  // Crossovers.

  /// Replaces the ancestor subtree rooted at `at_id` with the donor
  /// pipeline; donor's sink takes the grafting point's position.
  Pipeline graft_subtree(const Pipeline& base, int at_id,
                         const Pipeline& donor) {
    // Nodes whose every forward path runs through at_id.
    const auto anc = ancestors_of(base, at_id);
    auto children = children_of(base);
    std::set<int> removed{at_id};
    bool grew = true;
    while (grew) {
      grew = false;
      for (int id : anc) {
        if (removed.count(id)) continue;
        bool all_in = true;
        for (int child : children[id])
          if (!removed.count(child)) all_in = false;
        if (all_in && !children[id].empty()) {
          removed.insert(id);
          grew = true;
        }
      }
    }

    Pipeline out;
    out.final_node_id = base.final_node_id;
    for (const auto& n : base.nodes)
      if (!removed.count(n.id)) out.nodes.push_back(n);

    int id_base = next_free_node_id(base);
    for (Node n : donor.nodes) {
      n.id += id_base;
      for (int& pid : n.parent_ids) pid += id_base;
      out.nodes.push_back(std::move(n));
    }
    const int graft_id = donor.final_node_id + id_base;
    for (auto& n : out.nodes)
      for (int& pid : n.parent_ids)
        if (pid == at_id) pid = graft_id;
    if (base.final_node_id == at_id) out.final_node_id = graft_id;
    return out;
  }

  std::pair<Pipeline, Pipeline> crossover_subtree_exchange(const Pipeline& a,
                                                           const Pipeline& b) {
    const Node& na = a.nodes[rng_.next_index(a.nodes.size())];
    const Node& nb = b.nodes[rng_.next_index(b.nodes.size())];
    Pipeline sub_a = subtree_pipeline(a, na.id);
    Pipeline sub_b = subtree_pipeline(b, nb.id);
    return {graft_subtree(a, na.id, sub_b), graft_subtree(b, nb.id, sub_a)};
  }

  /// One-point crossover on the canonical topological encoding: the child
  /// keeps one parent's prefix and the other's suffix; suffix references
  /// into the dropped prefix are remapped positionally, and unreferenced
  /// prefix nodes are pruned.
  std::pair<Pipeline, Pipeline> crossover_one_point(const Pipeline& a,
                                                    const Pipeline& b) {
    if (a.nodes.size() < 2 || b.nodes.size() < 2) return {a, b};
    const auto seq_a = canonical_order(a);
    const auto seq_b = canonical_order(b);
    const std::size_t cut = static_cast<std::size_t>(rng_.next_int(
        1, static_cast<std::int64_t>(std::min(seq_a.size(), seq_b.size())) - 1));
    return {splice(a, seq_a, b, seq_b, cut), splice(b, seq_b, a, seq_a, cut)};
  }

  Pipeline splice(const Pipeline& head, const std::vector<int>& head_order,
                  const Pipeline& tail, const std::vector<int>& tail_order,
                  std::size_t cut) {
    Pipeline out;
    std::map<int, int> head_map, tail_map;
    int next_id = 0;
    for (std::size_t i = 0; i < cut; ++i) {
      Node n = *head.find_node(head_order[i]);
      head_map[n.id] = next_id;
      n.id = next_id++;
      std::vector<int> parents;
      for (int pid : n.parent_ids) parents.push_back(head_map.at(pid));
      n.parent_ids = std::move(parents);
      out.nodes.push_back(std::move(n));
    }
    // Positional remap for tail references into its dropped prefix.
    std::map<int, int> tail_prefix_to_head;
    for (std::size_t i = 0; i < cut; ++i)
      tail_prefix_to_head[tail_order[i]] = head_map.at(head_order[i]);
    for (std::size_t i = cut; i < tail_order.size(); ++i) {
      Node n = *tail.find_node(tail_order[i]);
      tail_map[n.id] = next_id;
      n.id = next_id++;
      std::vector<int> parents;
      for (int pid : n.parent_ids) {
        auto in_tail = tail_map.find(pid);
        if (in_tail != tail_map.end())
          parents.push_back(in_tail->second);
        else
          parents.push_back(tail_prefix_to_head.at(pid));
      }
      n.parent_ids = std::move(parents);
      out.nodes.push_back(std::move(n));
    }
    out.final_node_id = tail_map.at(tail.final_node_id);

    // Prune head nodes that nothing downstream consumes.
    std::set<int> live = ancestors_of(out, out.final_node_id);
    Pipeline pruned;
    pruned.final_node_id = out.final_node_id;
    for (const auto& n : out.nodes)
      if (live.count(n.id)) pruned.nodes.push_back(n);
    return pruned;
  }

  // -- Bookkeeping ------------------------------------------------------------

  void record_operator_outcomes(const std::vector<Individual>& /*parents*/,
                                std::vector<Individual>& offspring) {
    operator_history_.clear();
    for (auto& o : offspring) {
      if (!o.evaluated) continue;
      OperatorOutcome rec;
      rec.via_crossover = o.via_crossover;
      rec.via_mutation = o.via_mutation;
      rec.improved = o.fitness[0] > o.parent_primary;
      operator_history_.push_back(rec);
    }
  }

  TelemetryRow snapshot(int generation, std::vector<Individual>& pop) {
    TelemetryRow row;
    row.generation = generation;
    const Individual* best = front_.best_by(0);
    row.best_fitness = best ? best->fitness[0] : 0.0;
    std::vector<double> primary;
    std::set<std::string> sigs;
    for (auto& ind : pop) {
      if (ind.evaluated) primary.push_back(ind.fitness[0]);
      sigs.insert(ind.sig());
    }
    if (!primary.empty()) {
      std::sort(primary.begin(), primary.end());
      row.median_fitness = primary[primary.size() / 2];
    }
    row.diversity = static_cast<int>(sigs.size());
    const auto total = cache_.hits() + cache_.misses();
    row.cache_hit_rate =
        total ? static_cast<double>(cache_.hits()) / total : 0.0;
    row.rss_bytes = current_rss_bytes();
    return row;
  }

  void finish(ComposeResult& result) {
    result.front = front_;
    result.fits_performed = fits_;
    result.cache_hits = cache_.hits();
    result.cache_misses = cache_.misses();
    result.reproduction_stalls = stalls_;
  }

  ComposerConfig config_;
  const Registry& registry_;
  Rng rng_;
  std::size_t train_rows_;
  Dataset fit_fold_;
  Dataset score_fold_;
  ParetoFront front_;
  FitnessCache cache_;
  std::vector<OperatorOutcome> operator_history_;
  std::atomic<std::uint64_t> fits_{0};
  std::uint64_t stalls_ = 0;
  std::mutex regularizer_mu_;
  std::map<std::string, double> fit_fold_quality_memo_;
  Clock::time_point start_ = Clock::now();
};

/// Convenience wrapper matching the one-call surface.
inline ComposeResult compose(const ComposerConfig& config, const Dataset& train,
                             const Registry& registry) {
  EvolutionaryComposer composer(config, train, registry);
  return composer.compose();
}

}  // namespace pipeforge

#endif  // PIPEFORGE_COMPOSER_HPP_
