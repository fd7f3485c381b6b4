#pragma once

// Comparison schedulers sharing the fixed weighted objective:
//   dvs_greedy   longest-first list scheduling, then per-task slack reclamation
//   idea_de      DE/rand/1/bin over a continuous relaxation of the allocation
//   emls         multi-start first-improvement local search
//   random_alloc / round_robin   sanity floor and ceiling

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "greensched/core_model.hpp"
#include "greensched/energy_time.hpp"
#include "greensched/icsa.hpp"
#include "greensched/random.hpp"
#include "greensched/trace.hpp"

namespace greensched {

enum class Algorithm { icsa, dvs_greedy, idea_de, emls, random, round_robin };

inline const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::icsa: return "icsa";
    case Algorithm::dvs_greedy: return "dvs_greedy";
    case Algorithm::idea_de: return "idea_de";
    case Algorithm::emls: return "emls";
    case Algorithm::random: return "random";
    case Algorithm::round_robin: return "round_robin";
  }
  return "?";
}

/// Thrown for algorithm tags the tool does not know (a usage error).
class unknown_algorithm : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline Algorithm algorithm_from_string(const std::string& s) {
  for (auto a : {Algorithm::icsa, Algorithm::dvs_greedy, Algorithm::idea_de, Algorithm::emls,
                 Algorithm::random, Algorithm::round_robin})
    if (s == to_string(a)) return a;
  throw unknown_algorithm("unknown algorithm '" + s +
                          "' (expected icsa|dvs_greedy|idea_de|emls|random|round_robin)");
}

struct DeParams {
  std::size_t population = 50;  // NP
  double scale = 0.5;           // F
  double crossover = 0.9;       // CR
  std::size_t generations = 200;
};

struct EmlsParams {
  std::size_t starts = 10;
  std::size_t budget_per_start = 1004;  // neighbour evaluations per start
};

struct BaselineConfig {
  Algorithm algorithm = Algorithm::dvs_greedy;
  DeParams de;
  EmlsParams emls;
  ObjectiveWeights weights;
  std::uint64_t seed = 1;

  void validate() const {
    weights.validate();
    if (de.population < 4) throw invalid_model("DE population must be >= 4");
    if (!(de.scale > 0.0)) throw invalid_model("DE scale F must be > 0");
    if (!(de.crossover >= 0.0 && de.crossover <= 1.0)) throw invalid_model("DE crossover CR must lie in [0, 1]");
    if (de.generations < 1) throw invalid_model("DE generations must be >= 1");
    if (emls.starts < 1) throw invalid_model("EMLS starts must be >= 1");
  }

  /// Budgets matched to an ICSA run: S * (Gm + 1) evaluations each.
  static BaselineConfig matched_to(const IcsaConfig& icsa) {
    BaselineConfig c;
    c.weights = icsa.weights;
    c.seed = icsa.seed;
    c.de.population = icsa.population_size;
    c.de.generations = icsa.max_generations;
    const std::size_t budget = icsa.population_size * (icsa.max_generations + 1);
    c.emls.starts = 10;
    c.emls.budget_per_start = budget / c.emls.starts > 0 ? budget / c.emls.starts - 1 : 0;
    return c;
  }
};

namespace detail {

/// Tracks the best allocation seen and counts evaluations.
class ScoredSearch {
 public:
  ScoredSearch(const Problem& problem, const ObjectiveWeights& w)
      : problem_(problem), weights_(w), scale_(reference_scale(problem)) {}

  struct Scored {
    ObjectiveVector objectives;
    double score;
  };

  Scored score(const Allocation& a) {
    ++evaluations_;
    const auto obj = evaluate(a, problem_);
    const double s = weighted_score(obj, weights_, scale_);
    if (!have_best_ || s < best_score_ ||
        (s == best_score_ && obj.makespan < best_obj_.makespan)) {
      have_best_ = true;
      best_ = a;
      best_obj_ = obj;
      best_score_ = s;
    }
    return {obj, s};
  }

  TraceRecord record(std::size_t generation, double mean_affinity) const {
    return {generation, reference_affinity(best_score_), best_obj_.makespan, best_obj_.total_energy,
            mean_affinity};
  }

  OptimizerResult finish(OptimizerResult r, std::chrono::steady_clock::time_point t0) const {
    r.best = best_;
    r.objectives = best_obj_;
    r.score = best_score_;
    r.trace.best = best_;
    r.trace.best_objectives = best_obj_;
    r.trace.best_score = best_score_;
    r.trace.evaluations = evaluations_;
    r.trace.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
  }

  std::size_t evaluations() const noexcept { return evaluations_; }

 private:
  const Problem& problem_;
  ObjectiveWeights weights_;
  ReferenceScale scale_;
  bool have_best_ = false;
  Allocation best_;
  ObjectiveVector best_obj_;
  double best_score_ = std::numeric_limits<double>::infinity();
  std::size_t evaluations_ = 0;
};

inline OptimizerResult single_shot(const Allocation& a, const Problem& problem,
                                   const ObjectiveWeights& w) {
  const auto t0 = std::chrono::steady_clock::now();
  ScoredSearch search(problem, w);
  const auto s = search.score(a);
  OptimizerResult r;
  r.trace.records.push_back(search.record(0, reference_affinity(s.score)));
  return search.finish(std::move(r), t0);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// DVS greedy
// ---------------------------------------------------------------------------

/// Longest task first onto the resource that finishes it earliest, every task
/// at level 0.
inline Allocation longest_first_full_frequency(const Problem& problem) {
  const std::size_t n = problem.task_count();
  const std::size_t m = problem.resource_count();
  std::vector<double> fastest(n, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j)
      fastest[i] = std::min(fastest[i], scaled_completion_time(problem.etc(i, j), problem.resources[j].level(0)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return fastest[a] > fastest[b]; });

  Allocation alloc;
  alloc.genes.resize(n);
  std::vector<double> ready(m, 0.0);
  for (std::size_t i : order) {
    std::size_t best_j = 0;
    double best_finish = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j) {
      const double finish = ready[j] + scaled_completion_time(problem.etc(i, j), problem.resources[j].level(0));
      if (finish < best_finish) {
        best_finish = finish;
        best_j = j;
      }
    }
    ready[best_j] = best_finish;
    alloc.genes[i] = {best_j, 0};
  }
  return alloc;
}

struct DvsGreedyResult {
  Allocation full_frequency;
  ObjectiveVector full_frequency_objectives;
  OptimizerResult reclaimed;
};

/// Slack reclamation: visiting tasks longest first, each moves to the slowest
/// level that keeps the full-frequency makespan and does not raise total
/// energy.
inline DvsGreedyResult dvs_greedy_detailed(const Problem& problem, const ObjectiveWeights& w = {}) {
  require_optimizable(problem);
  const auto t0 = std::chrono::steady_clock::now();
  detail::ScoredSearch search(problem, w);

  DvsGreedyResult out;
  out.full_frequency = longest_first_full_frequency(problem);
  const auto base = search.score(out.full_frequency);
  out.full_frequency_objectives = base.objectives;
  const double limit = base.objectives.makespan;

  Allocation alloc = out.full_frequency;
  ObjectiveVector current = base.objectives;
  std::vector<double> duration(problem.task_count());
  for (std::size_t i = 0; i < duration.size(); ++i) {
    const std::size_t j = alloc.genes[i].resource;
    duration[i] = scaled_completion_time(problem.etc(i, j), problem.resources[j].level(0));
  }
  std::vector<std::size_t> order(problem.task_count());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return duration[a] > duration[b]; });
  for (std::size_t i : order) {
    const Resource& r = problem.resources[alloc.genes[i].resource];
    for (std::size_t lvl = r.level_count(); lvl-- > 1;) {
      Allocation trial = alloc;
      trial.genes[i].level = lvl;
      const auto s = search.score(trial);
      if (s.objectives.makespan <= limit && s.objectives.total_energy <= current.total_energy) {
        alloc = std::move(trial);
        current = s.objectives;
        break;
      }
    }
  }

  // The reported allocation is the reclaimed schedule, not whichever trial
  // scored best.
  OptimizerResult r;
  r.best = alloc;
  r.objectives = current;
  r.score = weighted_score(current, w, reference_scale(problem));
  r.trace.records.push_back({0, reference_affinity(r.score), current.makespan, current.total_energy,
                             reference_affinity(r.score)});
  r.trace.best = alloc;
  r.trace.best_objectives = current;
  r.trace.best_score = r.score;
  r.trace.evaluations = search.evaluations();
  r.trace.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.reclaimed = std::move(r);
  return out;
}

inline OptimizerResult dvs_greedy(const Problem& problem, const ObjectiveWeights& w = {}) {
  return dvs_greedy_detailed(problem, w).reclaimed;
}

// ---------------------------------------------------------------------------
// Differential evolution
// ---------------------------------------------------------------------------

/// Maps [0,1)^(2n) to an allocation: coordinate 2i picks the resource,
/// 2i+1 the level, by scaled truncation with clipping just below 1.
inline Allocation decode_continuous(const std::vector<double>& x, const Problem& problem) {
  constexpr double kBelowOne = 1.0 - 1e-12;
  const std::size_t n = problem.task_count();
  const std::size_t m = problem.resource_count();
  Allocation a;
  a.genes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double xr = std::clamp(x[2 * i], 0.0, kBelowOne);
    const std::size_t r = std::min(m - 1, static_cast<std::size_t>(xr * static_cast<double>(m)));
    const std::size_t k = problem.resources[r].level_count();
    const double xl = std::clamp(x[2 * i + 1], 0.0, kBelowOne);
    a.genes[i] = {r, std::min(k - 1, static_cast<std::size_t>(xl * static_cast<double>(k)))};
  }
  return a;
}

inline OptimizerResult idea_de(const Problem& problem, const BaselineConfig& config) {
  config.validate();
  require_optimizable(problem);
  const auto t0 = std::chrono::steady_clock::now();
  detail::ScoredSearch search(problem, config.weights);
  Rng rng(derive_seed(config.seed, 0xDE));

  const std::size_t np = config.de.population;
  const std::size_t dim = 2 * problem.task_count();
  std::vector<std::vector<double>> pop(np, std::vector<double>(dim));
  std::vector<double> fitness(np);
  for (auto& x : pop)
    for (auto& v : x) v = uniform01(rng);
  for (std::size_t p = 0; p < np; ++p) fitness[p] = search.score(decode_continuous(pop[p], problem)).score;

  auto mean_aff = [&] {
    double s = 0.0;
    for (double f : fitness) s += reference_affinity(f);
    return s / static_cast<double>(np);
  };

  OptimizerResult result;
  result.trace.records.push_back(search.record(0, mean_aff()));
  std::vector<double> trial(dim);
  for (std::size_t g = 1; g <= config.de.generations; ++g) {
    for (std::size_t p = 0; p < np; ++p) {
      std::size_t r1, r2, r3;
      do r1 = uniform_index(rng, np); while (r1 == p);
      do r2 = uniform_index(rng, np); while (r2 == p || r2 == r1);
      do r3 = uniform_index(rng, np); while (r3 == p || r3 == r1 || r3 == r2);
      const std::size_t forced = uniform_index(rng, dim);
      for (std::size_t d = 0; d < dim; ++d) {
        if (d == forced || bernoulli(rng, config.de.crossover)) {
          double v = pop[r1][d] + config.de.scale * (pop[r2][d] - pop[r3][d]);
          if (v < 0.0 || v >= 1.0) v = uniform01(rng);
          trial[d] = v;
        } else {
          trial[d] = pop[p][d];
        }
      }
      const double f = search.score(decode_continuous(trial, problem)).score;
      if (f <= fitness[p]) {
        pop[p] = trial;
        fitness[p] = f;
      }
    }
    result.trace.records.push_back(search.record(g, mean_aff()));
  }
  return search.finish(std::move(result), t0);
}

// ---------------------------------------------------------------------------
// Multi-start local search
// ---------------------------------------------------------------------------

template <typename Engine>
Allocation random_allocation(const Problem& problem, Engine& rng) {
  Allocation a;
  a.genes.resize(problem.task_count());
  for (auto& g : a.genes) {
    g.resource = uniform_index(rng, problem.resource_count());
    g.level = uniform_index(rng, problem.resources[g.resource].level_count());
  }
  return a;
}

struct EmlsStart {
  double initial_score;
  double final_score;
};

/// First-improvement descent from one start. Moves reassign one task's
/// (resource, level). Stops at a local optimum or when `budget` neighbour
/// evaluations are spent.
inline Allocation first_improvement_descent(Allocation current, double& current_score,
                                            detail::ScoredSearch& search, const Problem& problem,
                                            std::size_t budget) {
  const std::size_t n = problem.task_count();
  const std::size_t m = problem.resource_count();
  std::size_t spent = 0;
  std::size_t since_improvement = 0;
  std::size_t neighbourhood = 0;
  for (const auto& r : problem.resources) neighbourhood += r.level_count();
  neighbourhood = n * (neighbourhood - 1);

  std::size_t task = 0, res = 0, lvl = 0;
  while (spent < budget && since_improvement < neighbourhood) {
    const Gene old = current.genes[task];
    if (!(old.resource == res && old.level == lvl)) {
      current.genes[task] = {res, lvl};
      const auto s = search.score(current);
      ++spent;
      ++since_improvement;
      if (s.score < current_score) {
        current_score = s.score;
        since_improvement = 0;
      } else {
        current.genes[task] = old;
      }
    }
    // Advance (task, res, lvl) cyclically.
    if (++lvl >= problem.resources[res].level_count()) {
      lvl = 0;
      if (++res >= m) {
        res = 0;
        task = (task + 1) % n;
      }
    }
  }
  return current;
}

inline OptimizerResult emls(const Problem& problem, const BaselineConfig& config,
                            std::vector<EmlsStart>* starts_out = nullptr) {
  config.validate();
  require_optimizable(problem);
  const auto t0 = std::chrono::steady_clock::now();
  detail::ScoredSearch search(problem, config.weights);
  Rng rng(derive_seed(config.seed, 0xE1));

  OptimizerResult result;
  double aff_sum = 0.0;
  for (std::size_t s = 0; s < config.emls.starts; ++s) {
    Allocation a = random_allocation(problem, rng);
    double score = search.score(a).score;
    const double initial = score;
    a = first_improvement_descent(std::move(a), score, search, problem, config.emls.budget_per_start);
    if (starts_out) starts_out->push_back({initial, score});
    aff_sum += reference_affinity(score);
    result.trace.records.push_back(search.record(s, aff_sum / static_cast<double>(s + 1)));
  }
  return search.finish(std::move(result), t0);
}

// ---------------------------------------------------------------------------
// Sanity baselines
// ---------------------------------------------------------------------------

inline OptimizerResult random_alloc(const Problem& problem, std::uint64_t seed,
                                    const ObjectiveWeights& w = {}) {
  require_optimizable(problem);
  Rng rng(derive_seed(seed, 0x5A));
  return detail::single_shot(random_allocation(problem, rng), problem, w);
}

inline Allocation round_robin_allocation(std::size_t tasks, std::size_t resources) {
  Allocation a;
  a.genes.resize(tasks);
  for (std::size_t i = 0; i < tasks; ++i) a.genes[i] = {i % resources, 0};
  return a;
}

inline OptimizerResult round_robin(const Problem& problem, const ObjectiveWeights& w = {}) {
  require_optimizable(problem);
  return detail::single_shot(round_robin_allocation(problem.task_count(), problem.resource_count()),
                             problem, w);
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

struct OptimizerSettings {
  IcsaConfig icsa;
  BaselineConfig baselines = BaselineConfig::matched_to(IcsaConfig{});
};

inline OptimizerResult run_algorithm(Algorithm algo, const Problem& problem,
                                     const OptimizerSettings& settings, std::uint64_t seed) {
  switch (algo) {
    case Algorithm::icsa: {
      IcsaConfig c = settings.icsa;
      c.seed = seed;
      return run_icsa(c, problem);
    }
    case Algorithm::dvs_greedy:
      return dvs_greedy(problem, settings.baselines.weights);
    case Algorithm::idea_de:
    case Algorithm::emls: {
      BaselineConfig c = settings.baselines;
      c.algorithm = algo;
      c.seed = seed;
      return algo == Algorithm::idea_de ? idea_de(problem, c) : emls(problem, c);
    }
    case Algorithm::random:
      return random_alloc(problem, seed, settings.baselines.weights);
    case Algorithm::round_robin:
      return round_robin(problem, settings.baselines.weights);
  }
  throw unknown_algorithm("unhandled algorithm");
}

}  // namespace greensched
