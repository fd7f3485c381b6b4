#pragma once

// Improved clonal selection over bit-string antibodies.
//
// One generation: keep the better half of the colony, clone it in proportion
// to affinity, mutate every clone bitwise and keep a mutant only when it beats
// its parent, then truncate the union of clones and accepted mutants back to
// the colony size. The best schedule ever evaluated is archived and forced
// back into the colony whenever truncation drops it.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "greensched/core_model.hpp"
#include "greensched/detail/parallel.hpp"
#include "greensched/energy_time.hpp"
#include "greensched/random.hpp"
#include "greensched/trace.hpp"

namespace greensched {

enum class AffinityForm {
  normalized,  // exp(-(wE * E^ + wM * M^)) over population min/max bounds
  literal,     // exp(E + Ms), rewards larger objectives; kept for comparison only
};

struct IcsaConfig {
  std::size_t population_size = 50;
  /// Per-bit flip probability. Unset means 2 / genome length.
  std::optional<double> mutation_prob;
  std::size_t max_generations = 200;
  double clone_factor = 1.0;
  ObjectiveWeights weights;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  AffinityForm affinity_form = AffinityForm::normalized;

  void validate() const {
    if (population_size < 4 || population_size % 2 != 0)
      throw invalid_model("ICSA population_size must be even and >= 4");
    if (mutation_prob && !(*mutation_prob >= 0.0 && *mutation_prob <= 1.0))
      throw invalid_model("ICSA mutation_prob must lie in [0, 1]");
    if (max_generations < 1) throw invalid_model("ICSA max_generations must be >= 1");
    if (!(clone_factor > 0.0)) throw invalid_model("ICSA clone_factor must be > 0");
    weights.validate();
  }

  double effective_mutation_prob(std::size_t genome_bits) const {
    if (mutation_prob) return *mutation_prob;
    return genome_bits == 0 ? 0.0 : std::min(1.0, 2.0 / static_cast<double>(genome_bits));
  }
};

/// One antibody: its bits, decoded objectives, fixed-scale score and the
/// affinity it holds within its current population.
struct Individual {
  BitGenome genome;
  ObjectiveVector objectives;
  double score = 0.0;
  double affinity = 1.0;
};

/// Decodes and scores genomes for one problem. Read-only after construction,
/// so one instance may be shared by worker threads.
class GenomeEvaluator {
 public:
  GenomeEvaluator(const Problem& problem, ObjectiveWeights weights)
      : problem_(&problem),
        weights_(weights),
        scale_(reference_scale(problem)),
        m_(problem.resource_count()),
        k_max_(max_level_count(problem.resources)) {}

  const Problem& problem() const noexcept { return *problem_; }
  const ObjectiveWeights& weights() const noexcept { return weights_; }
  const ReferenceScale& scale() const noexcept { return scale_; }

  BitGenome empty_genome() const { return make_genome_layout(problem_->task_count(), m_, k_max_); }

  Allocation decode(const BitGenome& g) const {
    return greensched::decode(g, problem_->task_count(), m_, problem_->resources);
  }

  Individual make(BitGenome genome) const {
    Individual ind;
    ind.objectives = evaluate(decode(genome), *problem_);
    ind.score = weighted_score(ind.objectives, weights_, scale_);
    ind.genome = std::move(genome);
    return ind;
  }

 private:
  const Problem* problem_;
  ObjectiveWeights weights_;
  ReferenceScale scale_;
  std::size_t m_;
  std::size_t k_max_;
};

// ---------------------------------------------------------------------------
// Affinity
// ---------------------------------------------------------------------------

struct NormalizationBounds {
  double energy_min = 0.0;
  double energy_max = 0.0;
  double makespan_min = 0.0;
  double makespan_max = 0.0;
};

inline NormalizationBounds bounds_of(std::span<const Individual> pop) {
  NormalizationBounds b{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
                        std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& ind : pop) {
    b.energy_min = std::min(b.energy_min, ind.objectives.total_energy);
    b.energy_max = std::max(b.energy_max, ind.objectives.total_energy);
    b.makespan_min = std::min(b.makespan_min, ind.objectives.makespan);
    b.makespan_max = std::max(b.makespan_max, ind.objectives.makespan);
  }
  if (pop.empty()) b = {};
  return b;
}

namespace detail {
inline double normalize(double v, double lo, double hi) {
  return hi > lo ? (v - lo) / (hi - lo) : 0.0;
}
}  // namespace detail

inline double affinity(const ObjectiveVector& obj, const NormalizationBounds& b,
                       const ObjectiveWeights& w, AffinityForm form = AffinityForm::normalized) {
  if (form == AffinityForm::literal) return std::exp(obj.total_energy + obj.makespan);
  const double e = detail::normalize(obj.total_energy, b.energy_min, b.energy_max);
  const double m = detail::normalize(obj.makespan, b.makespan_min, b.makespan_max);
  return std::exp(-(w.energy * e + w.makespan * m));
}

/// Recomputes every member's affinity against the population's own bounds.
inline void assign_affinities(std::span<Individual> pop, const ObjectiveWeights& w,
                              AffinityForm form = AffinityForm::normalized) {
  const auto b = bounds_of(pop);
  for (auto& ind : pop) ind.affinity = affinity(ind.objectives, b, w, form);
}

/// Strict ordering used for every sort: higher affinity, then lower
/// makespan, then lower energy, then lower position.
inline bool ranks_before(const Individual& a, std::size_t ia, const Individual& b, std::size_t ib) {
  if (a.affinity != b.affinity) return a.affinity > b.affinity;
  if (a.objectives.makespan != b.objectives.makespan) return a.objectives.makespan < b.objectives.makespan;
  if (a.objectives.total_energy != b.objectives.total_energy)
    return a.objectives.total_energy < b.objectives.total_energy;
  return ia < ib;
}

inline std::vector<std::size_t> rank_order(std::span<const Individual> pop) {
  std::vector<std::size_t> idx(pop.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return ranks_before(pop[a], a, pop[b], b); });
  return idx;
}

/// Lower fixed-scale score wins; ties go to lower makespan, then energy.
inline bool better_score(const Individual& a, const Individual& b) {
  if (a.score != b.score) return a.score < b.score;
  if (a.objectives.makespan != b.objectives.makespan) return a.objectives.makespan < b.objectives.makespan;
  return a.objectives.total_energy < b.objectives.total_energy;
}

// ---------------------------------------------------------------------------
// Operators
// ---------------------------------------------------------------------------

/// The ceil(S/2) members of highest affinity, in rank order.
inline std::vector<Individual> select_top_half(std::span<const Individual> pop) {
  const auto order = rank_order(pop);
  const std::size_t keep = (pop.size() + 1) / 2;
  std::vector<Individual> out;
  out.reserve(keep);
  for (std::size_t r = 0; r < keep; ++r) out.push_back(pop[order[r]]);
  return out;
}

/// Copies per selected member: max(1, round(beta * S * aff_i / sum aff)).
inline std::vector<std::size_t> clone_counts(std::span<const Individual> selected,
                                             std::size_t population_size, double clone_factor) {
  double total = 0.0;
  for (const auto& ind : selected) total += ind.affinity;
  std::vector<std::size_t> counts(selected.size(), 1);
  if (!(total > 0.0) || !std::isfinite(total)) return counts;
  const double budget = clone_factor * static_cast<double>(population_size);
  for (std::size_t i = 0; i < selected.size(); ++i) {
    const double c = std::round(budget * selected[i].affinity / total);
    counts[i] = std::max<std::size_t>(1, static_cast<std::size_t>(c));
  }
  return counts;
}

inline std::vector<Individual> clone(std::span<const Individual> selected, const IcsaConfig& config) {
  const auto counts = clone_counts(selected, config.population_size, config.clone_factor);
  std::vector<Individual> pool;
  pool.reserve(std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
  for (std::size_t i = 0; i < selected.size(); ++i)
    for (std::size_t c = 0; c < counts[i]; ++c) pool.push_back(selected[i]);
  return pool;
}

/// Independent per-bit flips with probability pm.
template <typename Engine>
BitGenome mutate_bits(BitGenome genome, double pm, Engine& rng) {
  if (pm <= 0.0) return genome;
  for (auto& bit : genome.bits)
    if (bernoulli(rng, pm)) bit ^= 1U;
  return genome;
}

template <typename Engine>
Individual mutate(const Individual& parent, double pm, Engine& rng, const GenomeEvaluator& eval) {
  return eval.make(mutate_bits(parent.genome, pm, rng));
}

/// Mutant replaces the parent only on strictly larger affinity.
inline const Individual& improve_or_keep(const Individual& parent, const Individual& mutant) {
  return mutant.affinity > parent.affinity ? mutant : parent;
}

// ---------------------------------------------------------------------------
// Colony dynamics
// ---------------------------------------------------------------------------

struct Colony {
  std::vector<Individual> antibodies;
  Individual elite;            // best fixed-scale score ever evaluated
  std::size_t evaluations = 0;
};

namespace detail {

inline std::vector<Individual> evaluate_all(std::vector<BitGenome> genomes,
                                            const GenomeEvaluator& eval, unsigned threads) {
  std::vector<Individual> out(genomes.size());
  parallel_for(genomes.size(), threads,
               [&](std::size_t i) { out[i] = eval.make(std::move(genomes[i])); });
  return out;
}

inline void update_elite(Individual& elite, std::span<const Individual> candidates) {
  for (const auto& c : candidates)
    if (better_score(c, elite)) elite = c;
}

}  // namespace detail

template <typename Engine>
Colony initialize(const IcsaConfig& config, const GenomeEvaluator& eval, Engine& rng) {
  const BitGenome layout = eval.empty_genome();
  std::vector<BitGenome> genomes(config.population_size, layout);
  for (auto& g : genomes)
    for (auto& bit : g.bits) bit = static_cast<std::uint8_t>(rng() >> 63);
  Colony colony;
  colony.antibodies = detail::evaluate_all(std::move(genomes), eval, config.threads);
  colony.evaluations = colony.antibodies.size();
  assign_affinities(colony.antibodies, config.weights, config.affinity_form);
  colony.elite = colony.antibodies.front();
  detail::update_elite(colony.elite, colony.antibodies);
  return colony;
}

/// Builds a colony from explicit genomes (tests and warm starts).
inline Colony colony_from(std::vector<BitGenome> genomes, const IcsaConfig& config,
                          const GenomeEvaluator& eval) {
  if (genomes.empty()) throw structural_error("colony_from: no genomes");
  Colony colony;
  colony.antibodies = detail::evaluate_all(std::move(genomes), eval, config.threads);
  colony.evaluations = colony.antibodies.size();
  assign_affinities(colony.antibodies, config.weights, config.affinity_form);
  colony.elite = colony.antibodies.front();
  detail::update_elite(colony.elite, colony.antibodies);
  return colony;
}

template <typename Engine>
Colony next_generation(const Colony& current, const IcsaConfig& config,
                       const GenomeEvaluator& eval, Engine& rng) {
  const std::size_t S = config.population_size;
  const double pm = config.effective_mutation_prob(eval.empty_genome().size());

  // B(k): clones of the better half.
  const auto selected = select_top_half(current.antibodies);
  std::vector<Individual> clones = clone(selected, config);

  // Mutant bits are drawn sequentially; evaluation may fan out.
  std::vector<BitGenome> mutant_bits;
  mutant_bits.reserve(clones.size());
  for (const auto& c : clones) mutant_bits.push_back(mutate_bits(c.genome, pm, rng));
  std::vector<Individual> mutants = detail::evaluate_all(std::move(mutant_bits), eval, config.threads);

  // Parents and mutants are compared under one set of bounds.
  {
    std::vector<Individual> both;
    both.reserve(clones.size() + mutants.size());
    both.insert(both.end(), clones.begin(), clones.end());
    both.insert(both.end(), mutants.begin(), mutants.end());
    const auto b = bounds_of(both);
    for (auto& c : clones) c.affinity = affinity(c.objectives, b, config.weights, config.affinity_form);
    for (auto& mu : mutants) mu.affinity = affinity(mu.objectives, b, config.weights, config.affinity_form);
  }

  // C(k): accepted mutants, else the parent clone.
  std::vector<Individual> accepted;
  accepted.reserve(clones.size());
  for (std::size_t i = 0; i < clones.size(); ++i) accepted.push_back(improve_or_keep(clones[i], mutants[i]));

  // A(k+1) = B(k) u C(k), re-normalized and truncated to S.
  std::vector<Individual> pool = std::move(clones);
  pool.insert(pool.end(), std::make_move_iterator(accepted.begin()), std::make_move_iterator(accepted.end()));
  assign_affinities(pool, config.weights, config.affinity_form);
  const auto order = rank_order(pool);

  Colony next;
  next.evaluations = current.evaluations + mutants.size();
  next.elite = current.elite;
  detail::update_elite(next.elite, mutants);
  next.antibodies.reserve(S);
  for (std::size_t r = 0; r < S && r < order.size(); ++r) next.antibodies.push_back(pool[order[r]]);

  const bool elite_present =
      std::any_of(next.antibodies.begin(), next.antibodies.end(),
                  [&](const Individual& ind) { return ind.genome == next.elite.genome; });
  if (!elite_present) next.antibodies.back() = next.elite;
  assign_affinities(next.antibodies, config.weights, config.affinity_form);
  return next;
}

inline TraceRecord trace_record(std::size_t generation, const Colony& colony) {
  TraceRecord r;
  r.generation = generation;
  r.best_affinity = reference_affinity(colony.elite.score);
  r.best_makespan = colony.elite.objectives.makespan;
  r.best_energy = colony.elite.objectives.total_energy;
  double sum = 0.0;
  for (const auto& ind : colony.antibodies) sum += reference_affinity(ind.score);
  r.mean_affinity = colony.antibodies.empty() ? 0.0 : sum / static_cast<double>(colony.antibodies.size());
  return r;
}

inline void require_optimizable(const Problem& problem) {
  problem.validate();
  if (problem.task_count() == 0) throw structural_error("problem has no tasks to allocate");
}

/// Initialize, then max_generations steps. Deterministic for a fixed seed.
inline OptimizerResult run_icsa(const IcsaConfig& config, const Problem& problem) {
  config.validate();
  require_optimizable(problem);
  const auto t0 = std::chrono::steady_clock::now();

  const GenomeEvaluator eval(problem, config.weights);
  Rng rng(config.seed);
  Colony colony = initialize(config, eval, rng);

  OptimizerResult result;
  result.trace.records.reserve(config.max_generations + 1);
  result.trace.records.push_back(trace_record(0, colony));
  for (std::size_t k = 1; k <= config.max_generations; ++k) {
    colony = next_generation(colony, config, eval, rng);
    result.trace.records.push_back(trace_record(k, colony));
  }

  result.best = eval.decode(colony.elite.genome);
  result.objectives = colony.elite.objectives;
  result.score = colony.elite.score;
  result.trace.best = result.best;
  result.trace.best_objectives = result.objectives;
  result.trace.best_score = result.score;
  result.trace.evaluations = colony.evaluations;
  result.trace.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace greensched
