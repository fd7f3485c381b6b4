#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "greensched/core_model.hpp"

namespace greensched {

/// How the per-task energy term treats the ETC entry.
///  - physical: power at the level times the frequency-scaled duration,
///              gamma * v^2 * ct.
///  - literal:  gamma * f * v^2 * ct with ct the full-frequency time.
enum class EnergyFormula { physical, literal };

inline const char* to_string(EnergyFormula f) {
  return f == EnergyFormula::physical ? "physical" : "literal";
}

inline EnergyFormula energy_formula_from_string(const std::string& s) {
  if (s == "physical") return EnergyFormula::physical;
  if (s == "literal") return EnergyFormula::literal;
  throw invalid_model("unknown energy_formula '" + s + "' (expected physical|literal)");
}

struct EnergyModel {
  EnergyFormula formula = EnergyFormula::physical;
  /// Resources whose utilization (busy / makespan) is below this value spend
  /// their idle time in the sleep state; the others idle at their slowest
  /// table level. 1.0 puts every resource with idle time to sleep.
  double sleep_utilization_threshold = 1.0;
};

/// Total energy and makespan of one schedule.
struct ObjectiveVector {
  double total_energy = 0.0;  // joules
  double makespan = 0.0;      // seconds
  friend bool operator==(const ObjectiveVector&, const ObjectiveVector&) = default;
};

// ---------------------------------------------------------------------------
// Closed-form terms
// ---------------------------------------------------------------------------

/// P = gamma * v^2 * f (watts).
inline double power(double gamma, const DvfsLevel& level) {
  return gamma * level.voltage() * level.voltage() * level.frequency();
}

/// Completion time at a DVFS level: ct / f.
inline double scaled_completion_time(double ct, const DvfsLevel& level) {
  return ct / level.frequency();
}

inline double task_energy(double gamma, const DvfsLevel& level, double ct,
                          EnergyFormula formula = EnergyFormula::physical) {
  const double v2 = level.voltage() * level.voltage();
  if (formula == EnergyFormula::literal) return gamma * level.frequency() * v2 * ct;
  return gamma * v2 * ct;
}

/// One task placed on a resource: full-frequency ct and the chosen level.
struct AssignedTask {
  double ct;
  DvfsLevel level;
};

inline double resource_energy(const Resource& res, std::span<const AssignedTask> assigned,
                              double idle, EnergyFormula formula = EnergyFormula::physical) {
  if (!(idle >= 0.0)) throw std::domain_error("resource_energy: idle time must be >= 0");
  double busy_energy = 0.0;
  for (const auto& a : assigned) busy_energy += task_energy(res.gamma(), a.level, a.ct, formula);
  const DvfsLevel& sleep = res.sleep_level();
  return busy_energy + res.gamma() * sleep.voltage() * sleep.frequency() * idle + res.lambda();
}

/// Max of the completion times; 0 for an empty schedule.
inline double makespan(std::span<const double> completion_times) {
  double ms = 0.0;
  for (double c : completion_times) ms = std::max(ms, c);
  return ms;
}

// ---------------------------------------------------------------------------
// Problem and analytic evaluation
// ---------------------------------------------------------------------------

/// Everything an optimizer needs: tasks, processors, their ETC matrix and the
/// energy model.
struct Problem {
  std::vector<Task> tasks;
  std::vector<Resource> resources;
  EtcMatrix etc;
  EnergyModel energy;

  std::size_t task_count() const noexcept { return tasks.size(); }
  std::size_t resource_count() const noexcept { return resources.size(); }

  /// Throws structural_error when shapes disagree.
  void validate() const {
    validate_task_ids(tasks);
    validate_resource_ids(resources);
    if (resources.empty()) throw structural_error("problem has no resources");
    if (etc.tasks() != tasks.size() || etc.resources() != resources.size())
      throw structural_error("ETC matrix is " + std::to_string(etc.tasks()) + "x" +
                             std::to_string(etc.resources()) + ", problem is " +
                             std::to_string(tasks.size()) + "x" +
                             std::to_string(resources.size()));
    if (!(energy.sleep_utilization_threshold >= 0.0))
      throw invalid_model("sleep_utilization_threshold must be >= 0");
  }
};

inline Problem make_problem(std::vector<Task> tasks, std::vector<Resource> resources,
                            EnergyModel energy = {}) {
  Problem p;
  p.etc = EtcMatrix::from_lengths(tasks, resources);
  p.tasks = std::move(tasks);
  p.resources = std::move(resources);
  p.energy = energy;
  p.validate();
  return p;
}

/// Idle energy of one resource given its utilization class.
inline double idle_energy(const Resource& res, double busy, double makespan_s,
                          double idle, const EnergyModel& model) {
  const bool sleeps = makespan_s <= 0.0 || busy / makespan_s < model.sleep_utilization_threshold;
  if (sleeps) {
    const DvfsLevel& s = res.sleep_level();
    return res.gamma() * s.voltage() * s.frequency() * idle;
  }
  return power(res.gamma(), res.dvfs_table().back()) * idle;
}

/// Per-resource busy totals, accumulated in ascending task id.
inline std::vector<double> busy_times(const Allocation& alloc, const Problem& problem) {
  std::vector<double> busy(problem.resource_count(), 0.0);
  for (std::size_t i = 0; i < alloc.genes.size(); ++i) {
    const Gene& g = alloc.genes[i];
    busy[g.resource] +=
        scaled_completion_time(problem.etc(i, g.resource), problem.resources[g.resource].level(g.level));
  }
  return busy;
}

/// Energy accounted per resource once busy and idle times are known. Shared
/// by the analytic evaluator and the simulator.
inline std::vector<double> resource_energies(const Allocation& alloc, const Problem& problem,
                                             std::span<const double> busy, double makespan_s) {
  const std::size_t m = problem.resource_count();
  std::vector<double> dynamic(m, 0.0);
  for (std::size_t i = 0; i < alloc.genes.size(); ++i) {
    const Gene& g = alloc.genes[i];
    const Resource& r = problem.resources[g.resource];
    dynamic[g.resource] += task_energy(r.gamma(), r.level(g.level), problem.etc(i, g.resource),
                                       problem.energy.formula);
  }
  std::vector<double> energy(m);
  for (std::size_t j = 0; j < m; ++j) {
    const Resource& r = problem.resources[j];
    const double idle = std::max(0.0, makespan_s - busy[j]);
    energy[j] = dynamic[j] + idle_energy(r, busy[j], makespan_s, idle, problem.energy) + r.lambda();
  }
  return energy;
}

/// Analytic objectives: all tasks released at 0, each resource runs its tasks
/// back to back, idle_j = makespan - busy_j.
inline ObjectiveVector evaluate(const Allocation& alloc, const Problem& problem) {
  validate_allocation(alloc, problem.task_count(), problem.resources);
  if (problem.etc.tasks() != problem.task_count() ||
      problem.etc.resources() != problem.resource_count())
    throw structural_error("evaluate: ETC matrix does not match the problem");
  const auto busy = busy_times(alloc, problem);
  const double ms = makespan(busy);
  const auto energy = resource_energies(alloc, problem, busy, ms);
  double total = 0.0;
  for (double e : energy) total += e;
  return {total, ms};
}

// ---------------------------------------------------------------------------
// Scalarization
// ---------------------------------------------------------------------------

struct ObjectiveWeights {
  double energy = 0.5;
  double makespan = 0.5;

  void validate() const {
    if (!(energy >= 0.0) || !(makespan >= 0.0) || std::abs(energy + makespan - 1.0) > 1e-9)
      throw invalid_model("objective weights must be >= 0 and sum to 1");
  }
};

/// Problem-level lower bounds on energy and makespan. Dividing by them puts
/// joules and seconds on a common dimensionless scale where every feasible
/// schedule scores >= 1 per objective.
struct ReferenceScale {
  double energy = 1.0;
  double makespan = 1.0;
};

inline ReferenceScale reference_scale(const Problem& problem) {
  double energy_lb = 0.0;
  double longest = 0.0;
  double total_fastest = 0.0;
  for (std::size_t i = 0; i < problem.task_count(); ++i) {
    double e_min = std::numeric_limits<double>::infinity();
    double t_min = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < problem.resource_count(); ++j) {
      const Resource& r = problem.resources[j];
      const double ct = problem.etc(i, j);
      t_min = std::min(t_min, scaled_completion_time(ct, r.level(0)));
      for (const auto& lvl : r.dvfs_table())
        e_min = std::min(e_min, task_energy(r.gamma(), lvl, ct, problem.energy.formula));
    }
    energy_lb += e_min;
    longest = std::max(longest, t_min);
    total_fastest += t_min;
  }
  for (const auto& r : problem.resources) energy_lb += r.lambda();
  ReferenceScale s;
  const double makespan_lb =
      std::max(longest, total_fastest / static_cast<double>(std::max<std::size_t>(1, problem.resource_count())));
  s.energy = energy_lb > 0.0 ? energy_lb : 1.0;
  s.makespan = makespan_lb > 0.0 ? makespan_lb : 1.0;
  return s;
}

/// The fixed weighted objective every optimizer minimizes and the exhaustive
/// oracle ranks by.
inline double weighted_score(const ObjectiveVector& obj, const ObjectiveWeights& w,
                             const ReferenceScale& scale) {
  return w.energy * obj.total_energy / scale.energy + w.makespan * obj.makespan / scale.makespan;
}

/// True when `a` is no worse on both objectives and better on one.
inline bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
  return a.total_energy <= b.total_energy && a.makespan <= b.makespan &&
         (a.total_energy < b.total_energy || a.makespan < b.makespan);
}

}  // namespace greensched
