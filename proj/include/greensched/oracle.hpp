#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "greensched/core_model.hpp"
#include "greensched/energy_time.hpp"

namespace greensched {

/// The exhaustive search was refused because the space is too large.
class search_space_too_large : public std::runtime_error {
 public:
  search_space_too_large(double size, double bound)
      : std::runtime_error("search space of " + std::to_string(static_cast<long double>(size)) +
                           " allocations exceeds the enumeration bound of " +
                           std::to_string(static_cast<long double>(bound))),
        size_(size),
        bound_(bound) {}
  double size() const noexcept { return size_; }
  double bound() const noexcept { return bound_; }

 private:
  double size_;
  double bound_;
};

inline constexpr double kOracleBound = 1e6;

struct ParetoPoint {
  ObjectiveVector objectives;
  Allocation allocation;  // first allocation found with these objectives
};

struct OracleResult {
  Allocation optimum;
  ObjectiveVector optimum_objectives;
  double optimum_score = std::numeric_limits<double>::infinity();
  std::vector<ParetoPoint> pareto;  // ascending energy, strictly descending makespan
  std::size_t candidates = 0;
};

/// (sum_j k_j)^n: each task independently picks one (resource, level) pair.
inline double search_space_size(const Problem& problem) {
  double options = 0.0;
  for (const auto& r : problem.resources) options += static_cast<double>(r.level_count());
  return std::pow(options, static_cast<double>(problem.task_count()));
}

/// Enumerates every allocation; returns the weighted-score optimum (ties to
/// lower makespan, then enumeration order) and the Pareto set.
inline OracleResult exhaustive_search(const Problem& problem, const ObjectiveWeights& weights,
                                      double bound = kOracleBound) {
  problem.validate();
  weights.validate();
  const double size = search_space_size(problem);
  if (size > bound) throw search_space_too_large(size, bound);

  std::vector<Gene> options;
  for (const auto& r : problem.resources)
    for (std::size_t k = 0; k < r.level_count(); ++k) options.push_back({r.id(), k});

  const std::size_t n = problem.task_count();
  const ReferenceScale scale = reference_scale(problem);
  std::vector<std::size_t> digit(n, 0);
  Allocation a;
  a.genes.assign(n, options.front());

  OracleResult out;
  struct Seen {
    ObjectiveVector obj;
    std::size_t order;
  };
  std::vector<Seen> seen;
  for (;;) {
    for (std::size_t i = 0; i < n; ++i) a.genes[i] = options[digit[i]];
    const auto obj = evaluate(a, problem);
    const double s = weighted_score(obj, weights, scale);
    if (s < out.optimum_score || (s == out.optimum_score && obj.makespan < out.optimum_objectives.makespan)) {
      out.optimum = a;
      out.optimum_objectives = obj;
      out.optimum_score = s;
    }
    seen.push_back({obj, out.candidates});
    ++out.candidates;

    std::size_t i = 0;
    while (i < n && ++digit[i] == options.size()) digit[i++] = 0;
    if (i == n) break;
  }

  std::stable_sort(seen.begin(), seen.end(), [](const Seen& x, const Seen& y) {
    if (x.obj.total_energy != y.obj.total_energy) return x.obj.total_energy < y.obj.total_energy;
    return x.obj.makespan < y.obj.makespan;
  });
  double best_makespan = std::numeric_limits<double>::infinity();
  for (const auto& e : seen) {
    if (e.obj.makespan < best_makespan) {
      best_makespan = e.obj.makespan;
      // The first task varies fastest in enumeration order.
      Allocation rep;
      rep.genes.resize(n);
      std::size_t rest = e.order;
      for (std::size_t t = 0; t < n; ++t) {
        rep.genes[t] = options[rest % options.size()];
        rest /= options.size();
      }
      out.pareto.push_back({e.obj, std::move(rep)});
    }
  }
  return out;
}

}  // namespace greensched
