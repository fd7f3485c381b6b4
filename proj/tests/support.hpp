#pragma once

// Test-only helpers: seeded random problems and an exhaustive enumerator that
// does not share code with the library's oracle.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "greensched/greensched.hpp"

namespace greensched::testkit {

/// Random heterogeneous problem: k strictly decreasing DVFS levels per
/// resource, random gamma / lambda / mips, lengths in [1e3, 1e4] MI.
inline Problem random_problem(std::uint64_t seed, std::size_t n, std::size_t m, std::size_t k,
                              EnergyModel energy = {}) {
  Rng rng(derive_seed(seed, 77));
  std::vector<Resource> resources;
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<DvfsLevel> table;
    double v = uniform_real(rng, 1.2, 1.6);
    double f = 1.0;
    for (std::size_t l = 0; l < k; ++l) {
      table.emplace_back(v, f);
      v -= uniform_real(rng, 0.05, 0.15);
      f -= uniform_real(rng, 0.05, 0.12);
    }
    const DvfsLevel sleep(table.back().voltage() * 0.7, table.back().frequency() * 0.3);
    resources.emplace_back(j, std::move(table), uniform_real(rng, 0.5, 2.0), sleep,
                           uniform_real(rng, 0.0, 2.0), uniform_real(rng, 50.0, 200.0));
  }
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < n; ++i) tasks.emplace_back(i, uniform_real(rng, 1e3, 1e4));
  return make_problem(std::move(tasks), std::move(resources), energy);
}

/// Random problem on resources that share the default seven-level table.
inline Problem default_table_problem(std::uint64_t seed, std::size_t n, std::size_t m) {
  Rng rng(derive_seed(seed, 91));
  std::vector<Resource> resources;
  for (std::size_t j = 0; j < m; ++j) resources.push_back(Resource::with_defaults(j, uniform_real(rng, 100, 300)));
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < n; ++i) tasks.emplace_back(i, uniform_real(rng, 1e3, 1e4));
  return make_problem(std::move(tasks), std::move(resources));
}

template <typename Engine>
Allocation random_valid_allocation(const Problem& p, Engine& rng) {
  Allocation a;
  for (std::size_t i = 0; i < p.task_count(); ++i) {
    const std::size_t r = uniform_index(rng, p.resource_count());
    a.genes.push_back({r, static_cast<std::size_t>(uniform_index(rng, p.resources[r].level_count()))});
  }
  return a;
}

/// Recursive enumeration of all allocations; calls visit for each.
inline void for_each_allocation(const Problem& p, const std::function<void(const Allocation&)>& visit) {
  Allocation a;
  a.genes.resize(p.task_count());
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == p.task_count()) {
      visit(a);
      return;
    }
    for (std::size_t r = 0; r < p.resource_count(); ++r)
      for (std::size_t l = 0; l < p.resources[r].level_count(); ++l) {
        a.genes[i] = {r, l};
        rec(i + 1);
      }
  };
  rec(0);
}

inline double brute_force_best_score(const Problem& p, const ObjectiveWeights& w) {
  const auto scale = reference_scale(p);
  double best = std::numeric_limits<double>::infinity();
  for_each_allocation(p, [&](const Allocation& a) {
    best = std::min(best, weighted_score(evaluate(a, p), w, scale));
  });
  return best;
}

inline bool relative_close(double a, double b, double rel) {
  const double scale = std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(a - b) <= rel * scale;
}

}  // namespace greensched::testkit
