#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <vector>

#include "greensched/core_model.hpp"
#include "greensched/csv.hpp"
#include "greensched/energy_time.hpp"

namespace greensched {

/// Affinity of a schedule measured against the problem's fixed reference
/// bounds rather than a population: exp(1 - score), in (0, 1]. Comparable
/// across generations, which population-normalized affinity is not.
inline double reference_affinity(double score) { return std::min(1.0, std::exp(1.0 - score)); }

struct TraceRecord {
  std::size_t generation = 0;
  double best_affinity = 0.0;
  double best_makespan = 0.0;
  double best_energy = 0.0;
  double mean_affinity = 0.0;
};

struct RunTrace {
  std::vector<TraceRecord> records;
  Allocation best;
  ObjectiveVector best_objectives;
  double best_score = 0.0;
  std::size_t evaluations = 0;
  double wall_seconds = 0.0;
};

inline constexpr const char* kTraceHeader =
    "generation,best_affinity,best_makespan_s,best_energy_j,mean_affinity";

inline void write_trace_csv(std::ostream& os, const RunTrace& trace) {
  os << kTraceHeader << '\n';
  for (const auto& r : trace.records) {
    csv::Row row(os);
    row << r.generation << r.best_affinity << r.best_makespan << r.best_energy << r.mean_affinity;
  }
}

/// Result shared by every optimizer.
struct OptimizerResult {
  Allocation best;
  ObjectiveVector objectives;
  double score = 0.0;
  RunTrace trace;
};

}  // namespace greensched
