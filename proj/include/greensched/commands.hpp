#pragma once

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "greensched/baselines.hpp"
#include "greensched/bench.hpp"
#include "greensched/json_io.hpp"
#include "greensched/oracle.hpp"
#include "greensched/simulator.hpp"
#include "greensched/trace.hpp"

namespace greensched {

namespace fs = std::filesystem;

/// Directory name for one sweep point, e.g. "task_count-200".
inline std::string sweep_dir_name(SweepAxis axis, double value) {
  return std::string(to_string(axis)) + "-" + csv::format_double(value);
}

/// Writes scenario.json, tasks.json, resources.json and etc.json for every
/// sweep point. Returns the directories written.
inline std::vector<fs::path> cmd_generate(const ExperimentSpec& spec, const fs::path& out_dir) {
  spec.validate();
  std::vector<fs::path> dirs;
  for (double v : spec.values) {
    const Scenario s = scenario_at(spec, v, spec.scenario.seed);
    const fs::path dir = out_dir / sweep_dir_name(spec.axis, v);
    write_workload(dir, generate_workload(s));
    write_json_file(dir / "scenario.json", to_json(s));
    dirs.push_back(dir);
  }
  return dirs;
}

struct RunSummary {
  Algorithm algorithm;
  OptimizerResult result;
  ScheduleOutcome outcome;

  std::string line() const {
    std::ostringstream os;
    os << to_string(algorithm) << " makespan_s=" << csv::format_double(outcome.makespan)
       << " energy_j=" << csv::format_double(outcome.total_energy)
       << " mean_response_s=" << csv::format_double(outcome.mean_response);
    return os.str();
  }
};

/// Loads a workload directory into a problem.
inline Problem load_problem(const fs::path& workload_dir, const EnergyModel& energy = {}) {
  return to_problem(read_workload(workload_dir), energy);
}

/// Runs one optimizer, simulates its best allocation under the workload's
/// own arrival times, and (when out_dir is non-empty) writes schedule.csv,
/// resources.csv, trace.csv and allocation.json.
inline RunSummary cmd_run(Algorithm algo, const Problem& problem, const OptimizerSettings& settings,
                          std::uint64_t seed, const fs::path& out_dir) {
  RunSummary s{algo, run_algorithm(algo, problem, settings, seed), {}};
  s.outcome = simulate(s.result.best, problem);
  if (!out_dir.empty()) {
    std::ostringstream sched, res, trace;
    write_schedule_csv(sched, s.outcome);
    write_resource_csv(res, s.outcome);
    write_trace_csv(trace, s.result.trace);
    write_text_file(out_dir / "schedule.csv", sched.str());
    write_text_file(out_dir / "resources.csv", res.str());
    write_text_file(out_dir / "trace.csv", trace.str());
    json alloc = to_json(s.result.best);
    alloc["objectives"] = to_json(s.result.objectives);
    alloc["evaluations"] = s.result.trace.evaluations;
    write_json_file(out_dir / "allocation.json", alloc);
  }
  return s;
}

/// Runs the whole experiment and writes its outputs. Partial results are
/// written before failures are reported.
inline BenchReport cmd_bench(const ExperimentSpec& spec, const fs::path& out_dir,
                             unsigned threads = worker_count()) {
  BenchReport report = run_bench(spec, threads);
  write_bench_outputs(out_dir, spec, report);
  return report;
}

inline constexpr const char* kParetoHeader = "energy_j,makespan_s,allocation";

inline std::string allocation_compact(const Allocation& a) {
  std::string s;
  for (std::size_t i = 0; i < a.genes.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(a.genes[i].resource) + ":" + std::to_string(a.genes[i].level);
  }
  return s;
}

/// Exhaustive optimum and Pareto set; writes optimum.json and pareto.csv
/// when out_dir is non-empty.
inline OracleResult cmd_oracle(const Problem& problem, const ObjectiveWeights& weights,
                               const fs::path& out_dir) {
  OracleResult r = exhaustive_search(problem, weights);
  if (!out_dir.empty()) {
    std::ostringstream pareto;
    pareto << kParetoHeader << '\n';
    for (const auto& p : r.pareto) {
      csv::Row row(pareto);
      row << p.objectives.total_energy << p.objectives.makespan << allocation_compact(p.allocation);
    }
    write_text_file(out_dir / "pareto.csv", pareto.str());
    json opt = to_json(r.optimum);
    opt["objectives"] = to_json(r.optimum_objectives);
    opt["score"] = r.optimum_score;
    opt["candidates"] = r.candidates;
    write_json_file(out_dir / "optimum.json", opt);
  }
  return r;
}

}  // namespace greensched
