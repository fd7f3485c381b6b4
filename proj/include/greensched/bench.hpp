#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "greensched/baselines.hpp"
#include "greensched/csv.hpp"
#include "greensched/detail/parallel.hpp"
#include "greensched/json_io.hpp"
#include "greensched/simulator.hpp"

namespace greensched {

enum class SweepAxis { task_count, generations, utilization_threshold, scheduling_cycle, arrival_rate };

inline const char* to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::task_count: return "task_count";
    case SweepAxis::generations: return "generations";
    case SweepAxis::utilization_threshold: return "utilization_threshold";
    case SweepAxis::scheduling_cycle: return "scheduling_cycle";
    case SweepAxis::arrival_rate: return "arrival_rate";
  }
  return "?";
}

inline SweepAxis sweep_axis_from_string(const std::string& s) {
  for (auto a : {SweepAxis::task_count, SweepAxis::generations, SweepAxis::utilization_threshold,
                 SweepAxis::scheduling_cycle, SweepAxis::arrival_rate})
    if (s == to_string(a)) return a;
  throw invalid_model("unknown sweep axis '" + s + "'");
}

struct ExperimentSpec {
  Scenario scenario;
  std::vector<Algorithm> algorithms{Algorithm::icsa, Algorithm::dvs_greedy, Algorithm::idea_de,
                                    Algorithm::emls};
  std::size_t repeats = 10;
  SweepAxis axis = SweepAxis::task_count;
  std::vector<double> values{200, 400, 500};
  OptimizerSettings settings;
  EnergyModel energy;
  std::filesystem::path output_dir = "bench-out";

  void validate() const {
    scenario.validate();
    if (repeats < 1) throw invalid_model("repeats must be >= 1");
    if (algorithms.empty()) throw invalid_model("algorithm list is empty");
    if (values.empty()) throw invalid_model("sweep has no values");
    for (std::size_t i = 1; i < values.size(); ++i)
      if (!(values[i] > values[i - 1])) throw invalid_model("sweep values must be strictly increasing");
    for (double v : values) {
      if (!std::isfinite(v) || v < 0.0) throw invalid_model("sweep values must be finite and >= 0");
      if ((axis == SweepAxis::task_count || axis == SweepAxis::generations) && v != std::floor(v))
        throw invalid_model("task_count / generations sweep values must be integers");
      if ((axis == SweepAxis::generations || axis == SweepAxis::scheduling_cycle ||
           axis == SweepAxis::arrival_rate) && !(v > 0.0))
        throw invalid_model(std::string(to_string(axis)) + " sweep values must be > 0");
    }
    settings.icsa.validate();
    settings.baselines.validate();
  }
};

inline ExperimentSpec experiment_from_json(const json& j) {
  ExperimentSpec spec;
  if (j.contains("scenario")) spec.scenario = scenario_from_json(j.at("scenario"));
  if (j.contains("algorithms")) {
    spec.algorithms.clear();
    for (const auto& a : j.at("algorithms")) spec.algorithms.push_back(algorithm_from_string(a.get<std::string>()));
  }
  spec.repeats = j.value("repeats", spec.repeats);
  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    spec.axis = sweep_axis_from_string(s.value("axis", std::string("task_count")));
    if (s.contains("values")) spec.values = s.at("values").get<std::vector<double>>();
  }
  spec.settings = settings_from_json(j);
  if (j.contains("energy")) spec.energy = energy_model_from_json(j.at("energy"));
  if (j.contains("output_dir")) spec.output_dir = j.at("output_dir").get<std::string>();
  spec.validate();
  return spec;
}

inline json to_json(const ExperimentSpec& s) {
  json algos = json::array();
  for (auto a : s.algorithms) algos.push_back(to_string(a));
  json j = to_json(s.settings);
  j["scenario"] = to_json(s.scenario);
  j["algorithms"] = algos;
  j["repeats"] = s.repeats;
  j["sweep"] = {{"axis", to_string(s.axis)}, {"values", s.values}};
  j["energy"] = to_json(s.energy);
  return j;
}

// ---------------------------------------------------------------------------
// One cell = (sweep value, algorithm, seed)
// ---------------------------------------------------------------------------

struct CellKey {
  double sweep_value;
  Algorithm algorithm;
  std::uint64_t seed;
};

struct CellResult {
  CellKey key;
  double makespan = 0.0;
  double energy = 0.0;
  double mean_response = 0.0;
  std::size_t evaluations = 0;
};

/// Scenario at one sweep point (workload-shaping axes only).
inline Scenario scenario_at(const ExperimentSpec& spec, double value, std::uint64_t seed) {
  Scenario s = spec.scenario;
  s.seed = seed;
  if (spec.axis == SweepAxis::task_count) s.task_count = static_cast<std::size_t>(value);
  if (spec.axis == SweepAxis::arrival_rate) {
    s.arrivals.kind = ArrivalKind::poisson;
    s.arrivals.rate = value;
  }
  return s;
}

inline OptimizerSettings settings_at(const ExperimentSpec& spec, double value) {
  OptimizerSettings st = spec.settings;
  if (spec.axis == SweepAxis::generations) {
    st.icsa.max_generations = static_cast<std::size_t>(value);
    BaselineConfig matched = BaselineConfig::matched_to(st.icsa);
    matched.de.scale = st.baselines.de.scale;
    matched.de.crossover = st.baselines.de.crossover;
    matched.weights = st.baselines.weights;
    st.baselines = matched;
  }
  return st;
}

/// Arrival times drawn for the scenario as a Poisson stream (response-time
/// measurements), sharing task lengths with the batch workload.
inline Workload poisson_variant(Scenario s) {
  s.arrivals.kind = ArrivalKind::poisson;
  return generate_workload(s);
}

inline CellResult run_cell(const ExperimentSpec& spec, const CellKey& key) {
  const Scenario sc = scenario_at(spec, key.sweep_value, key.seed);
  const OptimizerSettings st = settings_at(spec, key.sweep_value);
  EnergyModel em = spec.energy;
  if (spec.axis == SweepAxis::utilization_threshold) em.sleep_utilization_threshold = key.sweep_value;
  const std::uint64_t algo_seed = derive_seed(key.seed, static_cast<std::uint64_t>(key.algorithm) + 101);

  Scenario batch_sc = sc;
  batch_sc.arrivals.kind = ArrivalKind::all_at_zero;
  const Problem batch = to_problem(generate_workload(batch_sc), em);
  const Problem streamed = to_problem(poisson_variant(sc), em);

  CellResult res{key};
  if (spec.axis == SweepAxis::scheduling_cycle) {
    // Arrivals are collected into windows of the cycle length; each window is
    // optimized on its own and dispatched when it closes.
    const double cycle = key.sweep_value;
    std::map<std::size_t, std::vector<std::size_t>> windows;
    for (const auto& t : streamed.tasks)
      windows[static_cast<std::size_t>(std::floor(t.arrival_time() / cycle))].push_back(t.id());
    Allocation merged;
    merged.genes.resize(streamed.task_count());
    std::vector<double> release(streamed.task_count());
    std::size_t batch_index = 0;
    for (const auto& [w, ids] : windows) {
      std::vector<Task> sub_tasks;
      for (std::size_t k = 0; k < ids.size(); ++k)
        sub_tasks.emplace_back(k, streamed.tasks[ids[k]].length(), 0.0);
      const Problem sub = make_problem(std::move(sub_tasks), streamed.resources, em);
      const auto r = run_algorithm(key.algorithm, sub, st, derive_seed(algo_seed, batch_index++));
      res.evaluations += r.trace.evaluations;
      for (std::size_t k = 0; k < ids.size(); ++k) {
        merged.genes[ids[k]] = r.best.genes[k];
        release[ids[k]] = static_cast<double>(w + 1) * cycle;
      }
    }
    const auto out = simulate(merged, streamed, release);
    res.makespan = out.makespan;
    res.energy = out.total_energy;
    res.mean_response = out.mean_response;
    return res;
  }

  const auto r = run_algorithm(key.algorithm, batch, st, algo_seed);
  res.evaluations = r.trace.evaluations;
  const auto streamed_out = simulate(r.best, streamed);
  res.mean_response = streamed_out.mean_response;
  if (spec.axis == SweepAxis::arrival_rate) {
    res.makespan = streamed_out.makespan;
    res.energy = streamed_out.total_energy;
  } else {
    const auto batch_out = simulate(r.best, batch);
    res.makespan = batch_out.makespan;
    res.energy = batch_out.total_energy;
  }
  return res;
}

// ---------------------------------------------------------------------------
// Whole bench
// ---------------------------------------------------------------------------

/// Worker count: GREENSCHED_THREADS if set, else hardware concurrency.
inline unsigned worker_count() {
  if (const char* env = std::getenv("GREENSCHED_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

struct BenchFailure {
  CellKey key;
  std::string message;
};

struct BenchReport {
  std::vector<CellResult> rows;  // sorted by (sweep value, algorithm name, seed)
  std::vector<BenchFailure> failures;
};

inline std::vector<CellKey> bench_cells(const ExperimentSpec& spec) {
  std::vector<CellKey> cells;
  for (double v : spec.values)
    for (auto a : spec.algorithms)
      for (std::size_t r = 0; r < spec.repeats; ++r) cells.push_back({v, a, spec.scenario.seed + r});
  std::stable_sort(cells.begin(), cells.end(), [](const CellKey& x, const CellKey& y) {
    if (x.sweep_value != y.sweep_value) return x.sweep_value < y.sweep_value;
    const std::string ax = to_string(x.algorithm), ay = to_string(y.algorithm);
    if (ax != ay) return ax < ay;
    return x.seed < y.seed;
  });
  return cells;
}

inline BenchReport run_bench(const ExperimentSpec& spec, unsigned threads = worker_count()) {
  spec.validate();
  const auto cells = bench_cells(spec);
  std::vector<CellResult> results(cells.size());
  std::vector<std::string> errors(cells.size());
  detail::parallel_for(cells.size(), threads, [&](std::size_t i) {
    try {
      results[i] = run_cell(spec, cells[i]);
    } catch (const std::exception& e) {
      errors[i] = e.what();
      if (errors[i].empty()) errors[i] = "unknown error";
    }
  });
  BenchReport report;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (errors[i].empty()) report.rows.push_back(results[i]);
    else report.failures.push_back({cells[i], errors[i]});
  }
  return report;
}

inline constexpr const char* kBenchHeader = "sweep_value,algorithm,seed,makespan_s,energy_j,mean_response_s";
inline constexpr const char* kSummaryHeader =
    "sweep_value,algorithm,runs,makespan_mean_s,makespan_std_s,energy_mean_j,energy_std_j,"
    "mean_response_mean_s,mean_response_std_s,evaluations_mean";
inline constexpr const char* kEvaluationsHeader = "sweep_value,algorithm,seed,evaluations";

inline void write_bench_csv(std::ostream& os, const BenchReport& report) {
  os << kBenchHeader << '\n';
  for (const auto& r : report.rows) {
    csv::Row row(os);
    row << r.key.sweep_value << to_string(r.key.algorithm) << r.key.seed << r.makespan << r.energy
        << r.mean_response;
  }
  for (const auto& f : report.failures) {
    std::string msg = f.message;
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    os << "# FAILED sweep_value=" << csv::format_double(f.key.sweep_value)
       << " algorithm=" << to_string(f.key.algorithm) << " seed=" << f.key.seed << ": " << msg << '\n';
  }
}

inline void write_evaluations_csv(std::ostream& os, const BenchReport& report) {
  os << kEvaluationsHeader << '\n';
  for (const auto& r : report.rows) {
    csv::Row row(os);
    row << r.key.sweep_value << to_string(r.key.algorithm) << r.key.seed << r.evaluations;
  }
}

struct SummaryRow {
  double sweep_value;
  std::string algorithm;
  std::size_t runs = 0;
  double makespan_mean = 0, makespan_std = 0;
  double energy_mean = 0, energy_std = 0;
  double response_mean = 0, response_std = 0;
  double evaluations_mean = 0;
};

namespace detail {
inline std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double s = 0.0;
  for (double x : v) s += x;
  const double mean = s / static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}
}  // namespace detail

inline std::vector<SummaryRow> summarize(const BenchReport& report) {
  std::vector<SummaryRow> out;
  std::size_t i = 0;
  while (i < report.rows.size()) {
    const auto& first = report.rows[i];
    std::vector<double> ms, en, rs, ev;
    std::size_t j = i;
    while (j < report.rows.size() && report.rows[j].key.sweep_value == first.key.sweep_value &&
           report.rows[j].key.algorithm == first.key.algorithm) {
      ms.push_back(report.rows[j].makespan);
      en.push_back(report.rows[j].energy);
      rs.push_back(report.rows[j].mean_response);
      ev.push_back(static_cast<double>(report.rows[j].evaluations));
      ++j;
    }
    SummaryRow s{first.key.sweep_value, to_string(first.key.algorithm), j - i};
    std::tie(s.makespan_mean, s.makespan_std) = detail::mean_std(ms);
    std::tie(s.energy_mean, s.energy_std) = detail::mean_std(en);
    std::tie(s.response_mean, s.response_std) = detail::mean_std(rs);
    s.evaluations_mean = detail::mean_std(ev).first;
    out.push_back(s);
    i = j;
  }
  return out;
}

inline void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
  os << kSummaryHeader << '\n';
  for (const auto& s : rows) {
    csv::Row row(os);
    row << s.sweep_value << s.algorithm << s.runs << s.makespan_mean << s.makespan_std << s.energy_mean
        << s.energy_std << s.response_mean << s.response_std << s.evaluations_mean;
  }
}

/// gnuplot script plotting one summary metric (mean with std error bars)
/// per algorithm against the sweep axis.
inline std::string gnuplot_script(const ExperimentSpec& spec, const std::string& metric,
                                  int mean_column, const std::string& ylabel) {
  std::ostringstream gp;
  std::string algos;
  for (auto a : spec.algorithms) algos += std::string(algos.empty() ? "" : " ") + to_string(a);
  gp << "set datafile separator ','\n"
     << "set terminal pngcairo size 900,600\n"
     << "set output '" << metric << ".png'\n"
     << "set key outside right\n"
     << "set xlabel '" << to_string(spec.axis) << "'\n"
     << "set ylabel '" << ylabel << "'\n"
     << "algos = \"" << algos << "\"\n"
     << "plot for [a in algos] 'summary.csv' every ::1 using 1:(strcol(2) eq a ? $" << mean_column
     << " : NaN):" << mean_column + 1 << " with yerrorlines title a\n";
  return gp.str();
}

/// Writes results.csv, summary.csv, evaluations.csv, parameters.json and one
/// gnuplot script per metric into `dir`.
inline void write_bench_outputs(const std::filesystem::path& dir, const ExperimentSpec& spec,
                                const BenchReport& report) {
  std::ostringstream results, summary, evals;
  write_bench_csv(results, report);
  write_summary_csv(summary, summarize(report));
  write_evaluations_csv(evals, report);
  write_text_file(dir / "results.csv", results.str());
  write_text_file(dir / "summary.csv", summary.str());
  write_text_file(dir / "evaluations.csv", evals.str());
  write_json_file(dir / "parameters.json", to_json(spec));
  write_text_file(dir / "makespan.gp", gnuplot_script(spec, "makespan", 4, "makespan (s)"));
  write_text_file(dir / "energy.gp", gnuplot_script(spec, "energy", 6, "energy (J)"));
  write_text_file(dir / "response.gp", gnuplot_script(spec, "response", 8, "mean response time (s)"));
}

}  // namespace greensched
