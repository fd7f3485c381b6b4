// greensched: workload generation, single runs, benchmarks and exhaustive
// verification for DVFS-aware task allocation.
//
// Exit codes: 0 success, 2 usage error, 1 runtime error.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "greensched/greensched.hpp"

namespace {

using namespace greensched;

constexpr int kUsageError = 2;
constexpr int kRuntimeError = 1;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> algos;
  std::optional<std::size_t> repeats;
  std::string workload;
};

json load_config(const std::string& path) { return path.empty() ? json::object() : read_json_file(path); }

ExperimentSpec load_spec(const Options& o) {
  json j = load_config(o.config);
  if (o.repeats) j["repeats"] = *o.repeats;
  if (!o.algos.empty()) j["algorithms"] = o.algos;
  ExperimentSpec spec = experiment_from_json(j);
  if (o.seed) spec.scenario.seed = *o.seed;
  return spec;
}

int do_generate(const Options& o) {
  const ExperimentSpec spec = load_spec(o);
  const auto dirs = cmd_generate(spec, o.out.empty() ? "workloads" : o.out);
  for (const auto& d : dirs) std::cout << d.string() << '\n';
  return 0;
}

int do_run(const Options& o) {
  if (o.algos.size() != 1) throw CLI::ValidationError("--algo", "run takes exactly one algorithm");
  const Algorithm algo = algorithm_from_string(o.algos.front());
  const json j = load_config(o.config);
  const OptimizerSettings settings = settings_from_json(j);
  const EnergyModel energy = j.contains("energy") ? energy_model_from_json(j.at("energy")) : EnergyModel{};
  const Problem problem = load_problem(o.workload, energy);
  const auto summary = cmd_run(algo, problem, settings, o.seed.value_or(1), o.out);
  std::cout << summary.line() << '\n';
  return 0;
}

int do_bench(const Options& o) {
  const ExperimentSpec spec = load_spec(o);
  const auto out = o.out.empty() ? spec.output_dir : std::filesystem::path(o.out);
  const auto report = cmd_bench(spec, out);
  for (const auto& s : summarize(report))
    std::cout << csv::format_double(s.sweep_value) << ' ' << s.algorithm
              << " makespan_s=" << csv::format_double(s.makespan_mean)
              << " energy_j=" << csv::format_double(s.energy_mean)
              << " mean_response_s=" << csv::format_double(s.response_mean) << '\n';
  if (!report.failures.empty()) {
    std::cerr << report.failures.size() << " bench cell(s) failed; see results.csv\n";
    return kRuntimeError;
  }
  return 0;
}

int do_oracle(const Options& o) {
  const json j = load_config(o.config);
  const ObjectiveWeights w = j.contains("weights") ? weights_from_json(j.at("weights")) : ObjectiveWeights{};
  const EnergyModel energy = j.contains("energy") ? energy_model_from_json(j.at("energy")) : EnergyModel{};
  const Problem problem = load_problem(o.workload, energy);
  const auto r = cmd_oracle(problem, w, o.out);
  std::cout << "candidates=" << r.candidates << " score=" << csv::format_double(r.optimum_score)
            << " makespan_s=" << csv::format_double(r.optimum_objectives.makespan)
            << " energy_j=" << csv::format_double(r.optimum_objectives.total_energy)
            << " allocation=" << allocation_compact(r.optimum) << '\n';
  std::cout << "pareto_points=" << r.pareto.size() << '\n';
  for (const auto& p : r.pareto)
    std::cout << "  energy_j=" << csv::format_double(p.objectives.total_energy)
              << " makespan_s=" << csv::format_double(p.objectives.makespan) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"greensched: DVFS-aware task allocation optimizer and simulator"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON configuration file");
    sub->add_option("--seed", o.seed, "Base seed (u64)");
    sub->add_option("--out", o.out, "Output directory");
  };

  auto* gen = app.add_subcommand("generate", "Write workload files for every sweep point");
  add_common(gen);

  auto* run = app.add_subcommand("run", "Run one optimizer on a workload and simulate the result");
  add_common(run);
  run->add_option("--algo", o.algos, "Algorithm tag")->required()->expected(1);
  run->add_option("--workload", o.workload, "Workload directory")->required();

  auto* bench = app.add_subcommand("bench", "Sweep x algorithm x repeat comparison");
  add_common(bench);
  bench->add_option("--algo", o.algos, "Algorithm tag (repeatable)");
  bench->add_option("--repeats", o.repeats, "Independent seeds per cell")->check(CLI::PositiveNumber);

  auto* oracle = app.add_subcommand("oracle", "Exhaustive optimum and Pareto set of a small workload");
  add_common(oracle);
  oracle->add_option("--workload", o.workload, "Workload directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*gen) return do_generate(o);
    if (*run) return do_run(o);
    if (*bench) return do_bench(o);
    if (*oracle) return do_oracle(o);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const unknown_algorithm& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kUsageError;
}
