#include <gtest/gtest.h>

#include <atomic>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "greensched/commands.hpp"
#include "support.hpp"

using namespace greensched;

namespace {

const fs::path kToy = fs::path(GREENSCHED_FIXTURE_DIR) / "toy4";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  static std::atomic<int> counter{0};
  const fs::path dir = fs::temp_directory_path() /
                       ("greensched-" + name + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

/// Cheap experiment: small task counts, short runs.
ExperimentSpec small_spec() {
  ExperimentSpec s;
  s.scenario.hosts = 2;
  s.scenario.cpus_per_host = 2;
  s.scenario.task_count = 12;
  s.repeats = 2;
  s.values = {8, 12};
  s.settings.icsa.population_size = 10;
  s.settings.icsa.max_generations = 8;
  s.settings.baselines = BaselineConfig::matched_to(s.settings.icsa);
  return s;
}

bool all_cells_finite(const std::string& csv_text) {
  std::istringstream in(csv_text);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.rfind("#", 0) == 0) continue;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ','))
      if (cell == "nan" || cell == "inf" || cell == "-inf" || cell.empty()) return false;
  }
  return true;
}

}  // namespace

TEST(ExperimentSpec, JsonParsingAndValidation) {
  const json j = {{"repeats", 3},
                  {"algorithms", {"icsa", "emls"}},
                  {"sweep", {{"axis", "generations"}, {"values", {50, 100}}}},
                  {"icsa", {{"population_size", 20}}},
                  {"scenario", {{"preset", "sixteen_processor"}, {"task_count", 40}}}};
  const auto spec = experiment_from_json(j);
  EXPECT_EQ(spec.repeats, 3u);
  EXPECT_EQ(spec.axis, SweepAxis::generations);
  EXPECT_EQ(spec.algorithms.size(), 2u);
  EXPECT_EQ(spec.scenario.resource_count(), 16u);
  EXPECT_EQ(spec.settings.icsa.population_size, 20u);
  EXPECT_EQ(spec.settings.baselines.de.population, 20u);

  EXPECT_THROW(experiment_from_json({{"sweep", {{"values", {200, 200}}}}}), invalid_model);
  EXPECT_THROW(experiment_from_json({{"repeats", 0}}), invalid_model);
  EXPECT_THROW(experiment_from_json({{"algorithms", {"anneal"}}}), unknown_algorithm);
  EXPECT_THROW(experiment_from_json({{"sweep", {{"axis", "phase_of_moon"}}}}), std::invalid_argument);

  const auto back = experiment_from_json(to_json(spec));
  EXPECT_EQ(back.values, spec.values);
  EXPECT_EQ(back.settings.icsa.population_size, 20u);
}

TEST(ExperimentSpec, GenerationsAxisKeepsBudgetsMatched) {
  ExperimentSpec spec;
  spec.axis = SweepAxis::generations;
  spec.values = {50, 100};
  const auto st = settings_at(spec, 100);
  EXPECT_EQ(st.icsa.max_generations, 100u);
  EXPECT_EQ(st.baselines.de.generations, 100u);
  EXPECT_EQ(st.baselines.emls.budget_per_start, 50u * 101u / 10u - 1u);
}

TEST(Bench, CellCardinality) {
  ExperimentSpec spec;  // 4 algorithms x {200, 400, 500} x 10 repeats
  EXPECT_EQ(bench_cells(spec).size(), 120u);
}

TEST(Bench, RowsSchemaAndOrder) {
  const auto spec = small_spec();
  const auto report = run_bench(spec, 2);
  ASSERT_TRUE(report.failures.empty());
  ASSERT_EQ(report.rows.size(), spec.values.size() * spec.algorithms.size() * spec.repeats);
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    const auto& a = report.rows[i - 1].key;
    const auto& b = report.rows[i].key;
    ASSERT_TRUE(std::make_tuple(a.sweep_value, std::string(to_string(a.algorithm)), a.seed) <
                std::make_tuple(b.sweep_value, std::string(to_string(b.algorithm)), b.seed));
  }

  const fs::path dir = scratch_dir("bench");
  write_bench_outputs(dir, spec, report);
  const std::string results = slurp(dir / "results.csv");
  const std::string summary = slurp(dir / "summary.csv");
  const std::string evals = slurp(dir / "evaluations.csv");
  EXPECT_EQ(results.substr(0, results.find('\n')), "sweep_value,algorithm,seed,makespan_s,energy_j,mean_response_s");
  EXPECT_EQ(summary.substr(0, summary.find('\n')),
            "sweep_value,algorithm,runs,makespan_mean_s,makespan_std_s,energy_mean_j,energy_std_j,"
            "mean_response_mean_s,mean_response_std_s,evaluations_mean");
  EXPECT_EQ(evals.substr(0, evals.find('\n')), "sweep_value,algorithm,seed,evaluations");
  EXPECT_TRUE(all_cells_finite(results));
  EXPECT_TRUE(all_cells_finite(summary));
  EXPECT_EQ(std::count(results.begin(), results.end(), '\n'), 1 + 16);
  EXPECT_EQ(std::count(summary.begin(), summary.end(), '\n'), 1 + 8);
  for (const char* f : {"parameters.json", "makespan.gp", "energy.gp", "response.gp"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  EXPECT_NE(slurp(dir / "makespan.gp").find("summary.csv"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Bench, ByteIdenticalAcrossThreadCounts) {
  const auto spec = small_spec();
  std::ostringstream one, many;
  write_bench_csv(one, run_bench(spec, 1));
  write_bench_csv(many, run_bench(spec, 3));
  EXPECT_EQ(one.str(), many.str());
}

TEST(Bench, FailureMarkerAfterPartialRows) {
  BenchReport r;
  r.rows.push_back({{200, Algorithm::icsa, 1}, 10.0, 20.0, 5.0, 100});
  r.failures.push_back({{200, Algorithm::emls, 2}, "boom\nsecond line"});
  std::ostringstream os;
  write_bench_csv(os, r);
  EXPECT_EQ(os.str(),
            "sweep_value,algorithm,seed,makespan_s,energy_j,mean_response_s\n"
            "200,icsa,1,10,20,5\n"
            "# FAILED sweep_value=200 algorithm=emls seed=2: boom second line\n");
}

TEST(Bench, SummaryUsesSampleStatistics) {
  BenchReport r;
  r.rows.push_back({{1, Algorithm::icsa, 1}, 2.0, 10.0, 1.0, 10});
  r.rows.push_back({{1, Algorithm::icsa, 2}, 4.0, 14.0, 3.0, 30});
  r.rows.push_back({{1, Algorithm::emls, 1}, 7.0, 9.0, 2.0, 20});
  const auto s = summarize(r);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].runs, 2u);
  EXPECT_DOUBLE_EQ(s[0].makespan_mean, 3.0);
  EXPECT_DOUBLE_EQ(s[0].makespan_std, std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(s[0].evaluations_mean, 20.0);
  EXPECT_DOUBLE_EQ(s[1].makespan_std, 0.0);
}

TEST(Bench, InterpretedAxesProduceFiniteRows) {
  for (auto axis : {SweepAxis::utilization_threshold, SweepAxis::scheduling_cycle, SweepAxis::arrival_rate}) {
    ExperimentSpec spec = small_spec();
    spec.algorithms = {Algorithm::icsa, Algorithm::dvs_greedy};
    spec.repeats = 1;
    spec.axis = axis;
    spec.values = axis == SweepAxis::utilization_threshold ? std::vector<double>{0.2, 0.9}
                  : axis == SweepAxis::scheduling_cycle    ? std::vector<double>{1.0, 5.0}
                                                           : std::vector<double>{0.5, 2.0};
    const auto report = run_bench(spec, 1);
    ASSERT_TRUE(report.failures.empty()) << to_string(axis);
    ASSERT_EQ(report.rows.size(), 4u);
    for (const auto& row : report.rows) {
      EXPECT_TRUE(std::isfinite(row.makespan) && row.makespan > 0.0) << to_string(axis);
      EXPECT_TRUE(std::isfinite(row.energy) && row.energy > 0.0) << to_string(axis);
      EXPECT_TRUE(std::isfinite(row.mean_response) && row.mean_response > 0.0) << to_string(axis);
    }
  }
}

TEST(Bench, SchedulingCycleHoldsTasksUntilWindowCloses) {
  ExperimentSpec spec = small_spec();
  spec.algorithms = {Algorithm::dvs_greedy};
  spec.repeats = 1;
  spec.axis = SweepAxis::scheduling_cycle;
  spec.values = {1e6};  // one window; every task waits for it to close
  const auto report = run_bench(spec, 1);
  ASSERT_EQ(report.rows.size(), 1u);
  const Problem streamed = to_problem(poisson_variant(scenario_at(spec, 1e6, spec.scenario.seed)));
  double last_arrival = 0.0;
  for (const auto& t : streamed.tasks) last_arrival = std::max(last_arrival, t.arrival_time());
  EXPECT_GE(report.rows[0].mean_response, 1e6 - last_arrival);
  EXPECT_GE(report.rows[0].makespan, 1e6);
}

TEST(Bench, DefaultBudgetsWithinTenPercent) {
  ExperimentSpec spec;  // default ICSA / DE / EMLS budgets
  spec.scenario.task_count = 20;
  spec.repeats = 1;
  spec.values = {20};
  spec.algorithms = {Algorithm::icsa, Algorithm::idea_de, Algorithm::emls};
  const auto report = run_bench(spec, 1);
  ASSERT_EQ(report.rows.size(), 3u);
  double icsa = 0.0;
  for (const auto& r : report.rows)
    if (r.key.algorithm == Algorithm::icsa) icsa = static_cast<double>(r.evaluations);
  for (const auto& r : report.rows)
    EXPECT_NEAR(static_cast<double>(r.evaluations) / icsa, 1.0, 0.10) << to_string(r.key.algorithm);
}

TEST(Generate, ShapesAndDeterminism) {
  ExperimentSpec spec;
  const fs::path a = scratch_dir("gen-a"), b = scratch_dir("gen-b");
  const auto dirs = cmd_generate(spec, a);
  cmd_generate(spec, b);
  ASSERT_EQ(dirs.size(), 3u);
  EXPECT_EQ(dirs[0].filename(), "task_count-200");
  EXPECT_EQ(dirs[2].filename(), "task_count-500");

  const auto w = read_workload(dirs[0]);
  EXPECT_EQ(w.tasks.size(), 200u);
  EXPECT_EQ(w.etc.tasks() * w.etc.resources(), 24u * 200u);
  for (const auto& d : dirs)
    for (const char* f : {"tasks.json", "resources.json", "etc.json", "scenario.json"})
      EXPECT_EQ(slurp(d / f), slurp(b / d.filename() / f)) << d << f;
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Oracle, ToyFixtureMatchesIndependentOracle) {
  const json expected = read_json_file(kToy / "expected.json");
  const Problem p = load_problem(kToy);
  const fs::path dir = scratch_dir("oracle");
  const auto r = cmd_oracle(p, {}, dir);
  EXPECT_EQ(r.candidates, expected.at("candidates").get<std::size_t>());
  EXPECT_TRUE(testkit::relative_close(r.optimum_score, expected.at("score").get<double>(), 1e-12));
  EXPECT_TRUE(testkit::relative_close(r.optimum_objectives.total_energy, expected.at("energy_j").get<double>(), 1e-12));
  EXPECT_TRUE(testkit::relative_close(r.optimum_objectives.makespan, expected.at("makespan_s").get<double>(), 1e-12));
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(r.optimum.genes[i].resource, expected.at("genes")[i][0].get<std::size_t>());
    EXPECT_EQ(r.optimum.genes[i].level, expected.at("genes")[i][1].get<std::size_t>());
  }
  const std::string pareto = slurp(dir / "pareto.csv");
  EXPECT_EQ(pareto.substr(0, pareto.find('\n')), "energy_j,makespan_s,allocation");
  EXPECT_TRUE(fs::exists(dir / "optimum.json"));
  fs::remove_all(dir);
}

TEST(Oracle, SingleTaskIsPerOptionMinimum) {
  const auto p = testkit::random_problem(21, 1, 3, 4);
  const auto r = exhaustive_search(p, {});
  EXPECT_EQ(r.candidates, 12u);
  EXPECT_TRUE(testkit::relative_close(r.optimum_score, testkit::brute_force_best_score(p, {}), 1e-15));
}

TEST(Oracle, ParetoSetIsMutuallyNonDominatedAndComplete) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = testkit::random_problem(seed, 4, 2, 2);
    const auto r = exhaustive_search(p, {});
    ASSERT_EQ(r.candidates, 256u);
    for (const auto& a : r.pareto)
      for (const auto& b : r.pareto) ASSERT_FALSE(dominates(a.objectives, b.objectives));
    std::vector<ObjectiveVector> all;
    testkit::for_each_allocation(p, [&](const Allocation& a) { all.push_back(evaluate(a, p)); });
    for (const auto& o : all) {
      bool dominated = false;
      for (const auto& q : all) dominated |= dominates(q, o);
      if (dominated) continue;
      bool listed = false;
      for (const auto& f : r.pareto) listed |= f.objectives == o;
      ASSERT_TRUE(listed) << seed;
    }
    for (const auto& f : r.pareto) ASSERT_EQ(evaluate(f.allocation, p), f.objectives);
  }
}

TEST(Oracle, RefusesOversizedSpace) {
  const auto p = testkit::random_problem(1, 12, 4, 4);  // 16^12
  EXPECT_THROW(exhaustive_search(p, {}), search_space_too_large);
}

TEST(Run, IcsaOnToyMatchesOracle) {
  const json expected = read_json_file(kToy / "expected.json");
  const Problem p = load_problem(kToy);
  OptimizerSettings st;
  st.icsa.population_size = 20;
  st.icsa.max_generations = 50;
  const fs::path dir = scratch_dir("run");
  const auto s = cmd_run(Algorithm::icsa, p, st, 1, dir);
  EXPECT_TRUE(testkit::relative_close(s.result.score, expected.at("score").get<double>(), 1e-12));
  EXPECT_TRUE(testkit::relative_close(s.outcome.makespan, expected.at("makespan_s").get<double>(), 1e-12));
  EXPECT_EQ(s.line().rfind("icsa makespan_s=", 0), 0u);
  EXPECT_NE(s.line().find(" energy_j="), std::string::npos);
  EXPECT_NE(s.line().find(" mean_response_s="), std::string::npos);

  const std::string schedule = slurp(dir / "schedule.csv");
  const std::string trace = slurp(dir / "trace.csv");
  EXPECT_EQ(trace.substr(0, trace.find('\n')), "generation,best_affinity,best_makespan_s,best_energy_j,mean_affinity");
  EXPECT_EQ(std::count(trace.begin(), trace.end(), '\n'), 1 + 51);
  EXPECT_TRUE(all_cells_finite(schedule));
  EXPECT_TRUE(all_cells_finite(trace));

  const fs::path again = scratch_dir("run-again");
  cmd_run(Algorithm::icsa, p, st, 1, again);
  for (const char* f : {"schedule.csv", "resources.csv", "allocation.json"})
    EXPECT_EQ(slurp(dir / f), slurp(again / f)) << f;
  fs::remove_all(dir);
  fs::remove_all(again);
}

TEST(Run, RoundRobinOnSymmetricInstance) {
  std::vector<Task> tasks{Task(0, 500.0), Task(1, 800.0)};
  std::vector<Resource> res{Resource::with_defaults(0, 100.0), Resource::with_defaults(1, 100.0)};
  const Problem p = make_problem(std::move(tasks), std::move(res));
  const auto s = cmd_run(Algorithm::round_robin, p, {}, 1, {});
  EXPECT_DOUBLE_EQ(s.outcome.makespan, 8.0);
}

TEST(Run, MissingWorkloadIsIoError) {
  EXPECT_THROW(load_problem(fs::path(GREENSCHED_FIXTURE_DIR) / "does-not-exist"), io_error);
}
