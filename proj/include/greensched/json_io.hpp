#pragma once

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "greensched/baselines.hpp"
#include "greensched/core_model.hpp"
#include "greensched/energy_time.hpp"
#include "greensched/icsa.hpp"
#include "greensched/simulator.hpp"

namespace greensched {

class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using json = nlohmann::json;

// -- core types --------------------------------------------------------------

inline json to_json(const Task& t) {
  return {{"id", t.id()}, {"length", t.length()}, {"arrival_time", t.arrival_time()}};
}
inline Task task_from_json(const json& j) {
  return Task(j.at("id").get<std::size_t>(), j.at("length").get<double>(),
              j.value("arrival_time", 0.0));
}

inline json to_json(const DvfsLevel& l) { return {{"voltage", l.voltage()}, {"frequency", l.frequency()}}; }
inline DvfsLevel level_from_json(const json& j) {
  return DvfsLevel(j.at("voltage").get<double>(), j.at("frequency").get<double>());
}

inline json table_to_json(const std::vector<DvfsLevel>& table) {
  json arr = json::array();
  for (const auto& l : table) arr.push_back(to_json(l));
  return arr;
}
inline std::vector<DvfsLevel> table_from_json(const json& j) {
  std::vector<DvfsLevel> t;
  for (const auto& e : j) t.push_back(level_from_json(e));
  return t;
}

inline json to_json(const Resource& r) {
  return {{"id", r.id()},
          {"dvfs_table", table_to_json(r.dvfs_table())},
          {"gamma", r.gamma()},
          {"sleep_level", to_json(r.sleep_level())},
          {"lambda", r.lambda()},
          {"mips", r.mips()}};
}
inline Resource resource_from_json(const json& j) {
  return Resource(j.at("id").get<std::size_t>(),
                  j.contains("dvfs_table") ? table_from_json(j.at("dvfs_table")) : default_dvfs_table(),
                  j.value("gamma", 1.0),
                  j.contains("sleep_level") ? level_from_json(j.at("sleep_level")) : default_sleep_level(),
                  j.value("lambda", 0.0), j.at("mips").get<double>());
}

inline json to_json(const EtcMatrix& m) {
  return {{"tasks", m.tasks()}, {"resources", m.resources()}, {"ct", m.rows()}};
}
inline EtcMatrix etc_from_json(const json& j) {
  const auto rows = j.at("ct").get<std::vector<std::vector<double>>>();
  const std::size_t n = j.value("tasks", rows.size());
  const std::size_t m = j.value("resources", rows.empty() ? std::size_t{0} : rows.front().size());
  if (rows.size() != n) throw structural_error("etc.json: row count does not match 'tasks'");
  std::vector<double> flat;
  for (const auto& row : rows) {
    if (row.size() != m) throw structural_error("etc.json: row length does not match 'resources'");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  return EtcMatrix(n, m, std::move(flat));
}

inline json to_json(const Allocation& a) {
  json genes = json::array();
  for (const auto& g : a.genes) genes.push_back({{"resource_index", g.resource}, {"level_index", g.level}});
  return {{"genes", genes}};
}
inline Allocation allocation_from_json(const json& j) {
  Allocation a;
  for (const auto& g : j.at("genes"))
    a.genes.push_back({g.at("resource_index").get<std::size_t>(), g.at("level_index").get<std::size_t>()});
  return a;
}

inline json to_json(const ObjectiveVector& o) {
  return {{"energy_j", o.total_energy}, {"makespan_s", o.makespan}};
}
inline ObjectiveVector objectives_from_json(const json& j) {
  return {j.at("energy_j").get<double>(), j.at("makespan_s").get<double>()};
}

// -- configuration -----------------------------------------------------------

inline json to_json(const ObjectiveWeights& w) { return {{"energy", w.energy}, {"makespan", w.makespan}}; }
inline ObjectiveWeights weights_from_json(const json& j) {
  ObjectiveWeights w;
  w.energy = j.value("energy", w.energy);
  w.makespan = j.value("makespan", 1.0 - w.energy);
  w.validate();
  return w;
}

inline json to_json(const EnergyModel& e) {
  return {{"formula", to_string(e.formula)}, {"sleep_utilization_threshold", e.sleep_utilization_threshold}};
}
inline EnergyModel energy_model_from_json(const json& j) {
  EnergyModel e;
  if (j.contains("formula")) e.formula = energy_formula_from_string(j.at("formula").get<std::string>());
  e.sleep_utilization_threshold = j.value("sleep_utilization_threshold", e.sleep_utilization_threshold);
  return e;
}

inline json to_json(const IcsaConfig& c) {
  json j = {{"population_size", c.population_size},
            {"max_generations", c.max_generations},
            {"clone_factor", c.clone_factor},
            {"affinity", c.affinity_form == AffinityForm::normalized ? "normalized" : "literal"},
            {"threads", c.threads}};
  j["mutation_prob"] = c.mutation_prob ? json(*c.mutation_prob) : json(nullptr);
  return j;
}
inline void icsa_from_json(const json& j, IcsaConfig& c) {
  c.population_size = j.value("population_size", c.population_size);
  c.max_generations = j.value("max_generations", c.max_generations);
  c.clone_factor = j.value("clone_factor", c.clone_factor);
  c.threads = j.value("threads", c.threads);
  if (j.contains("mutation_prob") && !j.at("mutation_prob").is_null())
    c.mutation_prob = j.at("mutation_prob").get<double>();
  if (j.contains("affinity")) {
    const auto s = j.at("affinity").get<std::string>();
    if (s == "normalized") c.affinity_form = AffinityForm::normalized;
    else if (s == "literal") c.affinity_form = AffinityForm::literal;
    else throw invalid_model("unknown affinity form '" + s + "'");
  }
}

inline json to_json(const BaselineConfig& c) {
  return {{"de", {{"population", c.de.population}, {"scale", c.de.scale},
                  {"crossover", c.de.crossover}, {"generations", c.de.generations}}},
          {"emls", {{"starts", c.emls.starts}, {"budget_per_start", c.emls.budget_per_start}}}};
}
inline void baselines_from_json(const json& j, BaselineConfig& c) {
  if (j.contains("de")) {
    const auto& d = j.at("de");
    c.de.population = d.value("population", c.de.population);
    c.de.scale = d.value("scale", c.de.scale);
    c.de.crossover = d.value("crossover", c.de.crossover);
    c.de.generations = d.value("generations", c.de.generations);
  }
  if (j.contains("emls")) {
    const auto& e = j.at("emls");
    c.emls.starts = e.value("starts", c.emls.starts);
    c.emls.budget_per_start = e.value("budget_per_start", c.emls.budget_per_start);
  }
}

/// Reads icsa / baselines / weights sections. Baseline budgets default to
/// the ICSA evaluation budget unless given explicitly.
inline OptimizerSettings settings_from_json(const json& j) {
  OptimizerSettings s;
  if (j.contains("icsa")) icsa_from_json(j.at("icsa"), s.icsa);
  s.baselines = BaselineConfig::matched_to(s.icsa);
  if (j.contains("baselines")) baselines_from_json(j.at("baselines"), s.baselines);
  if (j.contains("weights")) {
    s.icsa.weights = weights_from_json(j.at("weights"));
    s.baselines.weights = s.icsa.weights;
  }
  s.icsa.validate();
  s.baselines.validate();
  return s;
}

inline json to_json(const OptimizerSettings& s) {
  return {{"icsa", to_json(s.icsa)}, {"baselines", to_json(s.baselines)}, {"weights", to_json(s.icsa.weights)}};
}

inline json to_json(const Scenario& s) {
  json j = {{"hosts", s.hosts},
            {"cpus_per_host", s.cpus_per_host},
            {"mips", s.mips},
            {"task_count", s.task_count},
            {"length_range_mi", {s.length_min_mi, s.length_max_mi}},
            {"seed", s.seed},
            {"gamma", s.gamma},
            {"lambda", s.lambda},
            {"dvfs_table", table_to_json(s.dvfs_table)},
            {"sleep_level", to_json(s.sleep_level)},
            {"ram_gb", s.ram_gb},
            {"storage_tb", s.storage_tb}};
  if (s.mips_range) j["mips_range"] = {s.mips_range->first, s.mips_range->second};
  json arr = {{"model", s.arrivals.kind == ArrivalKind::poisson ? "poisson" : "all_at_zero"}};
  if (s.arrivals.rate) arr["rate"] = *s.arrivals.rate;
  j["arrivals"] = arr;
  return j;
}

inline Scenario scenario_from_json(const json& j) {
  Scenario s;
  if (j.contains("preset")) {
    const auto p = j.at("preset").get<std::string>();
    if (p == "six_host") s = Scenario::six_host_default();
    else if (p == "sixteen_processor") s = Scenario::sixteen_processor();
    else throw invalid_model("unknown scenario preset '" + p + "'");
  }
  s.hosts = j.value("hosts", s.hosts);
  s.cpus_per_host = j.value("cpus_per_host", s.cpus_per_host);
  s.mips = j.value("mips", s.mips);
  if (j.contains("mips_range")) {
    const auto r = j.at("mips_range").get<std::vector<double>>();
    if (r.size() != 2) throw invalid_model("mips_range must be [lo, hi]");
    s.mips_range = std::pair{r[0], r[1]};
  }
  s.task_count = j.value("task_count", s.task_count);
  if (j.contains("length_range_mi")) {
    const auto r = j.at("length_range_mi").get<std::vector<double>>();
    if (r.size() != 2) throw invalid_model("length_range_mi must be [min, max]");
    s.length_min_mi = r[0];
    s.length_max_mi = r[1];
  }
  s.seed = j.value("seed", s.seed);
  s.gamma = j.value("gamma", s.gamma);
  s.lambda = j.value("lambda", s.lambda);
  if (j.contains("dvfs_table")) s.dvfs_table = table_from_json(j.at("dvfs_table"));
  if (j.contains("sleep_level")) s.sleep_level = level_from_json(j.at("sleep_level"));
  s.ram_gb = j.value("ram_gb", s.ram_gb);
  s.storage_tb = j.value("storage_tb", s.storage_tb);
  if (j.contains("arrivals")) {
    const auto& a = j.at("arrivals");
    const auto model = a.value("model", std::string("all_at_zero"));
    if (model == "poisson") s.arrivals.kind = ArrivalKind::poisson;
    else if (model == "all_at_zero") s.arrivals.kind = ArrivalKind::all_at_zero;
    else throw invalid_model("unknown arrival model '" + model + "'");
    if (a.contains("rate") && !a.at("rate").is_null()) s.arrivals.rate = a.at("rate").get<double>();
  }
  s.validate();
  return s;
}

// -- files -------------------------------------------------------------------

inline json read_json_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw io_error("cannot open " + p.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw io_error(p.string() + ": " + e.what());
  }
}

inline void write_text_file(const std::filesystem::path& p, const std::string& text) {
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot write " + p.string());
  out << text;
  if (!out) throw io_error("write failed for " + p.string());
}

inline void write_json_file(const std::filesystem::path& p, const json& j) {
  write_text_file(p, j.dump(2) + "\n");
}

/// tasks.json, resources.json and etc.json in one directory.
inline void write_workload(const std::filesystem::path& dir, const Workload& w) {
  json tasks = json::array();
  for (const auto& t : w.tasks) tasks.push_back(to_json(t));
  json res = json::array();
  for (const auto& r : w.resources) res.push_back(to_json(r));
  write_json_file(dir / "tasks.json", {{"tasks", tasks}});
  write_json_file(dir / "resources.json", {{"resources", res}});
  write_json_file(dir / "etc.json", to_json(w.etc));
}

inline Workload read_workload(const std::filesystem::path& dir) {
  Workload w;
  const json tasks = read_json_file(dir / "tasks.json");
  for (const auto& t : tasks.at("tasks")) w.tasks.push_back(task_from_json(t));
  const json resources = read_json_file(dir / "resources.json");
  for (const auto& r : resources.at("resources")) w.resources.push_back(resource_from_json(r));
  const auto etc_path = dir / "etc.json";
  w.etc = std::filesystem::exists(etc_path) ? etc_from_json(read_json_file(etc_path))
                                            : EtcMatrix::from_lengths(w.tasks, w.resources);
  return w;
}

}  // namespace greensched
