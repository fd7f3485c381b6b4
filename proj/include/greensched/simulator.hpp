#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "greensched/core_model.hpp"
#include "greensched/csv.hpp"
#include "greensched/energy_time.hpp"
#include "greensched/random.hpp"

namespace greensched {

// ---------------------------------------------------------------------------
// Scenario and workload generation
// ---------------------------------------------------------------------------

enum class ArrivalKind { all_at_zero, poisson };

struct ArrivalModel {
  ArrivalKind kind = ArrivalKind::all_at_zero;
  /// Tasks per second. Unset means task_count / 60 (the whole batch spread
  /// over one minute).
  std::optional<double> rate;
};

struct Scenario {
  std::size_t hosts = 6;
  std::size_t cpus_per_host = 4;
  double mips = 10000.0;
  /// When set, each CPU draws its MIPS uniformly from [lo, hi] instead.
  std::optional<std::pair<double, double>> mips_range;
  std::size_t task_count = 200;
  ArrivalModel arrivals;
  double length_min_mi = 1e5;
  double length_max_mi = 4e5;
  std::uint64_t seed = 1;

  std::vector<DvfsLevel> dvfs_table = default_dvfs_table();
  DvfsLevel sleep_level = default_sleep_level();
  double gamma = 1.0;
  double lambda = 0.0;

  // Recorded host properties; the compute-only model does not use them.
  double ram_gb = 8.0;
  double storage_tb = 2.0;

  std::size_t resource_count() const noexcept { return hosts * cpus_per_host; }

  void validate() const {
    if (hosts < 1 || cpus_per_host < 1) throw invalid_model("scenario: hosts and cpus_per_host must be >= 1");
    if (!(mips > 0.0)) throw invalid_model("scenario: mips must be > 0");
    if (mips_range && !(mips_range->first > 0.0 && mips_range->first <= mips_range->second))
      throw invalid_model("scenario: mips_range must satisfy 0 < lo <= hi");
    if (!(length_min_mi > 0.0 && length_min_mi <= length_max_mi))
      throw invalid_model("scenario: task length range must satisfy 0 < min <= max");
    if (arrivals.rate && !(*arrivals.rate > 0.0)) throw invalid_model("scenario: arrival rate must be > 0");
  }

  /// Six hosts with four 10,000 MIPS CPUs each.
  static Scenario six_host_default() { return {}; }

  /// Sixteen DVS processors (four hosts of four CPUs).
  static Scenario sixteen_processor() {
    Scenario s;
    s.hosts = 4;
    return s;
  }
};

struct Workload {
  std::vector<Task> tasks;
  std::vector<Resource> resources;
  EtcMatrix etc;
};

inline std::vector<double> poisson_arrivals(std::size_t n, double rate, Rng& rng) {
  std::vector<double> t(n);
  double now = 0.0;
  for (auto& a : t) {
    now += -std::log1p(-uniform01(rng)) / rate;
    a = now;
  }
  return t;
}

inline double effective_rate(const Scenario& s) {
  if (s.arrivals.rate) return *s.arrivals.rate;
  return std::max<double>(1.0, static_cast<double>(s.task_count)) / 60.0;
}

/// Deterministic per scenario seed. Lengths, arrivals and CPU speeds use
/// independent streams so changing one knob leaves the others unchanged.
inline Workload generate_workload(const Scenario& s) {
  s.validate();
  Rng lengths(derive_seed(s.seed, 1));
  Rng arrivals(derive_seed(s.seed, 2));
  Rng speeds(derive_seed(s.seed, 3));

  Workload w;
  for (std::size_t j = 0; j < s.resource_count(); ++j) {
    const double mips = s.mips_range ? uniform_real(speeds, s.mips_range->first, s.mips_range->second) : s.mips;
    w.resources.emplace_back(j, s.dvfs_table, s.gamma, s.sleep_level, s.lambda, mips);
  }
  std::vector<double> arrive(s.task_count, 0.0);
  if (s.arrivals.kind == ArrivalKind::poisson) arrive = poisson_arrivals(s.task_count, effective_rate(s), arrivals);
  w.tasks.reserve(s.task_count);
  for (std::size_t i = 0; i < s.task_count; ++i)
    w.tasks.emplace_back(i, uniform_real(lengths, s.length_min_mi, s.length_max_mi), arrive[i]);
  w.etc = EtcMatrix::from_lengths(w.tasks, w.resources);
  return w;
}

inline Problem to_problem(Workload w, EnergyModel energy = {}) {
  Problem p{std::move(w.tasks), std::move(w.resources), std::move(w.etc), energy};
  p.validate();
  return p;
}

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

struct TaskOutcome {
  std::size_t task_id = 0;
  std::size_t resource_id = 0;
  std::size_t level = 0;
  double arrival = 0.0;
  double start = 0.0;
  double finish = 0.0;
  double response = 0.0;
};

struct ResourceOutcome {
  std::size_t resource_id = 0;
  double busy = 0.0;
  double idle = 0.0;
  double energy = 0.0;
};

struct ScheduleOutcome {
  std::vector<TaskOutcome> tasks;          // indexed by task id
  std::vector<ResourceOutcome> resources;  // indexed by resource id
  double makespan = 0.0;
  double total_energy = 0.0;
  double mean_response = 0.0;
  double max_response = 0.0;

  ObjectiveVector objectives() const { return {total_energy, makespan}; }
};

namespace detail {

struct SimEvent {
  double time;
  int kind;  // 0 = arrival, 1 = completion; arrivals at one instant are queued first
  std::size_t subject;  // task id for arrivals, resource id for completions

  bool operator>(const SimEvent& o) const {
    return std::tie(time, kind, subject) > std::tie(o.time, o.kind, o.subject);
  }
};

}  // namespace detail

/// Event-driven run of an allocation. Every resource is a non-preemptive FIFO
/// server over its tasks ordered by (release, id). `release` optionally holds
/// per-task dispatch times >= arrival (batched dispatch); response times are
/// always measured from arrival.
inline ScheduleOutcome simulate(const Allocation& alloc, const Problem& problem,
                                std::span<const double> release = {}) {
  problem.validate();
  validate_allocation(alloc, problem.task_count(), problem.resources);
  const std::size_t n = problem.task_count();
  const std::size_t m = problem.resource_count();
  if (!release.empty() && release.size() != n)
    throw structural_error("simulate: release times do not match the task count");

  auto release_of = [&](std::size_t i) {
    return release.empty() ? problem.tasks[i].arrival_time() : release[i];
  };
  for (std::size_t i = 0; i < n; ++i)
    if (release_of(i) < problem.tasks[i].arrival_time())
      throw std::domain_error("simulate: task released before it arrives");

  using QueueKey = std::pair<double, std::size_t>;  // (release, id)
  std::vector<std::priority_queue<QueueKey, std::vector<QueueKey>, std::greater<>>> queues(m);
  std::vector<bool> running(m, false);
  std::vector<double> busy(m, 0.0);
  std::priority_queue<detail::SimEvent, std::vector<detail::SimEvent>, std::greater<>> events;

  ScheduleOutcome out;
  out.tasks.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Gene& g = alloc.genes[i];
    out.tasks[i] = {i, g.resource, g.level, problem.tasks[i].arrival_time(), 0.0, 0.0, 0.0};
    events.push({release_of(i), 0, i});
  }

  while (!events.empty()) {
    const double now = events.top().time;
    while (!events.empty() && events.top().time == now) {
      const auto ev = events.top();
      events.pop();
      if (ev.kind == 0) {
        queues[alloc.genes[ev.subject].resource].push({release_of(ev.subject), ev.subject});
      } else {
        running[ev.subject] = false;
      }
    }
    for (std::size_t j = 0; j < m; ++j) {
      if (running[j] || queues[j].empty()) continue;
      const std::size_t i = queues[j].top().second;
      queues[j].pop();
      const Gene& g = alloc.genes[i];
      const double d = scaled_completion_time(problem.etc(i, j), problem.resources[j].level(g.level));
      out.tasks[i].start = now;
      out.tasks[i].finish = now + d;
      out.tasks[i].response = out.tasks[i].finish - out.tasks[i].arrival;
      busy[j] += d;
      running[j] = true;
      events.push({out.tasks[i].finish, 1, j});
    }
  }

  double ms = 0.0;
  for (const auto& t : out.tasks) ms = std::max(ms, t.finish);
  out.makespan = ms;
  const auto energy = resource_energies(alloc, problem, busy, ms);
  out.resources.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    out.resources[j] = {j, busy[j], std::max(0.0, ms - busy[j]), energy[j]};
    out.total_energy += energy[j];
  }
  double sum = 0.0;
  for (const auto& t : out.tasks) {
    sum += t.response;
    out.max_response = std::max(out.max_response, t.response);
  }
  out.mean_response = n ? sum / static_cast<double>(n) : 0.0;
  return out;
}

struct ResponseStats {
  double mean = 0.0;
  double p95 = 0.0;
  double max = 0.0;
};

/// Mean, nearest-rank 95th percentile and maximum of per-task response times.
inline ResponseStats response_stats(const ScheduleOutcome& outcome) {
  if (outcome.tasks.empty()) throw std::domain_error("response_stats: empty outcome");
  std::vector<double> r;
  r.reserve(outcome.tasks.size());
  for (const auto& t : outcome.tasks) r.push_back(t.response);
  std::sort(r.begin(), r.end());
  double sum = 0.0;
  for (double v : r) sum += v;
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(r.size())));
  return {sum / static_cast<double>(r.size()), r[std::max<std::size_t>(rank, 1) - 1], r.back()};
}

inline constexpr const char* kScheduleHeader =
    "task_id,resource_id,level,arrival_s,start_s,finish_s,response_s";
inline constexpr const char* kResourceHeader = "resource_id,busy_s,idle_s,energy_j";

inline void write_schedule_csv(std::ostream& os, const ScheduleOutcome& o) {
  os << kScheduleHeader << '\n';
  for (const auto& t : o.tasks) {
    csv::Row row(os);
    row << t.task_id << t.resource_id << t.level << t.arrival << t.start << t.finish << t.response;
  }
}

inline void write_resource_csv(std::ostream& os, const ScheduleOutcome& o) {
  os << kResourceHeader << '\n';
  for (const auto& r : o.resources) {
    csv::Row row(os);
    row << r.resource_id << r.busy << r.idle << r.energy;
  }
}

}  // namespace greensched
