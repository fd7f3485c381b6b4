#include <gtest/gtest.h>

#include <array>

#include "greensched/energy_time.hpp"
#include "support.hpp"

using namespace greensched;
using greensched::testkit::relative_close;

namespace {

constexpr double kExact = 1e-12;

Problem single_level_problem(const std::vector<double>& lengths, const std::vector<double>& mips,
                             double voltage, double gamma, double lambda) {
  std::vector<Resource> res;
  for (std::size_t j = 0; j < mips.size(); ++j)
    res.emplace_back(j, std::vector<DvfsLevel>{{voltage, 1.0}}, gamma, DvfsLevel(0.7, 0.1), lambda, mips[j]);
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < lengths.size(); ++i) tasks.emplace_back(i, lengths[i]);
  return make_problem(std::move(tasks), std::move(res));
}

}  // namespace

TEST(Power, Examples) {
  EXPECT_DOUBLE_EQ(power(1.0, DvfsLevel(1.0, 1.0)), 1.0);
  EXPECT_NEAR(power(1.0, DvfsLevel(1.2, 0.5)), 0.72, 0.72 * kExact);
}

TEST(ScaledCompletionTime, Examples) {
  EXPECT_DOUBLE_EQ(scaled_completion_time(10.0, DvfsLevel(1.0, 1.0)), 10.0);
  EXPECT_DOUBLE_EQ(scaled_completion_time(10.0, DvfsLevel(1.0, 0.5)), 20.0);
  EXPECT_TRUE(relative_close(scaled_completion_time(354.6, DvfsLevel(1.0, 0.8)), 443.25, kExact));
}

TEST(TaskEnergy, PhysicalReading) {
  for (double f : {1.0, 0.7, 0.3}) EXPECT_DOUBLE_EQ(task_energy(1.0, DvfsLevel(1.0, f), 10.0), 10.0);
  EXPECT_TRUE(relative_close(task_energy(1.0, DvfsLevel(1.2, 0.5), 10.0), 14.4, kExact));
}

TEST(TaskEnergy, LiteralReading) {
  EXPECT_TRUE(relative_close(task_energy(1.0, DvfsLevel(1.2, 0.5), 10.0, EnergyFormula::literal), 7.2, kExact));
  EXPECT_DOUBLE_EQ(task_energy(2.0, DvfsLevel(1.0, 1.0), 10.0, EnergyFormula::literal), 20.0);
}

TEST(TaskEnergy, PhysicalEqualsPowerTimesScaledDuration) {
  const DvfsLevel lvl(1.3, 0.8);
  EXPECT_TRUE(relative_close(task_energy(1.7, lvl, 42.0),
                             power(1.7, lvl) * scaled_completion_time(42.0, lvl), kExact));
}

TEST(ResourceEnergy, Examples) {
  const Resource idle_only(0, {{1.0, 1.0}}, 1.0, DvfsLevel(0.9, 0.4), 0.0, 1.0);
  EXPECT_DOUBLE_EQ(resource_energy(idle_only, {}, 0.0), 0.0);

  const Resource r(0, {{1.2, 0.5}}, 1.0, DvfsLevel(0.9, 0.4), 0.1, 1.0);
  const std::array<AssignedTask, 1> one{AssignedTask{10.0, DvfsLevel(1.2, 0.5)}};
  EXPECT_TRUE(relative_close(resource_energy(r, one, 5.0), 16.3, kExact));
}

TEST(ResourceEnergy, NegativeIdleIsDomainError) {
  const Resource r = Resource::with_defaults(0, 1.0);
  EXPECT_THROW(resource_energy(r, {}, -1.0), std::domain_error);
}

TEST(Makespan, Examples) {
  const std::array<double, 3> c{3.0, 5.0, 4.0};
  EXPECT_DOUBLE_EQ(makespan(c), 5.0);
  EXPECT_DOUBLE_EQ(makespan(std::span<const double>{}), 0.0);
}

TEST(Evaluate, SingleTaskClosedForm) {
  const auto p = single_level_problem({100.0}, {10.0}, 1.5, 2.0, 0.3);
  const auto o = evaluate(Allocation{{{0, 0}}}, p);
  EXPECT_DOUBLE_EQ(o.makespan, 10.0);
  EXPECT_TRUE(relative_close(o.total_energy, 2.0 * 2.25 * 10.0 + 0.3, kExact));
}

TEST(Evaluate, TwoMachines) {
  const auto p = single_level_problem({100.0, 200.0}, {10.0, 10.0}, 1.5, 1.0, 0.0);
  const Allocation a{{{0, 0}, {1, 0}}};
  const auto o = evaluate(a, p);
  EXPECT_DOUBLE_EQ(o.makespan, 20.0);
  const auto busy = busy_times(a, p);
  EXPECT_DOUBLE_EQ(o.makespan - busy[0], 10.0);
  EXPECT_TRUE(relative_close(o.total_energy, 2.25 * 10 + 0.7 * 0.1 * 10 + 2.25 * 20, kExact));
}

TEST(Evaluate, DimensionMismatchIsStructuralError) {
  const auto p = single_level_problem({100.0, 200.0}, {10.0, 10.0}, 1.5, 1.0, 0.0);
  EXPECT_THROW(evaluate(Allocation{{{0, 0}}}, p), structural_error);
  EXPECT_THROW(evaluate(Allocation{{{0, 0}, {2, 0}}}, p), structural_error);
  Problem bad = p;
  bad.etc = EtcMatrix(1, 2, {1.0, 1.0});
  EXPECT_THROW(bad.validate(), structural_error);
}

// Independent recomputation of every energy component.
TEST(Evaluate, EnergyConservation) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const std::size_t n = 1 + uniform_index(rng, 50);
    const std::size_t m = 1 + uniform_index(rng, 8);
    const auto p = testkit::random_problem(seed, n, m, 1 + uniform_index(rng, 5));
    const auto a = testkit::random_valid_allocation(p, rng);
    const auto o = evaluate(a, p);

    std::vector<std::vector<AssignedTask>> per(m);
    std::vector<double> busy(m, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& g = a.genes[i];
      const DvfsLevel lvl = p.resources[g.resource].level(g.level);
      per[g.resource].push_back({p.etc(i, g.resource), lvl});
      busy[g.resource] += p.etc(i, g.resource) / lvl.frequency();
    }
    const double ms = *std::max_element(busy.begin(), busy.end());
    double total = 0.0;
    for (std::size_t j = 0; j < m; ++j) total += resource_energy(p.resources[j], per[j], ms - busy[j]);
    ASSERT_TRUE(relative_close(o.total_energy, total, 1e-9)) << "seed " << seed;
    ASSERT_TRUE(relative_close(o.makespan, ms, 1e-12));
  }
}

TEST(Evaluate, FasterLevelNeverSlowerNeverCheaper) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto p = testkit::default_table_problem(seed, 12, 3);
    Rng rng(seed + 1000);
    auto a = testkit::random_valid_allocation(p, rng);
    for (std::size_t i = 0; i < a.genes.size(); ++i) {
      if (a.genes[i].level == 0) continue;
      Allocation faster = a;
      --faster.genes[i].level;
      const auto& r = p.resources[a.genes[i].resource];
      const double ct = p.etc(i, a.genes[i].resource);
      ASSERT_LE(evaluate(faster, p).makespan, evaluate(a, p).makespan);
      ASSERT_GE(task_energy(r.gamma(), r.level(faster.genes[i].level), ct),
                task_energy(r.gamma(), r.level(a.genes[i].level), ct));
    }
  }
}

TEST(Evaluate, MakespanAtLeastLongestScaledJob) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto p = testkit::random_problem(seed, 15, 4, 3);
    Rng rng(seed);
    const auto a = testkit::random_valid_allocation(p, rng);
    double longest = 0.0;
    for (std::size_t i = 0; i < a.genes.size(); ++i)
      longest = std::max(longest, scaled_completion_time(p.etc(i, a.genes[i].resource),
                                                         p.resources[a.genes[i].resource].level(a.genes[i].level)));
    ASSERT_GE(evaluate(a, p).makespan, longest);
  }
}

TEST(Evaluate, PureAndBitIdentical) {
  const auto p = testkit::random_problem(9, 30, 5, 4);
  Rng rng(3);
  const auto a = testkit::random_valid_allocation(p, rng);
  const auto first = evaluate(a, p);
  for (int k = 0; k < 5; ++k) EXPECT_EQ(evaluate(a, p), first);
}

TEST(Evaluate, FullFrequencySingleLevelPerResourceFormula) {
  const auto p = single_level_problem({100, 250, 50, 400, 120}, {10.0, 25.0, 5.0}, 1.3, 1.4, 0.6);
  const Allocation a{{{0, 0}, {1, 0}, {2, 0}, {1, 0}, {0, 0}}};
  const auto o = evaluate(a, p);
  std::vector<double> sum_ct(3, 0.0);
  for (std::size_t i = 0; i < 5; ++i) sum_ct[a.genes[i].resource] += p.etc(i, a.genes[i].resource);
  const double ms = *std::max_element(sum_ct.begin(), sum_ct.end());
  double expected = 0.0;
  for (std::size_t j = 0; j < 3; ++j)
    expected += 1.4 * 1.3 * 1.3 * sum_ct[j] + 1.4 * 0.7 * 0.1 * (ms - sum_ct[j]) + 0.6;
  EXPECT_TRUE(relative_close(o.total_energy, expected, kExact));
  EXPECT_DOUBLE_EQ(o.makespan, ms);
}

TEST(Evaluate, SleepThresholdGatesIdleState) {
  auto p = single_level_problem({100.0, 200.0}, {10.0, 10.0}, 1.5, 1.0, 0.0);
  const Allocation a{{{0, 0}, {1, 0}}};  // resource 0 is 50% utilized
  const double asleep = evaluate(a, p).total_energy;
  p.energy.sleep_utilization_threshold = 0.5;  // 0.5 is not below 0.5: stays awake
  const double awake = evaluate(a, p).total_energy;
  EXPECT_TRUE(relative_close(awake - asleep, (power(1.0, DvfsLevel(1.5, 1.0)) - 0.7 * 0.1) * 10.0, kExact));
}

TEST(WeightedScore, ReferenceBoundsAreLowerBounds) {
  const ObjectiveWeights w;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto p = testkit::random_problem(seed, 4, 2, 2);
    const auto scale = reference_scale(p);
    testkit::for_each_allocation(p, [&](const Allocation& a) {
      const auto o = evaluate(a, p);
      ASSERT_GE(o.total_energy, scale.energy * (1 - 1e-12));
      ASSERT_GE(o.makespan, scale.makespan * (1 - 1e-12));
      ASSERT_GE(weighted_score(o, w, scale), 1.0 - 1e-12);
    });
  }
}

TEST(WeightedScore, WeightsValidated) {
  EXPECT_THROW((ObjectiveWeights{0.7, 0.7}.validate()), invalid_model);
  EXPECT_THROW((ObjectiveWeights{-0.1, 1.1}.validate()), invalid_model);
  EXPECT_NO_THROW((ObjectiveWeights{1.0, 0.0}.validate()));
}
