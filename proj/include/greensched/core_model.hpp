#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace greensched {

/// Input that violates a type invariant (negative length, unordered DVFS
/// table, ...). Thrown at construction; inputs are never silently repaired.
class invalid_model : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Shapes that do not fit together (genome length, matrix dimensions,
/// allocation size).
class structural_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Task
// ---------------------------------------------------------------------------

class Task {
 public:
  Task(std::size_t id, double length_mi, double arrival_time = 0.0)
      : id_(id), length_(length_mi), arrival_(arrival_time) {
    if (!(length_mi > 0.0) || !std::isfinite(length_mi))
      throw invalid_model("task " + std::to_string(id) + ": length must be > 0");
    if (!(arrival_time >= 0.0) || !std::isfinite(arrival_time))
      throw invalid_model("task " + std::to_string(id) + ": arrival_time must be >= 0");
  }

  std::size_t id() const noexcept { return id_; }
  double length() const noexcept { return length_; }
  double arrival_time() const noexcept { return arrival_; }

  friend bool operator==(const Task&, const Task&) = default;

 private:
  std::size_t id_;
  double length_;
  double arrival_;
};

/// Checks that ids are exactly 0..n-1 in order.
inline void validate_task_ids(const std::vector<Task>& tasks) {
  for (std::size_t i = 0; i < tasks.size(); ++i)
    if (tasks[i].id() != i)
      throw invalid_model("task ids must be dense and ordered: position " +
                          std::to_string(i) + " holds id " + std::to_string(tasks[i].id()));
}

// ---------------------------------------------------------------------------
// DVFS level and resource
// ---------------------------------------------------------------------------

/// One (voltage, frequency) row of a supply table. Frequency is a fraction of
/// full speed in (0, 1].
class DvfsLevel {
 public:
  DvfsLevel(double voltage, double frequency) : voltage_(voltage), frequency_(frequency) {
    if (!(voltage > 0.0) || !std::isfinite(voltage))
      throw invalid_model("DVFS voltage must be > 0");
    if (!(frequency > 0.0 && frequency <= 1.0))
      throw invalid_model("DVFS frequency must lie in (0, 1]");
  }

  double voltage() const noexcept { return voltage_; }
  double frequency() const noexcept { return frequency_; }

  friend bool operator==(const DvfsLevel&, const DvfsLevel&) = default;

 private:
  double voltage_;
  double frequency_;
};

/// Seven-level table used when a scenario does not supply one.
inline std::vector<DvfsLevel> default_dvfs_table() {
  return {{1.5, 1.0}, {1.4, 0.9}, {1.3, 0.8}, {1.2, 0.7},
          {1.1, 0.6}, {1.0, 0.5}, {0.9, 0.4}};
}

inline DvfsLevel default_sleep_level() { return {0.7, 0.1}; }

/// A DVS-enabled processor. Level 0 of the table is the fastest; both
/// voltage and frequency strictly decrease with the level index.
class Resource {
 public:
  Resource(std::size_t id, std::vector<DvfsLevel> dvfs_table, double gamma,
           DvfsLevel sleep_level, double lambda, double mips)
      : id_(id),
        table_(std::move(dvfs_table)),
        gamma_(gamma),
        sleep_(sleep_level),
        lambda_(lambda),
        mips_(mips) {
    const std::string who = "resource " + std::to_string(id) + ": ";
    if (table_.empty()) throw invalid_model(who + "dvfs_table is empty");
    for (std::size_t k = 1; k < table_.size(); ++k) {
      if (!(table_[k].voltage() < table_[k - 1].voltage()) ||
          !(table_[k].frequency() < table_[k - 1].frequency()))
        throw invalid_model(who + "dvfs_table must be strictly decreasing in voltage and frequency");
    }
    if (sleep_.voltage() > table_.back().voltage() ||
        sleep_.frequency() > table_.back().frequency())
      throw invalid_model(who + "sleep level must not exceed the slowest table level");
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw invalid_model(who + "gamma must be > 0");
    if (!(mips > 0.0) || !std::isfinite(mips)) throw invalid_model(who + "mips must be > 0");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw invalid_model(who + "lambda must be >= 0");
  }

  /// Resource with the default table, gamma = 1 and lambda = 0.
  static Resource with_defaults(std::size_t id, double mips) {
    return Resource(id, default_dvfs_table(), 1.0, default_sleep_level(), 0.0, mips);
  }

  std::size_t id() const noexcept { return id_; }
  const std::vector<DvfsLevel>& dvfs_table() const noexcept { return table_; }
  std::size_t level_count() const noexcept { return table_.size(); }
  const DvfsLevel& level(std::size_t k) const { return table_.at(k); }
  double gamma() const noexcept { return gamma_; }
  const DvfsLevel& sleep_level() const noexcept { return sleep_; }
  double lambda() const noexcept { return lambda_; }
  double mips() const noexcept { return mips_; }

  friend bool operator==(const Resource&, const Resource&) = default;

 private:
  std::size_t id_;
  std::vector<DvfsLevel> table_;
  double gamma_;
  DvfsLevel sleep_;
  double lambda_;
  double mips_;
};

inline void validate_resource_ids(const std::vector<Resource>& resources) {
  for (std::size_t j = 0; j < resources.size(); ++j)
    if (resources[j].id() != j)
      throw invalid_model("resource ids must be dense and ordered: position " +
                          std::to_string(j) + " holds id " + std::to_string(resources[j].id()));
}

inline std::size_t max_level_count(const std::vector<Resource>& resources) {
  std::size_t k = 0;
  for (const auto& r : resources) k = std::max(k, r.level_count());
  return k;
}

// ---------------------------------------------------------------------------
// ETC matrix
// ---------------------------------------------------------------------------

/// Expected completion time of task i on resource j at full frequency,
/// row-major n x m.
class EtcMatrix {
 public:
  EtcMatrix() = default;

  EtcMatrix(std::size_t tasks, std::size_t resources, std::vector<double> values)
      : n_(tasks), m_(resources), ct_(std::move(values)) {
    if (ct_.size() != n_ * m_)
      throw structural_error("ETC matrix: expected " + std::to_string(n_ * m_) +
                             " entries, got " + std::to_string(ct_.size()));
    for (double v : ct_)
      if (!(v > 0.0) || !std::isfinite(v))
        throw invalid_model("ETC matrix entries must be finite and > 0");
  }

  static EtcMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    const std::size_t n = rows.size();
    const std::size_t m = n == 0 ? 0 : rows.front().size();
    std::vector<double> flat;
    flat.reserve(n * m);
    for (const auto& row : rows) {
      if (row.size() != m) throw structural_error("ETC matrix rows have unequal length");
      flat.insert(flat.end(), row.begin(), row.end());
    }
    return EtcMatrix(n, m, std::move(flat));
  }

  /// ct[i][j] = length_i / mips_j.
  static EtcMatrix from_lengths(const std::vector<Task>& tasks,
                                const std::vector<Resource>& resources) {
    std::vector<double> flat;
    flat.reserve(tasks.size() * resources.size());
    for (const auto& t : tasks)
      for (const auto& r : resources) flat.push_back(t.length() / r.mips());
    return EtcMatrix(tasks.size(), resources.size(), std::move(flat));
  }

  std::size_t tasks() const noexcept { return n_; }
  std::size_t resources() const noexcept { return m_; }
  double operator()(std::size_t task, std::size_t resource) const noexcept {
    return ct_[task * m_ + resource];
  }
  double at(std::size_t task, std::size_t resource) const {
    if (task >= n_ || resource >= m_) throw structural_error("ETC index out of range");
    return (*this)(task, resource);
  }
  std::vector<std::vector<double>> rows() const {
    std::vector<std::vector<double>> out(n_, std::vector<double>(m_));
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < m_; ++j) out[i][j] = (*this)(i, j);
    return out;
  }

  friend bool operator==(const EtcMatrix&, const EtcMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::vector<double> ct_;
};

// ---------------------------------------------------------------------------
// Allocation and its binary encoding
// ---------------------------------------------------------------------------

struct Gene {
  std::size_t resource = 0;
  std::size_t level = 0;
  friend bool operator==(const Gene&, const Gene&) = default;
};

/// One (resource, level) choice per task, indexed by task id.
struct Allocation {
  std::vector<Gene> genes;
  friend bool operator==(const Allocation&, const Allocation&) = default;
};

inline void validate_allocation(const Allocation& alloc, std::size_t tasks,
                                const std::vector<Resource>& resources) {
  if (alloc.genes.size() != tasks)
    throw structural_error("allocation has " + std::to_string(alloc.genes.size()) +
                           " genes for " + std::to_string(tasks) + " tasks");
  for (std::size_t i = 0; i < alloc.genes.size(); ++i) {
    const Gene& g = alloc.genes[i];
    if (g.resource >= resources.size())
      throw structural_error("task " + std::to_string(i) + ": resource index out of range");
    if (g.level >= resources[g.resource].level_count())
      throw structural_error("task " + std::to_string(i) + ": level index out of range");
  }
}

/// Number of bits needed to address `count` values (at least one).
constexpr std::size_t field_width(std::size_t count) noexcept {
  std::size_t bits = 1;
  while ((std::size_t{1} << bits) < count) ++bits;
  return bits;
}

/// Task-major bit string: for every task, resource bits then level bits,
/// each field most-significant bit first. Bits are stored one per byte.
struct BitGenome {
  std::vector<std::uint8_t> bits;
  std::size_t resource_bits = 1;
  std::size_t level_bits = 1;

  std::size_t size() const noexcept { return bits.size(); }
  std::size_t bits_per_task() const noexcept { return resource_bits + level_bits; }

  std::string to_string() const {
    std::string s;
    s.reserve(bits.size());
    for (auto b : bits) s.push_back(b ? '1' : '0');
    return s;
  }

  friend bool operator==(const BitGenome&, const BitGenome&) = default;
};

inline BitGenome make_genome_layout(std::size_t tasks, std::size_t m, std::size_t k_max) {
  BitGenome g;
  g.resource_bits = field_width(m);
  g.level_bits = field_width(k_max);
  g.bits.assign(tasks * g.bits_per_task(), 0);
  return g;
}

namespace detail {

inline void write_field(std::vector<std::uint8_t>& bits, std::size_t offset,
                        std::size_t width, std::size_t value) {
  for (std::size_t b = 0; b < width; ++b)
    bits[offset + b] = static_cast<std::uint8_t>((value >> (width - 1 - b)) & 1U);
}

inline std::size_t read_field(const std::vector<std::uint8_t>& bits, std::size_t offset,
                              std::size_t width) {
  std::size_t v = 0;
  for (std::size_t b = 0; b < width; ++b) v = (v << 1) | (bits[offset + b] & 1U);
  return v;
}

}  // namespace detail

/// Allocation -> bit string. The allocation must be valid for m resources
/// and at most k_max levels per resource.
inline BitGenome encode(const Allocation& alloc, std::size_t m, std::size_t k_max) {
  BitGenome g = make_genome_layout(alloc.genes.size(), m, k_max);
  const std::size_t stride = g.bits_per_task();
  for (std::size_t i = 0; i < alloc.genes.size(); ++i) {
    detail::write_field(g.bits, i * stride, g.resource_bits, alloc.genes[i].resource);
    detail::write_field(g.bits, i * stride + g.resource_bits, g.level_bits, alloc.genes[i].level);
  }
  return g;
}

/// Bit string -> allocation. Total: a resource field >= m is reduced modulo
/// m, a level field >= k is reduced modulo that resource's k.
inline Allocation decode(const BitGenome& genome, std::size_t n, std::size_t m,
                         const std::vector<Resource>& resources) {
  if (m == 0 || resources.size() != m)
    throw structural_error("decode: resource list does not match m");
  const std::size_t rbits = field_width(m);
  const std::size_t lbits = field_width(max_level_count(resources));
  if (genome.resource_bits != rbits || genome.level_bits != lbits ||
      genome.bits.size() != n * (rbits + lbits))
    throw structural_error("decode: genome of " + std::to_string(genome.bits.size()) +
                           " bits does not match " + std::to_string(n) + " tasks x " +
                           std::to_string(rbits + lbits) + " bits");
  Allocation alloc;
  alloc.genes.resize(n);
  const std::size_t stride = rbits + lbits;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = detail::read_field(genome.bits, i * stride, rbits) % m;
    const std::size_t l =
        detail::read_field(genome.bits, i * stride + rbits, lbits) % resources[r].level_count();
    alloc.genes[i] = {r, l};
  }
  return alloc;
}

}  // namespace greensched
