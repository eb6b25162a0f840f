#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "chainrisk/project.hpp"
#include "chainrisk/scheduler.hpp"

namespace chainrisk {

struct SimConfig {
  std::size_t replications = 1000;
  std::uint64_t seed = 0;
  std::optional<double> deadline;
  /// Worker threads; 0 means hardware concurrency. Results do not depend
  /// on this value.
  unsigned workers = 1;
};

/// Independent random stream for one replication. The engine is seeded
/// from (seed, replication) through SplitMix64, so any replication can be
/// regenerated without running the ones before it.
class ReplicationStream {
 public:
  ReplicationStream(std::uint64_t seed, std::uint64_t replication);

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t& state);

struct Percentiles {
  double p10 = 0.0;
  double p50 = 0.0;
  double p80 = 0.0;
  double p90 = 0.0;
  double p95 = 0.0;
};

struct SimulationResult {
  std::vector<double> makespans;  // one per replication, in index order
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation
  double min = 0.0;
  double max = 0.0;
  Percentiles percentiles;
  std::map<TaskId, double> criticality_index;
  std::optional<double> deadline_probability;
};

/// est_min + (est_max - est_min) * clamp(sum rf_n * r_n, 0, 1). Risks
/// missing from `draws` contribute nothing.
double sample_duration(const Task& task,
                       const std::vector<std::pair<std::string, double>>& rf_row,
                       const std::map<std::string, double>& draws);

/// Monte Carlo over the risk-factor matrix. Each replication draws one
/// uniform per risk (risk ids in ascending order), samples every task,
/// and runs a forward pass over precedence arcs plus the baseline's
/// resource links.
SimulationResult run_simulation(const Project& project,
                                const RiskFactorMatrix& matrix,
                                const BaselineSchedule& baseline,
                                const SimConfig& cfg);

/// Fraction of replications with makespan <= deadline.
double deadline_probability(const SimulationResult& result, double deadline);

const std::map<TaskId, double>& criticality_indices(const SimulationResult& result);

/// Linear interpolation between order statistics; `sorted` must be sorted.
double quantile(const std::vector<double>& sorted, double q);

struct HistogramBin {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count = 0;
};

/// `bins` equal-width bins over [min, max]; the last bin is closed.
std::vector<HistogramBin> histogram(const SimulationResult& result,
                                    std::size_t bins = 50);

}  // namespace chainrisk
