#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace chainrisk {

using TaskId = int;
using Arc = std::pair<TaskId, TaskId>;

/// One activity with its four-point duration estimate.
///
/// est_avg is the aggressive/average estimate used for the baseline plan,
/// est_safe the high-confidence estimate; their gap is the safety removed
/// from the task and handed to buffers. est_min/est_max bound the simulated
/// duration.
struct Task {
  TaskId id = 0;
  std::string name;
  double est_min = 0.0;
  double est_avg = 0.0;
  double est_safe = 0.0;
  double est_max = 0.0;
  std::map<std::string, double> demand;

  double uncertainty() const { return est_safe - est_avg; }

  bool operator==(const Task&) const = default;
};

struct Resource {
  std::string id;
  double capacity = 0.0;

  bool operator==(const Resource&) const = default;
};

/// Task network with renewable resources. Resource order is kept as
/// declared so that Patterson files round-trip.
struct Project {
  std::vector<Task> tasks;
  std::vector<Arc> arcs;
  std::vector<Resource> resources;
  std::optional<double> deadline;

  /// Position of `id` in `tasks`, or std::nullopt.
  std::optional<std::size_t> index_of(TaskId id) const;
  const Task& task(TaskId id) const;
  double capacity(const std::string& resource) const;

  bool operator==(const Project&) const = default;
};

/// Dense adjacency view of a project (indices into Project::tasks).
/// Built once and shared by the scheduler and the simulator.
struct Network {
  std::vector<TaskId> ids;
  std::vector<std::vector<std::size_t>> preds;
  std::vector<std::vector<std::size_t>> succs;
  /// Kahn order; among ready tasks the smallest id goes first.
  std::vector<std::size_t> topo;

  std::size_t size() const { return ids.size(); }
};

/// Builds the dense view over precedence arcs plus `extra` arcs.
/// Throws Error(kInvalidInput) on dangling arcs or cycles; run
/// validate_project first for a full report.
Network build_network(const Project& project,
                      const std::vector<Arc>& extra = {});

struct Finding {
  std::string code;
  std::string message;
  /// Task id the finding is attached to; 0 for project-level findings.
  TaskId location = 0;
};

struct ValidationReport {
  std::vector<Finding> errors;
  std::vector<Finding> warnings;

  bool ok() const { return errors.empty(); }
};

/// Reports every violated structural invariant. Findings are sorted by
/// task id, then code.
ValidationReport validate_project(const Project& project);

struct CpmTimes {
  double early_start = 0.0;
  double early_finish = 0.0;
  double late_start = 0.0;
  double late_finish = 0.0;
  double slack = 0.0;
};

/// Forward/backward pass. `durations` must cover every task
/// (Error kMissingDuration otherwise). `extra` arcs are honoured like
/// precedence arcs (the scheduler passes its resource links here).
std::map<TaskId, CpmTimes> cpm_pass(const Project& project,
                                    const std::map<TaskId, double>& durations,
                                    const std::vector<Arc>& extra = {});

double makespan(const std::map<TaskId, CpmTimes>& times);

/// Absolute tolerance used when deciding that two path lengths tie.
double time_tolerance(double horizon);

std::map<TaskId, double> durations_avg(const Project& project);
std::map<TaskId, double> durations_min(const Project& project);

// Risk register -------------------------------------------------------------

/// A scored risk event; every score is on [1,10]. d = 10 is least
/// detectable.
struct RiskEvent {
  std::string id;
  std::string description;
  double p = 1.0;
  double impact_cost = 1.0;
  double impact_time = 1.0;
  double impact_quality = 1.0;
  double d = 1.0;

  bool operator==(const RiskEvent&) const = default;
};

/// Percent effect of each risk on each task, keyed (task, risk).
struct RiskFactorMatrix {
  std::map<std::pair<TaskId, std::string>, double> entries;

  bool empty() const { return entries.empty(); }
  /// Entries of one task, ordered by risk id.
  std::vector<std::pair<std::string, double>> row(TaskId task) const;
};

struct RiskRegister {
  std::vector<RiskEvent> risks;
  RiskFactorMatrix matrix;
};

}  // namespace chainrisk
