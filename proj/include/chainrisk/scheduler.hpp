#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chainrisk/buffers.hpp"
#include "chainrisk/project.hpp"

namespace chainrisk {

/// Resource-feasible plan at average durations.
struct BaselineSchedule {
  std::map<TaskId, double> start;
  std::map<TaskId, double> finish;
  std::map<TaskId, double> durations_used;
  /// (released-by, waiting-task) pairs: the waiting task could not start
  /// before the first task finished and handed over its capacity.
  std::vector<Arc> resource_links;

  double makespan() const;
};

/// Serial schedule-generation scheme. Eligible tasks are taken by minimum
/// CPM late start (ties: smaller id) and placed at the earliest
/// precedence- and resource-feasible time. Throws kInfeasible when a demand
/// exceeds the total capacity of its resource.
BaselineSchedule build_baseline(const Project& project);

struct FeedingChain {
  std::vector<TaskId> tasks;
  /// Critical-chain task this chain ultimately drains into.
  TaskId merge_task = 0;
  /// Direct successor of the chain's last task: the merge task itself, or a
  /// task of another feeding chain this one joins.
  TaskId attach_task = 0;
};

struct CriticalChainPlan {
  std::vector<TaskId> critical_chain;
  std::vector<FeedingChain> feeding_chains;
  double makespan = 0.0;
};

/// Traces the chain backwards from the last-finishing task through
/// precedence arcs and resource links, then decomposes the remaining
/// tasks into disjoint feeding chains by repeatedly taking the longest
/// path that reaches the chain.
CriticalChainPlan identify_critical_chain(const Project& project,
                                          const BaselineSchedule& schedule);

struct BufferedSchedule {
  CriticalChainPlan plan;
  BufferMethod method = BufferMethod::kCutPaste;
  VarianceModel variance = VarianceModel::kRsemHalfU;
  /// One per plan.feeding_chains entry, same order.
  std::vector<double> feeding_buffers;
  /// Latest allowable start of each feeding chain's first task once its
  /// buffer sits in front of the attach task.
  std::vector<double> feeding_latest_start;
  double project_buffer = 0.0;
  double buffered_completion = 0.0;
};

/// Subnetwork used to size feeding chain `index` by APD: the chain plus
/// every feeding chain joining it, counting internal precedence arcs plus
/// the single merge arc.
FeedingSubnetwork feeding_subnetwork(const CriticalChainPlan& plan,
                                     const Project& project, std::size_t index,
                                     VarianceModel variance);

/// Whole network as APD input for the project buffer, with the critical
/// chain as the longest path.
FeedingSubnetwork project_subnetwork(const CriticalChainPlan& plan,
                                     const Project& project,
                                     VarianceModel variance);

double size_buffer(BufferMethod method, const Project& project,
                   const std::vector<TaskId>& chain,
                   const FeedingSubnetwork& sub);

BufferedSchedule insert_buffers(const CriticalChainPlan& plan,
                                const Project& project,
                                const BaselineSchedule& schedule,
                                BufferMethod method,
                                VarianceModel variance = VarianceModel::kRsemHalfU);

/// One Gantt row: a task or a buffer interval.
struct GanttRow {
  std::string label;
  double start = 0.0;
  double finish = 0.0;
  std::string kind;  // task | feeding_buffer | project_buffer
};

/// Tasks at baseline times, feeding buffers ending at their attach task's
/// start, the project buffer after the makespan.
std::vector<GanttRow> gantt_rows(const Project& project,
                                 const BaselineSchedule& schedule,
                                 const BufferedSchedule& buffered);

}  // namespace chainrisk
