#pragma once

#include <cstddef>
#include <map>
#include <string_view>
#include <vector>

#include "chainrisk/project.hpp"

namespace chainrisk {

enum class BufferMethod { kCutPaste, kRsem, kApd };

/// Assumption behind the per-activity variance used by APD.
enum class VarianceModel {
  kRsemHalfU,   // ((S - A) / 2)^2, the RSEM per-task standard deviation
  kTriangular,  // triangular(min, mode = avg, max)
};

/// "cpm", "rsem", "apd". Throws kUnknownMethod.
BufferMethod parse_buffer_method(std::string_view name);
std::string_view to_string(BufferMethod method);
/// "rsem_half_u", "triangular". Throws kInvalidInput.
VarianceModel parse_variance_model(std::string_view name);
std::string_view to_string(VarianceModel model);

struct TaskEstimate {
  double safe = 0.0;
  double avg = 0.0;

  double u() const { return safe - avg; }
};

/// Safe/average estimates of the tasks along one chain.
struct ChainEstimates {
  std::vector<TaskEstimate> tasks;

  static ChainEstimates of(const Project& project,
                           const std::vector<TaskId>& chain);
};

/// The part of the network draining into one merge point.
struct FeedingSubnetwork {
  std::vector<TaskId> tasks;
  std::size_t arc_count = 0;
  std::vector<TaskId> longest_path;
  std::map<TaskId, double> variances;

  double density_factor() const;
};

/// Half the summed safety of the chain.
double cut_paste_buffer(const ChainEstimates& chain);

/// Root of summed squared safeties, i.e. two standard deviations when each
/// task's standard deviation is u/2.
double rsem_buffer(const ChainEstimates& chain);

/// (1 + arcs/tasks) * sqrt(sum of variances on the longest path).
/// Throws kInvalidInput when the subnetwork invariants do not hold.
double apd_buffer(const FeedingSubnetwork& sub);

double activity_variance(const Task& task,
                         VarianceModel model = VarianceModel::kRsemHalfU);

}  // namespace chainrisk
