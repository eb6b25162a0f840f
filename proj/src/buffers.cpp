#include "chainrisk/buffers.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "chainrisk/error.hpp"

namespace chainrisk {

BufferMethod parse_buffer_method(std::string_view name) {
  if (name == "cpm") return BufferMethod::kCutPaste;
  if (name == "rsem") return BufferMethod::kRsem;
  if (name == "apd") return BufferMethod::kApd;
  throw Error(ErrorCode::kUnknownMethod,
              "unknown buffer method '" + std::string(name) + "'");
}

std::string_view to_string(BufferMethod method) {
  switch (method) {
    case BufferMethod::kCutPaste: return "cpm";
    case BufferMethod::kRsem: return "rsem";
    case BufferMethod::kApd: return "apd";
  }
  return "?";
}

VarianceModel parse_variance_model(std::string_view name) {
  if (name == "rsem_half_u") return VarianceModel::kRsemHalfU;
  if (name == "triangular") return VarianceModel::kTriangular;
  throw Error(ErrorCode::kInvalidInput,
              "unknown variance assumption '" + std::string(name) + "'");
}

std::string_view to_string(VarianceModel model) {
  return model == VarianceModel::kTriangular ? "triangular" : "rsem_half_u";
}

ChainEstimates ChainEstimates::of(const Project& project,
                                  const std::vector<TaskId>& chain) {
  ChainEstimates out;
  out.tasks.reserve(chain.size());
  for (TaskId id : chain) {
    const Task& t = project.task(id);
    out.tasks.push_back({t.est_safe, t.est_avg});
  }
  return out;
}

double FeedingSubnetwork::density_factor() const {
  return 1.0 + static_cast<double>(arc_count) / static_cast<double>(tasks.size());
}

double cut_paste_buffer(const ChainEstimates& chain) {
  double sum = 0.0;
  for (const auto& t : chain.tasks) sum += t.u();
  return 0.5 * sum;
}

double rsem_buffer(const ChainEstimates& chain) {
  double sum = 0.0;
  for (const auto& t : chain.tasks) sum += t.u() * t.u();
  return std::sqrt(sum);
}

double apd_buffer(const FeedingSubnetwork& sub) {
  if (sub.tasks.empty()) {
    throw Error(ErrorCode::kInvalidInput, "feeding subnetwork has no tasks");
  }
  if (sub.longest_path.empty()) {
    throw Error(ErrorCode::kInvalidInput, "feeding subnetwork has no path");
  }
  const std::set<TaskId> members(sub.tasks.begin(), sub.tasks.end());
  double sum = 0.0;
  for (TaskId id : sub.longest_path) {
    if (!members.count(id)) {
      throw Error(ErrorCode::kInvalidInput,
                  "task " + std::to_string(id) + " on path is not in subnetwork");
    }
    auto it = sub.variances.find(id);
    if (it == sub.variances.end() || !(it->second >= 0.0)) {
      throw Error(ErrorCode::kInvalidInput,
                  "missing or negative variance for task " + std::to_string(id));
    }
    sum += it->second;
  }
  return sub.density_factor() * std::sqrt(sum);
}

double activity_variance(const Task& task, VarianceModel model) {
  if (model == VarianceModel::kRsemHalfU) {
    const double sd = task.uncertainty() / 2.0;
    return sd * sd;
  }
  const double a = task.est_min;
  const double b = task.est_max;
  const double c = task.est_avg;
  return ((b - a) * (b - a) - (b - c) * (c - a)) / 18.0;
}

}  // namespace chainrisk
