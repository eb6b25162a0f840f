// Shared generators and independent oracles for the test suites. Nothing
// here calls into the library's algorithms; the oracles are deliberately
// naive so that they can be trusted by inspection.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "chainrisk/error.hpp"
#include "chainrisk/project.hpp"

namespace testsupport {

using chainrisk::Arc;
using chainrisk::Project;
using chainrisk::Task;
using chainrisk::TaskId;

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

/// `arc_count` distinct arcs (i, j), i < j, drawn uniformly among all
/// order-respecting pairs of tasks 1..n.
inline std::vector<Arc> random_arcs(std::mt19937_64& rng, int n,
                                    std::size_t arc_count) {
  std::vector<Arc> pairs;
  for (int i = 1; i <= n; ++i) {
    for (int j = i + 1; j <= n; ++j) pairs.emplace_back(i, j);
  }
  std::shuffle(pairs.begin(), pairs.end(), rng);
  pairs.resize(std::min(arc_count, pairs.size()));
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

/// Tasks 1..n with the given avg durations; min = avg, safe = max = avg.
inline Project make_project(const std::vector<double>& avg,
                            const std::vector<Arc>& arcs) {
  Project p;
  for (std::size_t i = 0; i < avg.size(); ++i) {
    Task t;
    t.id = static_cast<TaskId>(i + 1);
    t.name = "T" + std::to_string(t.id);
    t.est_min = t.est_avg = t.est_safe = t.est_max = avg[i];
    p.tasks.push_back(t);
  }
  p.arcs = arcs;
  return p;
}

/// Random DAG with integer durations in [0, 9] and about `density` arcs per
/// task.
inline Project random_dag(std::mt19937_64& rng, int n, double density) {
  std::vector<double> d(static_cast<std::size_t>(n));
  for (auto& x : d) x = uniform_int(rng, 0, 9);
  const auto m = static_cast<std::size_t>(std::lround(density * n));
  return make_project(d, random_arcs(rng, n, m));
}

/// Longest path by enumerating every path from every task (exponential;
/// fine for a dozen tasks).
inline double brute_force_longest_path(const Project& p,
                                       const std::map<TaskId, double>& dur) {
  std::map<TaskId, std::vector<TaskId>> succ;
  for (const auto& [a, b] : p.arcs) succ[a].push_back(b);
  double best = 0.0;
  std::function<void(TaskId, double)> walk = [&](TaskId v, double acc) {
    acc += dur.at(v);
    best = std::max(best, acc);
    for (TaskId s : succ[v]) walk(s, acc);
  };
  for (const auto& t : p.tasks) walk(t.id, 0.0);
  return best;
}

/// Peak usage of `resource` over the schedule, probing every start time
/// (usage is piecewise constant and only rises at starts).
inline double peak_usage(const Project& p, const std::map<TaskId, double>& start,
                         const std::map<TaskId, double>& finish,
                         const std::string& resource) {
  double peak = 0.0;
  for (const auto& [id, t0] : start) {
    double use = 0.0;
    for (const auto& task : p.tasks) {
      const double s = start.at(task.id), f = finish.at(task.id);
      if (s <= t0 && t0 < f) {
        auto it = task.demand.find(resource);
        if (it != task.demand.end()) use += it->second;
      }
    }
    peak = std::max(peak, use);
  }
  return peak;
}

/// Error code raised by `f`, or std::nullopt when it returns normally.
template <class F>
std::optional<chainrisk::ErrorCode> error_code(F&& f) {
  try {
    f();
  } catch (const chainrisk::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace testsupport
