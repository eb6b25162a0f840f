#include "chainrisk/project.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <set>
#include <sstream>

#include "chainrisk/error.hpp"

namespace chainrisk {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformed: return "MALFORMED";
    case ErrorCode::kRange: return "RANGE";
    case ErrorCode::kUnknownTask: return "UNKNOWN_TASK";
    case ErrorCode::kMissingDuration: return "MISSING_DURATION";
    case ErrorCode::kInfeasible: return "INFEASIBLE";
    case ErrorCode::kUnknownMethod: return "UNKNOWN_METHOD";
    case ErrorCode::kUnknownTerm: return "UNKNOWN_TERM";
    case ErrorCode::kOutOfUniverse: return "OUT_OF_UNIVERSE";
    case ErrorCode::kEmptySet: return "EMPTY_SET";
    case ErrorCode::kDegenerate: return "DEGENERATE";
    case ErrorCode::kEmptyGate: return "EMPTY_GATE";
    case ErrorCode::kTooManyStrategies: return "TOO_MANY_STRATEGIES";
    case ErrorCode::kInvalidInput: return "INVALID_INPUT";
    case ErrorCode::kIo: return "IO";
  }
  return "UNKNOWN";
}

std::optional<std::size_t> Project::index_of(TaskId id) const {
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (tasks[i].id == id) return i;
  }
  return std::nullopt;
}

const Task& Project::task(TaskId id) const {
  auto idx = index_of(id);
  if (!idx) {
    throw Error(ErrorCode::kUnknownTask, "unknown task " + std::to_string(id));
  }
  return tasks[*idx];
}

double Project::capacity(const std::string& resource) const {
  for (const auto& r : resources) {
    if (r.id == resource) return r.capacity;
  }
  return 0.0;
}

namespace {

std::map<TaskId, std::size_t> index_map(const Project& project) {
  std::map<TaskId, std::size_t> out;
  for (std::size_t i = 0; i < project.tasks.size(); ++i) {
    out.emplace(project.tasks[i].id, i);
  }
  return out;
}

std::string join_ids(const std::vector<TaskId>& ids) {
  std::ostringstream os;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) os << ',';
    os << ids[i];
  }
  return os.str();
}

// Strongly connected components with more than one node, each sorted.
std::vector<std::vector<TaskId>> find_cycles(
    const std::vector<TaskId>& ids,
    const std::vector<std::vector<std::size_t>>& succs) {
  const std::size_t n = ids.size();
  std::vector<int> index(n, -1), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<TaskId>> cycles;
  int counter = 0;

  std::function<void(std::size_t)> strong = [&](std::size_t v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (std::size_t w : succs[v]) {
      if (index[w] < 0) {
        strong(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<TaskId> comp;
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp.push_back(ids[w]);
      } while (w != v);
      if (comp.size() > 1) {
        std::sort(comp.begin(), comp.end());
        cycles.push_back(std::move(comp));
      }
    }
  };
  for (std::size_t v = 0; v < n; ++v) {
    if (index[v] < 0) strong(v);
  }
  return cycles;
}

}  // namespace

Network build_network(const Project& project, const std::vector<Arc>& extra) {
  Network net;
  const auto idx = index_map(project);
  const std::size_t n = project.tasks.size();
  net.ids.reserve(n);
  for (const auto& t : project.tasks) net.ids.push_back(t.id);
  net.preds.assign(n, {});
  net.succs.assign(n, {});

  std::set<std::pair<std::size_t, std::size_t>> seen;
  auto add = [&](const Arc& arc) {
    auto a = idx.find(arc.first);
    auto b = idx.find(arc.second);
    if (a == idx.end() || b == idx.end()) {
      throw Error(ErrorCode::kInvalidInput,
                  "arc (" + std::to_string(arc.first) + "," +
                      std::to_string(arc.second) + ") references unknown task");
    }
    if (!seen.emplace(a->second, b->second).second) return;
    net.succs[a->second].push_back(b->second);
    net.preds[b->second].push_back(a->second);
  };
  for (const auto& arc : project.arcs) add(arc);
  for (const auto& arc : extra) add(arc);

  std::vector<std::size_t> indegree(n);
  using Ready = std::pair<TaskId, std::size_t>;
  std::priority_queue<Ready, std::vector<Ready>, std::greater<>> ready;
  for (std::size_t i = 0; i < n; ++i) {
    indegree[i] = net.preds[i].size();
    if (indegree[i] == 0) ready.emplace(net.ids[i], i);
  }
  while (!ready.empty()) {
    auto [id, v] = ready.top();
    ready.pop();
    net.topo.push_back(v);
    for (std::size_t w : net.succs[v]) {
      if (--indegree[w] == 0) ready.emplace(net.ids[w], w);
    }
  }
  if (net.topo.size() != n) {
    throw Error(ErrorCode::kInvalidInput, "precedence network has a cycle");
  }
  return net;
}

ValidationReport validate_project(const Project& project) {
  ValidationReport report;
  auto error = [&](std::string code, std::string msg, TaskId at) {
    report.errors.push_back({std::move(code), std::move(msg), at});
  };
  auto warn = [&](std::string code, std::string msg, TaskId at) {
    report.warnings.push_back({std::move(code), std::move(msg), at});
  };

  std::set<std::string> declared;
  for (const auto& r : project.resources) {
    if (!declared.insert(r.id).second) {
      error("DUPLICATE_RESOURCE", "resource " + r.id + " declared twice", 0);
    }
    if (!(r.capacity >= 0.0)) {
      error("NEGATIVE_CAPACITY", "resource " + r.id + " has negative capacity",
            0);
    }
  }
  if (project.deadline && !(*project.deadline >= 0.0)) {
    error("NEGATIVE_DEADLINE", "deadline must be nonnegative", 0);
  }

  std::map<TaskId, std::size_t> idx;
  std::set<std::string> used;
  for (std::size_t i = 0; i < project.tasks.size(); ++i) {
    const Task& t = project.tasks[i];
    const std::string where = "task " + std::to_string(t.id);
    if (t.id <= 0) error("INVALID_ID", where + ": ids are 1-based", t.id);
    if (!idx.emplace(t.id, i).second) {
      error("DUPLICATE_TASK", where + " declared twice", t.id);
    }
    if (!(t.est_min >= 0.0)) {
      error("NEGATIVE_ESTIMATE", where + ": est_min must be >= 0", t.id);
    }
    if (!(t.est_min <= t.est_avg && t.est_avg <= t.est_safe &&
          t.est_safe <= t.est_max)) {
      error("ESTIMATE_ORDER", where + ": requires min <= avg <= safe <= max",
            t.id);
    }
    for (const auto& [res, units] : t.demand) {
      if (!(units >= 0.0)) {
        error("NEGATIVE_DEMAND", where + ": negative demand for " + res, t.id);
        continue;
      }
      if (!declared.count(res)) {
        if (units > 0.0) {
          error("UNKNOWN_RESOURCE", where + ": undeclared resource " + res,
                t.id);
        }
        continue;
      }
      if (units > 0.0) used.insert(res);
      if (units > project.capacity(res)) {
        error("DEMAND_EXCEEDS_CAPACITY",
              where + ": demand for " + res + " exceeds capacity", t.id);
      }
    }
  }
  for (const auto& r : project.resources) {
    if (!used.count(r.id)) {
      warn("UNUSED_RESOURCE", "resource " + r.id + " is never demanded", 0);
    }
  }

  const std::size_t n = project.tasks.size();
  std::vector<std::vector<std::size_t>> succs(n);
  std::set<Arc> arcs_seen;
  for (const auto& arc : project.arcs) {
    const std::string where = "arc (" + std::to_string(arc.first) + "," +
                              std::to_string(arc.second) + ")";
    if (arc.first == arc.second) {
      error("SELF_ARC", where + " is a self-arc", arc.first);
      continue;
    }
    auto a = idx.find(arc.first);
    auto b = idx.find(arc.second);
    if (a == idx.end() || b == idx.end()) {
      error("DANGLING_ARC", where + " references an unknown task",
            a == idx.end() ? arc.first : arc.second);
      continue;
    }
    if (!arcs_seen.insert(arc).second) {
      error("DUPLICATE_ARC", where + " listed twice", arc.first);
      continue;
    }
    succs[a->second].push_back(b->second);
  }
  std::vector<TaskId> ids;
  for (const auto& t : project.tasks) ids.push_back(t.id);
  for (const auto& cycle : find_cycles(ids, succs)) {
    error("CYCLE", "cycle through tasks " + join_ids(cycle), cycle.front());
  }

  auto order = [](const Finding& a, const Finding& b) {
    return std::tie(a.location, a.code) < std::tie(b.location, b.code);
  };
  std::stable_sort(report.errors.begin(), report.errors.end(), order);
  std::stable_sort(report.warnings.begin(), report.warnings.end(), order);
  return report;
}

double time_tolerance(double horizon) {
  return 1e-9 * std::max(1.0, std::abs(horizon));
}

std::map<TaskId, CpmTimes> cpm_pass(const Project& project,
                                    const std::map<TaskId, double>& durations,
                                    const std::vector<Arc>& extra) {
  const Network net = build_network(project, extra);
  const std::size_t n = net.size();
  std::vector<double> dur(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto it = durations.find(net.ids[i]);
    if (it == durations.end()) {
      throw Error(ErrorCode::kMissingDuration,
                  "no duration for task " + std::to_string(net.ids[i]));
    }
    if (!(it->second >= 0.0)) {
      throw Error(ErrorCode::kRange, "negative duration for task " +
                                         std::to_string(net.ids[i]));
    }
    dur[i] = it->second;
  }

  std::vector<CpmTimes> t(n);
  double end = 0.0;
  for (std::size_t v : net.topo) {
    double es = 0.0;
    for (std::size_t p : net.preds[v]) es = std::max(es, t[p].early_finish);
    t[v].early_start = es;
    t[v].early_finish = es + dur[v];
    end = std::max(end, t[v].early_finish);
  }
  const double tol = time_tolerance(end);
  for (auto it = net.topo.rbegin(); it != net.topo.rend(); ++it) {
    const std::size_t v = *it;
    double lf = end;
    for (std::size_t s : net.succs[v]) lf = std::min(lf, t[s].late_start);
    t[v].late_finish = lf;
    t[v].late_start = lf - dur[v];
    const double slack = t[v].late_start - t[v].early_start;
    t[v].slack = slack <= tol ? 0.0 : slack;
  }

  std::map<TaskId, CpmTimes> out;
  for (std::size_t i = 0; i < n; ++i) out.emplace(net.ids[i], t[i]);
  return out;
}

double makespan(const std::map<TaskId, CpmTimes>& times) {
  double end = 0.0;
  for (const auto& [id, t] : times) end = std::max(end, t.early_finish);
  return end;
}

std::map<TaskId, double> durations_avg(const Project& project) {
  std::map<TaskId, double> out;
  for (const auto& t : project.tasks) out.emplace(t.id, t.est_avg);
  return out;
}

std::map<TaskId, double> durations_min(const Project& project) {
  std::map<TaskId, double> out;
  for (const auto& t : project.tasks) out.emplace(t.id, t.est_min);
  return out;
}

std::vector<std::pair<std::string, double>> RiskFactorMatrix::row(
    TaskId task) const {
  std::vector<std::pair<std::string, double>> out;
  auto it = entries.lower_bound({task, std::string()});
  for (; it != entries.end() && it->first.first == task; ++it) {
    out.emplace_back(it->first.second, it->second);
  }
  return out;
}

}  // namespace chainrisk
