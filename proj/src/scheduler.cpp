#include "chainrisk/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "chainrisk/error.hpp"

namespace chainrisk {

double BaselineSchedule::makespan() const {
  double end = 0.0;
  for (const auto& [id, f] : finish) end = std::max(end, f);
  return end;
}

namespace {

struct Placed {
  std::size_t index;
  double start;
  double finish;
};

double demand_of(const Task& t, const std::string& res) {
  auto it = t.demand.find(res);
  return it == t.demand.end() ? 0.0 : it->second;
}

bool shares_resource(const Task& a, const Task& b) {
  for (const auto& [res, units] : a.demand) {
    if (units > 0.0 && demand_of(b, res) > 0.0) return true;
  }
  return false;
}

}  // namespace

BaselineSchedule build_baseline(const Project& project) {
  for (const Task& t : project.tasks) {
    for (const auto& [res, units] : t.demand) {
      if (units > project.capacity(res)) {
        throw Error(ErrorCode::kInfeasible,
                    "task " + std::to_string(t.id) + " demands " +
                        std::to_string(units) + " of " + res +
                        " but capacity is " +
                        std::to_string(project.capacity(res)));
      }
    }
  }
  const Network net = build_network(project);
  const std::size_t n = net.size();
  const auto cpm = cpm_pass(project, durations_avg(project));

  std::vector<double> dur(n);
  for (std::size_t i = 0; i < n; ++i) dur[i] = project.tasks[i].est_avg;

  std::vector<std::size_t> missing(n);
  for (std::size_t i = 0; i < n; ++i) missing[i] = net.preds[i].size();
  auto priority = [&](std::size_t i) {
    return std::make_pair(cpm.at(net.ids[i]).late_start, net.ids[i]);
  };

  std::vector<bool> done(n, false);
  std::vector<double> start(n, 0.0), finish(n, 0.0);
  std::vector<Placed> placed;
  BaselineSchedule out;

  for (std::size_t step = 0; step < n; ++step) {
    std::size_t pick = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (done[i] || missing[i] != 0) continue;
      if (pick == n || priority(i) < priority(pick)) pick = i;
    }
    const Task& task = project.tasks[pick];
    double es = 0.0;
    for (std::size_t p : net.preds[pick]) es = std::max(es, finish[p]);

    std::vector<std::string> needs;
    for (const auto& [res, units] : task.demand) {
      if (units > 0.0) needs.push_back(res);
    }

    double t0 = es;
    if (dur[pick] > 0.0 && !needs.empty()) {
      std::vector<double> candidates = {es};
      for (const auto& pl : placed) {
        if (pl.finish > es) candidates.push_back(pl.finish);
      }
      std::sort(candidates.begin(), candidates.end());
      candidates.erase(std::unique(candidates.begin(), candidates.end()),
                       candidates.end());

      auto usage = [&](const std::string& res, double at) {
        double u = 0.0;
        for (const auto& pl : placed) {
          if (pl.start <= at && at < pl.finish) {
            u += demand_of(project.tasks[pl.index], res);
          }
        }
        return u;
      };
      auto feasible = [&](double t) {
        const double end = t + dur[pick];
        for (const auto& res : needs) {
          const double cap = project.capacity(res) + 1e-9;
          const double want = demand_of(task, res);
          std::vector<double> probes = {t};
          for (const auto& pl : placed) {
            if (pl.start > t && pl.start < end) probes.push_back(pl.start);
          }
          for (double at : probes) {
            if (usage(res, at) + want > cap) return false;
          }
        }
        return true;
      };
      for (double t : candidates) {
        if (feasible(t)) {
          t0 = t;
          break;
        }
      }
      if (t0 > es) {
        std::optional<std::size_t> releaser;
        for (const auto& pl : placed) {
          if (pl.finish != t0 || pl.finish <= pl.start) continue;
          if (!shares_resource(task, project.tasks[pl.index])) continue;
          if (!releaser || net.ids[pl.index] < net.ids[*releaser]) {
            releaser = pl.index;
          }
        }
        if (releaser) out.resource_links.emplace_back(net.ids[*releaser], task.id);
      }
    }

    start[pick] = t0;
    finish[pick] = t0 + dur[pick];
    done[pick] = true;
    if (dur[pick] > 0.0) placed.push_back({pick, start[pick], finish[pick]});
    for (std::size_t s : net.succs[pick]) --missing[s];
  }

  for (std::size_t i = 0; i < n; ++i) {
    out.start[net.ids[i]] = start[i];
    out.finish[net.ids[i]] = finish[i];
    out.durations_used[net.ids[i]] = dur[i];
  }
  std::sort(out.resource_links.begin(), out.resource_links.end());
  return out;
}

CriticalChainPlan identify_critical_chain(const Project& project,
                                          const BaselineSchedule& schedule) {
  const Network net = build_network(project, schedule.resource_links);
  const std::size_t n = net.size();
  CriticalChainPlan plan;
  plan.makespan = schedule.makespan();
  if (n == 0) return plan;

  std::vector<double> start(n), finish(n), dur(n);
  std::vector<std::size_t> topo_pos(n);
  for (std::size_t i = 0; i < n; ++i) {
    start[i] = schedule.start.at(net.ids[i]);
    finish[i] = schedule.finish.at(net.ids[i]);
    dur[i] = finish[i] - start[i];
  }
  for (std::size_t k = 0; k < n; ++k) topo_pos[net.topo[k]] = k;
  const std::set<Arc> links(schedule.resource_links.begin(),
                            schedule.resource_links.end());
  const double tol = time_tolerance(plan.makespan);

  // Backward trace from the last-finishing task.
  std::size_t cur = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (std::tie(finish[i], start[i], topo_pos[i]) >
        std::tie(finish[cur], start[cur], topo_pos[cur])) {
      cur = i;
    }
  }
  std::vector<std::size_t> chain = {cur};
  while (true) {
    std::optional<std::size_t> step;
    auto rank = [&](std::size_t p) {
      const bool via_link = links.count({net.ids[p], net.ids[cur]}) > 0;
      return std::make_pair(!via_link, net.ids[p]);
    };
    for (std::size_t p : net.preds[cur]) {
      if (std::abs(finish[p] - start[cur]) > tol) continue;
      if (!step || rank(p) < rank(*step)) step = p;
    }
    if (!step) break;
    cur = *step;
    chain.push_back(cur);
  }
  std::reverse(chain.begin(), chain.end());

  std::vector<bool> on_chain(n, false);
  for (std::size_t i : chain) {
    on_chain[i] = true;
    plan.critical_chain.push_back(net.ids[i]);
  }

  // Non-chain tasks that can drain into the chain.
  std::vector<bool> reaches(n, false);
  for (auto it = net.topo.rbegin(); it != net.topo.rend(); ++it) {
    const std::size_t v = *it;
    if (on_chain[v]) continue;
    for (std::size_t s : net.succs[v]) {
      if (on_chain[s] || reaches[s]) reaches[v] = true;
    }
  }

  std::vector<int> owner(n, -1);  // feeding chain index per task
  auto merge_of = [&](std::size_t v) -> TaskId {
    return on_chain[v] ? net.ids[v]
                       : plan.feeding_chains[static_cast<std::size_t>(owner[v])]
                             .merge_task;
  };

  while (true) {
    std::vector<double> len(n, 0.0);
    std::vector<std::optional<std::size_t>> back(n);
    bool any = false;
    for (std::size_t v : net.topo) {
      if (on_chain[v] || !reaches[v] || owner[v] >= 0) continue;
      any = true;
      double best = 0.0;
      for (std::size_t p : net.preds[v]) {
        if (on_chain[p] || !reaches[p] || owner[p] >= 0) continue;
        if (!back[v] || len[p] > best ||
            (len[p] == best && net.ids[p] < net.ids[*back[v]])) {
          best = len[p];
          back[v] = p;
        }
      }
      len[v] = best + dur[v];
    }
    if (!any) break;

    // Terminal: an open task with an arc into the chain or into an
    // already-extracted feeding chain. The attach point is the successor
    // that starts earliest (least slack left), chain tasks first.
    std::optional<std::size_t> term;
    std::size_t term_attach = 0;
    for (std::size_t v : net.topo) {
      if (on_chain[v] || !reaches[v] || owner[v] >= 0) continue;
      std::optional<std::size_t> attach;
      auto key = [&](std::size_t s) {
        return std::make_tuple(start[s], !on_chain[s], net.ids[s]);
      };
      for (std::size_t s : net.succs[v]) {
        if (!on_chain[s] && owner[s] < 0) continue;
        if (!attach || key(s) < key(*attach)) attach = s;
      }
      if (!attach) continue;
      if (!term) {
        term = v;
        term_attach = *attach;
        continue;
      }
      const auto mine = std::make_tuple(-len[v], merge_of(*attach), net.ids[v]);
      const auto best = std::make_tuple(-len[*term], merge_of(term_attach),
                                        net.ids[*term]);
      if (mine < best) {
        term = v;
        term_attach = *attach;
      }
    }
    if (!term) break;

    FeedingChain fc;
    fc.attach_task = net.ids[term_attach];
    fc.merge_task = merge_of(term_attach);
    std::vector<std::size_t> path;
    for (std::optional<std::size_t> v = term; v; v = back[*v]) path.push_back(*v);
    std::reverse(path.begin(), path.end());
    const int idx = static_cast<int>(plan.feeding_chains.size());
    for (std::size_t v : path) {
      owner[v] = idx;
      fc.tasks.push_back(net.ids[v]);
    }
    plan.feeding_chains.push_back(std::move(fc));
  }
  return plan;
}

FeedingSubnetwork feeding_subnetwork(const CriticalChainPlan& plan,
                                     const Project& project, std::size_t index,
                                     VarianceModel variance) {
  const auto& chains = plan.feeding_chains;
  std::vector<bool> in(chains.size(), false);
  in[index] = true;
  std::set<TaskId> members(chains[index].tasks.begin(),
                           chains[index].tasks.end());
  // Chains are extracted before anything joins them, so one forward sweep
  // collects every chain that drains into `index`.
  for (std::size_t j = index + 1; j < chains.size(); ++j) {
    if (members.count(chains[j].attach_task)) {
      in[j] = true;
      members.insert(chains[j].tasks.begin(), chains[j].tasks.end());
    }
  }
  FeedingSubnetwork sub;
  sub.tasks.assign(members.begin(), members.end());
  for (const auto& [a, b] : project.arcs) {
    if (members.count(a) && members.count(b)) ++sub.arc_count;
  }
  sub.arc_count += 1;  // the merge arc
  sub.longest_path = chains[index].tasks;
  for (TaskId id : sub.tasks) {
    sub.variances[id] = activity_variance(project.task(id), variance);
  }
  return sub;
}

FeedingSubnetwork project_subnetwork(const CriticalChainPlan& plan,
                                     const Project& project,
                                     VarianceModel variance) {
  FeedingSubnetwork sub;
  for (const auto& t : project.tasks) {
    sub.tasks.push_back(t.id);
    sub.variances[t.id] = activity_variance(t, variance);
  }
  sub.arc_count = project.arcs.size();
  sub.longest_path = plan.critical_chain;
  return sub;
}

double size_buffer(BufferMethod method, const Project& project,
                   const std::vector<TaskId>& chain,
                   const FeedingSubnetwork& sub) {
  switch (method) {
    case BufferMethod::kCutPaste:
      return cut_paste_buffer(ChainEstimates::of(project, chain));
    case BufferMethod::kRsem:
      return rsem_buffer(ChainEstimates::of(project, chain));
    case BufferMethod::kApd:
      return apd_buffer(sub);
  }
  throw Error(ErrorCode::kUnknownMethod, "unknown buffer method");
}

BufferedSchedule insert_buffers(const CriticalChainPlan& plan,
                                const Project& project,
                                const BaselineSchedule& schedule,
                                BufferMethod method, VarianceModel variance) {
  if (method != BufferMethod::kCutPaste && method != BufferMethod::kRsem &&
      method != BufferMethod::kApd) {
    throw Error(ErrorCode::kUnknownMethod, "unknown buffer method");
  }
  BufferedSchedule out;
  out.plan = plan;
  out.method = method;
  out.variance = variance;
  for (std::size_t i = 0; i < plan.feeding_chains.size(); ++i) {
    const auto& fc = plan.feeding_chains[i];
    const FeedingSubnetwork sub =
        method == BufferMethod::kApd
            ? feeding_subnetwork(plan, project, i, variance)
            : FeedingSubnetwork{};
    const double size = size_buffer(method, project, fc.tasks, sub);
    double work = 0.0;
    for (TaskId id : fc.tasks) work += schedule.durations_used.at(id);
    out.feeding_buffers.push_back(size);
    out.feeding_latest_start.push_back(schedule.start.at(fc.attach_task) -
                                       size - work);
  }
  const FeedingSubnetwork whole =
      method == BufferMethod::kApd ? project_subnetwork(plan, project, variance)
                                   : FeedingSubnetwork{};
  out.project_buffer = size_buffer(method, project, plan.critical_chain, whole);
  out.buffered_completion = plan.makespan + out.project_buffer;
  return out;
}

std::vector<GanttRow> gantt_rows(const Project& project,
                                 const BaselineSchedule& schedule,
                                 const BufferedSchedule& buffered) {
  std::vector<GanttRow> rows;
  for (const Task& t : project.tasks) {
    rows.push_back({std::to_string(t.id), schedule.start.at(t.id),
                    schedule.finish.at(t.id), "task"});
  }
  const auto& chains = buffered.plan.feeding_chains;
  for (std::size_t i = 0; i < chains.size(); ++i) {
    const double end = schedule.start.at(chains[i].attach_task);
    rows.push_back({"FB" + std::to_string(i + 1),
                    end - buffered.feeding_buffers[i], end, "feeding_buffer"});
  }
  rows.push_back({"PB", buffered.plan.makespan,
                  buffered.plan.makespan + buffered.project_buffer,
                  "project_buffer"});
  return rows;
}

}  // namespace chainrisk
