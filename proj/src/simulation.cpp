#include "chainrisk/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <thread>

#include "chainrisk/error.hpp"

namespace chainrisk {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t replication) {
  std::uint64_t state = seed;
  const std::uint64_t base = splitmix64(state);
  state = base ^ (replication * 0xD1342543DE82EF95ULL + 1);
  splitmix64(state);
  return splitmix64(state);
}

}  // namespace

ReplicationStream::ReplicationStream(std::uint64_t seed,
                                     std::uint64_t replication)
    : engine_(stream_seed(seed, replication)) {}

double ReplicationStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double sample_duration(const Task& task,
                       const std::vector<std::pair<std::string, double>>& rf_row,
                       const std::map<std::string, double>& draws) {
  double load = 0.0;
  for (const auto& [risk, rf] : rf_row) {
    auto it = draws.find(risk);
    if (it != draws.end()) load += rf * it->second;
  }
  load = std::clamp(load, 0.0, 1.0);
  return task.est_min + (task.est_max - task.est_min) * load;
}

double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) {
    throw Error(ErrorCode::kInvalidInput, "quantile of an empty sample");
  }
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double w = pos - static_cast<double>(lo);
  return sorted[lo] + w * (sorted[hi] - sorted[lo]);
}

SimulationResult run_simulation(const Project& project,
                                const RiskFactorMatrix& matrix,
                                const BaselineSchedule& baseline,
                                const SimConfig& cfg) {
  if (cfg.replications < 1) {
    throw Error(ErrorCode::kInvalidInput, "replications must be >= 1");
  }
  const Network net = build_network(project, baseline.resource_links);
  const std::size_t n = net.size();

  std::set<std::string> risk_set;
  for (const auto& [key, rf] : matrix.entries) {
    if (!project.index_of(key.first)) {
      throw Error(ErrorCode::kUnknownTask,
                  "risk factor for unknown task " + std::to_string(key.first));
    }
    risk_set.insert(key.second);
  }
  const std::vector<std::string> risks(risk_set.begin(), risk_set.end());

  struct Exposure {
    std::size_t risk;
    double rf;
  };
  std::vector<std::vector<Exposure>> exposure(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& [risk, rf] : matrix.row(net.ids[i])) {
      const auto k = static_cast<std::size_t>(
          std::lower_bound(risks.begin(), risks.end(), risk) - risks.begin());
      exposure[i].push_back({k, rf});
    }
  }

  const std::size_t reps = cfg.replications;
  std::vector<double> makespans(reps);
  unsigned workers = cfg.workers == 0 ? std::thread::hardware_concurrency()
                                      : cfg.workers;
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(
                                                         std::min<std::size_t>(reps, 1024))));
  std::vector<std::vector<std::size_t>> critical(workers,
                                                 std::vector<std::size_t>(n, 0));

  auto run_block = [&](unsigned w, std::size_t first, std::size_t last) {
    std::vector<double> draws(risks.size()), dur(n), ef(n), ls(n);
    auto& counts = critical[w];
    for (std::size_t r = first; r < last; ++r) {
      ReplicationStream rng(cfg.seed, r);
      for (double& u : draws) u = rng.uniform();
      for (std::size_t i = 0; i < n; ++i) {
        const Task& t = project.tasks[i];
        double load = 0.0;
        for (const auto& e : exposure[i]) load += e.rf * draws[e.risk];
        load = std::clamp(load, 0.0, 1.0);
        dur[i] = t.est_min + (t.est_max - t.est_min) * load;
      }
      double end = 0.0;
      for (std::size_t v : net.topo) {
        double es = 0.0;
        for (std::size_t p : net.preds[v]) es = std::max(es, ef[p]);
        ef[v] = es + dur[v];
        end = std::max(end, ef[v]);
      }
      const double tol = time_tolerance(end);
      for (auto it = net.topo.rbegin(); it != net.topo.rend(); ++it) {
        const std::size_t v = *it;
        double lf = end;
        for (std::size_t s : net.succs[v]) lf = std::min(lf, ls[s]);
        ls[v] = lf - dur[v];
        const double es = ef[v] - dur[v];
        if (ls[v] - es <= tol) ++counts[v];
      }
      makespans[r] = end;
    }
  };

  if (workers == 1) {
    run_block(0, 0, reps);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (reps + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t first = std::min(reps, w * chunk);
      const std::size_t last = std::min(reps, first + chunk);
      pool.emplace_back(run_block, w, first, last);
    }
    for (auto& th : pool) th.join();
  }

  SimulationResult result;
  // Welford in replication order: deterministic, and exactly zero spread
  // for a constant sample.
  double mean = 0.0, m2 = 0.0;
  for (std::size_t r = 0; r < reps; ++r) {
    const double x = makespans[r];
    const double delta = x - mean;
    mean += delta / static_cast<double>(r + 1);
    m2 += delta * (x - mean);
  }
  result.mean = mean;
  result.std = reps > 1 ? std::sqrt(std::max(0.0, m2) /
                                    static_cast<double>(reps - 1))
                        : 0.0;

  std::vector<double> sorted = makespans;
  std::sort(sorted.begin(), sorted.end());
  result.min = sorted.front();
  result.max = sorted.back();
  result.percentiles = {quantile(sorted, 0.10), quantile(sorted, 0.50),
                        quantile(sorted, 0.80), quantile(sorted, 0.90),
                        quantile(sorted, 0.95)};
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t total = 0;
    for (const auto& counts : critical) total += counts[i];
    result.criticality_index[net.ids[i]] =
        static_cast<double>(total) / static_cast<double>(reps);
  }
  result.makespans = std::move(makespans);
  const auto deadline = cfg.deadline ? cfg.deadline : project.deadline;
  if (deadline) {
    result.deadline_probability = deadline_probability(result, *deadline);
  }
  return result;
}

double deadline_probability(const SimulationResult& result, double deadline) {
  if (result.makespans.empty()) {
    throw Error(ErrorCode::kInvalidInput, "empty simulation result");
  }
  std::size_t hits = 0;
  for (double m : result.makespans) hits += m <= deadline ? 1 : 0;
  return static_cast<double>(hits) /
         static_cast<double>(result.makespans.size());
}

const std::map<TaskId, double>& criticality_indices(
    const SimulationResult& result) {
  return result.criticality_index;
}

std::vector<HistogramBin> histogram(const SimulationResult& result,
                                    std::size_t bins) {
  if (result.makespans.empty() || bins == 0) return {};
  const double lo = result.min;
  const double hi = result.max;
  if (!(hi > lo)) return {{lo, hi, result.makespans.size()}};
  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<HistogramBin> out(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].lower = lo + width * static_cast<double>(b);
    out[b].upper = b + 1 == bins ? hi : lo + width * static_cast<double>(b + 1);
  }
  for (double m : result.makespans) {
    auto b = static_cast<std::size_t>((m - lo) / width);
    out[std::min(b, bins - 1)].count += 1;
  }
  return out;
}

}  // namespace chainrisk
