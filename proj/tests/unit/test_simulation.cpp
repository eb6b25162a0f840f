#include <algorithm>
#include <numeric>
#include <random>

#include "../support.hpp"
#include "chainrisk/simulation.hpp"
#include "doctest.h"

using namespace chainrisk;
using doctest::Approx;
using testsupport::error_code;
using testsupport::make_project;
using testsupport::uniform;

namespace {

Project ranged(const std::vector<std::pair<double, double>>& min_max,
               const std::vector<Arc>& arcs) {
  std::vector<double> avg;
  for (const auto& [lo, hi] : min_max) avg.push_back(lo);
  Project p = make_project(avg, arcs);
  for (std::size_t i = 0; i < min_max.size(); ++i) {
    p.tasks[i].est_min = min_max[i].first;
    p.tasks[i].est_max = p.tasks[i].est_safe = min_max[i].second;
  }
  return p;
}

SimulationResult simulate(const Project& p, const RiskFactorMatrix& m, std::size_t reps,
                          std::uint64_t seed = 1, unsigned workers = 1) {
  SimConfig cfg;
  cfg.replications = reps;
  cfg.seed = seed;
  cfg.workers = workers;
  return run_simulation(p, m, build_baseline(p), cfg);
}

}  // namespace

TEST_CASE("sample duration examples") {
  Task t;
  t.est_min = 10;
  t.est_max = 20;
  CHECK(sample_duration(t, {}, {}) == 10);
  CHECK(sample_duration(t, {{"R1", 1.0}, {"R2", 1.0}}, {{"R1", 0.9}, {"R2", 0.8}}) == 20);
  CHECK(sample_duration(t, {{"R1", 0.5}, {"R2", 0.5}}, {{"R1", 0.4}, {"R2", 0.8}}) ==
        Approx(16).epsilon(1e-15));
}

TEST_CASE("property: sampled durations stay inside [min, max]") {
  std::mt19937_64 rng(51);
  for (int k = 0; k < 2000; ++k) {
    Task t;
    t.est_min = uniform(rng, 0, 10);
    t.est_max = t.est_min + uniform(rng, 0, 10);
    std::vector<std::pair<std::string, double>> row;
    std::map<std::string, double> draws;
    for (int r = 0; r < 4; ++r) {
      const std::string id = "R" + std::to_string(r);
      row.emplace_back(id, uniform(rng, 0, 1));
      draws[id] = uniform(rng, 0, 1);
    }
    const double d = sample_duration(t, row, draws);
    CHECK(d >= t.est_min);
    CHECK(d <= t.est_max);
  }
}

TEST_CASE("no risk factors: every replication is the min-duration makespan") {
  std::mt19937_64 rng(52);
  Project p = testsupport::random_dag(rng, 15, 1.5);
  for (auto& t : p.tasks) t.est_max = t.est_safe = t.est_avg + 5;
  const auto res = simulate(p, {}, 500);
  const double cpm = makespan(cpm_pass(p, durations_min(p)));
  CHECK(res.std == 0.0);
  for (double m : res.makespans) CHECK(m == cpm);
}

TEST_CASE("analytic means") {
  RiskFactorMatrix one;
  one.entries[{1, "R1"}] = 1.0;
  CHECK(simulate(ranged({{10, 20}}, {}), one, 100000).mean == Approx(15).epsilon(5e-3));

  // One shared draw drives both tasks of a series: mean 30, spread 2 * 10/sqrt(12).
  RiskFactorMatrix shared;
  shared.entries[{1, "R1"}] = 1.0;
  shared.entries[{2, "R1"}] = 1.0;
  const auto res = simulate(ranged({{10, 20}, {10, 20}}, {{1, 2}}), shared, 100000);
  CHECK(res.mean == Approx(30).epsilon(5e-3));
  CHECK(res.std == Approx(20 / std::sqrt(12.0)).epsilon(1e-2));
  CHECK(res.min >= 20);
  CHECK(res.max <= 40);
}

TEST_CASE("determinism across worker counts") {
  std::mt19937_64 rng(53);
  Project p = testsupport::random_dag(rng, 20, 1.0);
  RiskFactorMatrix m;
  for (auto& t : p.tasks) {
    t.est_max = t.est_safe = t.est_avg + 4;
    m.entries[{t.id, "R" + std::to_string(t.id % 3)}] = 0.7;
  }
  const auto a = simulate(p, m, 3001, 42, 1);
  for (unsigned w : {2u, 3u, 8u}) {
    const auto b = simulate(p, m, 3001, 42, w);
    CHECK(a.makespans == b.makespans);
    CHECK(a.mean == b.mean);
    CHECK(a.std == b.std);
    CHECK(a.criticality_index == b.criticality_index);
  }
  CHECK(simulate(p, m, 3001, 43).makespans != a.makespans);
}

TEST_CASE("replication streams are independent of each other") {
  ReplicationStream a(7, 0), b(7, 1), again(7, 0);
  const double x = a.uniform();
  CHECK(x == again.uniform());
  CHECK(x != b.uniform());
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("deadline probability") {
  RiskFactorMatrix m;
  m.entries[{1, "R1"}] = 1.0;
  const Project p = ranged({{10, 20}}, {});
  const auto res = simulate(p, m, 20000);
  CHECK(deadline_probability(res, 9.99) == 0.0);
  CHECK(deadline_probability(res, 20) == 1.0);
  CHECK(deadline_probability(res, res.percentiles.p50) == Approx(0.5).epsilon(1e-3));
  CHECK_FALSE(res.deadline_probability.has_value());

  SimConfig cfg;
  cfg.replications = 100;
  cfg.deadline = 15;
  CHECK(run_simulation(p, m, build_baseline(p), cfg).deadline_probability.has_value());
}

TEST_CASE("criticality indices") {
  RiskFactorMatrix m;
  m.entries[{2, "R1"}] = 1.0;
  m.entries[{3, "R2"}] = 1.0;

  const auto series = simulate(ranged({{1, 1}, {0, 5}, {0, 5}}, {{1, 2}, {2, 3}}), m, 1000);
  for (const auto& [id, ci] : series.criticality_index) CHECK(ci == 1.0);

  // Branch 2 is always longer than branch 3.
  const auto lopsided = simulate(
      ranged({{0, 0}, {10, 20}, {0, 5}, {0, 0}}, {{1, 2}, {1, 3}, {2, 4}, {3, 4}}), m, 1000);
  CHECK(lopsided.criticality_index.at(2) == 1.0);
  CHECK(lopsided.criticality_index.at(3) == 0.0);

  const auto symmetric = simulate(
      ranged({{0, 0}, {0, 10}, {0, 10}, {0, 0}}, {{1, 2}, {1, 3}, {2, 4}, {3, 4}}), m, 100000);
  CHECK(std::abs(symmetric.criticality_index.at(2) - 0.5) < 0.02);
  CHECK(std::abs(symmetric.criticality_index.at(3) - 0.5) < 0.02);
  CHECK(&criticality_indices(symmetric) == &symmetric.criticality_index);
}

TEST_CASE("property: raising a risk factor never shortens a replication") {
  std::mt19937_64 rng(54);
  for (int k = 0; k < 20; ++k) {
    Project p = testsupport::random_dag(rng, testsupport::uniform_int(rng, 2, 15), 1.2);
    RiskFactorMatrix m;
    for (auto& t : p.tasks) {
      t.est_max = t.est_safe = t.est_avg + uniform(rng, 0, 6);
      m.entries[{t.id, "R" + std::to_string(testsupport::uniform_int(rng, 1, 3))}] =
          uniform(rng, 0, 0.8);
    }
    RiskFactorMatrix more = m;
    auto it = std::next(more.entries.begin(),
                        testsupport::uniform_int(rng, 0, static_cast<int>(more.entries.size()) - 1));
    it->second = std::min(1.0, it->second + uniform(rng, 0, 0.5));
    const auto a = simulate(p, m, 500, 9);
    const auto b = simulate(p, more, 500, 9);
    for (std::size_t r = 0; r < a.makespans.size(); ++r) CHECK(b.makespans[r] >= a.makespans[r]);
  }
}

TEST_CASE("simulation input errors") {
  RiskFactorMatrix m;
  m.entries[{9, "R1"}] = 1.0;
  const Project p = ranged({{1, 2}}, {});
  CHECK(error_code([&] { simulate(p, m, 10); }) == ErrorCode::kUnknownTask);
  CHECK(error_code([&] { simulate(p, {}, 0); }) == ErrorCode::kInvalidInput);
  CHECK(error_code([] { quantile({}, 0.5); }) == ErrorCode::kInvalidInput);
}

TEST_CASE("quantiles and histogram") {
  const std::vector<double> s{1, 2, 3, 4, 5};
  CHECK(quantile(s, 0) == 1);
  CHECK(quantile(s, 1) == 5);
  CHECK(quantile(s, 0.5) == 3);
  CHECK(quantile(s, 0.1) == Approx(1.4).epsilon(1e-15));

  RiskFactorMatrix m;
  m.entries[{1, "R1"}] = 1.0;
  const auto res = simulate(ranged({{10, 20}}, {}), m, 10000);
  const auto bins = histogram(res, 20);
  REQUIRE(bins.size() == 20);
  std::size_t total = 0;
  for (const auto& b : bins) {
    total += b.count;
    CHECK(b.upper > b.lower);
  }
  CHECK(total == 10000);
  CHECK(bins.front().lower == res.min);
  CHECK(bins.back().upper == Approx(res.max).epsilon(1e-12));
  CHECK(res.percentiles.p10 <= res.percentiles.p50);
  CHECK(res.percentiles.p50 <= res.percentiles.p80);
  CHECK(res.percentiles.p80 <= res.percentiles.p90);
  CHECK(res.percentiles.p90 <= res.percentiles.p95);
}
