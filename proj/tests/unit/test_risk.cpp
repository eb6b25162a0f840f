#include <algorithm>
#include <random>
#include <set>

#include "../support.hpp"
#include "chainrisk/risk.hpp"
#include "doctest.h"

using namespace chainrisk;
using doctest::Approx;
using testsupport::error_code;
using testsupport::uniform;

namespace {

AhpComparisonMatrix crisp(const std::array<std::array<double, 3>, 3>& m) {
  AhpComparisonMatrix out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out.entries[i][j] = TrapezoidalFuzzyNumber::crisp(m[i][j]);
  return out;
}

RiskEvent risk(std::string id, double p, double ic, double ti, double iq, double d) {
  RiskEvent r;
  r.id = std::move(id);
  r.p = p;
  r.impact_cost = ic;
  r.impact_time = ti;
  r.impact_quality = iq;
  r.d = d;
  return r;
}

}  // namespace

TEST_CASE("ahp weights examples") {
  const auto u = ahp_weights(AhpComparisonMatrix::uniform());
  CHECK(u.tpc == Approx(1.0 / 3).epsilon(1e-15));
  CHECK(u.tpt == Approx(1.0 / 3).epsilon(1e-15));
  CHECK(u.tpq == Approx(1.0 / 3).epsilon(1e-15));

  // Row means 3, 1.5, 1.5.
  const auto w = ahp_weights(crisp({{{1, 4, 4}, {0.5, 1, 3}, {0.5, 3, 1}}}));
  CHECK(w.tpc == Approx(0.5).epsilon(1e-15));
  CHECK(w.tpt == Approx(0.25).epsilon(1e-15));
  CHECK(w.tpq == Approx(0.25).epsilon(1e-15));
}

TEST_CASE("property: ahp weights sum to one and ignore uniform scaling") {
  std::mt19937_64 rng(21);
  for (int k = 0; k < 500; ++k) {
    AhpComparisonMatrix m;
    for (auto& row : m.entries)
      for (auto& e : row) {
        std::array<double, 4> c{};
        for (auto& x : c) x = uniform(rng, 0.1, 9);
        std::sort(c.begin(), c.end());
        e = {c[0], c[1], c[2], c[3]};
      }
    const auto w = ahp_weights(m);
    CHECK(std::abs(w.tpc + w.tpt + w.tpq - 1.0) <= 1e-12);
    AhpComparisonMatrix twice = m;
    for (auto& row : twice.entries)
      for (auto& e : row) e = {2 * e.l, 2 * e.m, 2 * e.n, 2 * e.o};
    const auto w2 = ahp_weights(twice);
    CHECK(w2.tpc == Approx(w.tpc).epsilon(1e-12));
    CHECK(w2.tpt == Approx(w.tpt).epsilon(1e-12));
    CHECK(w2.tpq == Approx(w.tpq).epsilon(1e-12));
  }
}

TEST_CASE("ahp errors") {
  CHECK(error_code([] { ahp_weights(crisp({{{0, 0, 0}, {0, 0, 0}, {0, 0, 0}}})); }) ==
        ErrorCode::kDegenerate);
  CHECK(error_code([] { ahp_weights(crisp({{{1, -1, 1}, {1, 1, 1}, {1, 1, 1}}})); }) ==
        ErrorCode::kInvalidInput);
}

TEST_CASE("ahp JSON ingestion") {
  const auto m = ahp_from_json(nlohmann::json::parse(
      R"({"matrix": [[1, [1,2,3,4], 3], [0.5, 1, 1], [0.25, 1, 1]]})"));
  CHECK(m.entries[0][1].m == 2);
  CHECK(m.entries[0][2].o == 3);
  CHECK_NOTHROW(ahp_from_json(nlohmann::json::parse("[[1,1,1],[1,1,1],[1,1,1]]")));
  CHECK(error_code([] {
          ahp_from_json(nlohmann::json::parse("[[2,1,1],[1,1,1],[1,1,1]]"));
        }) == ErrorCode::kRange);
  CHECK(error_code([] { ahp_from_json(nlohmann::json::parse("[[1,1],[1,1]]")); }) ==
        ErrorCode::kMalformed);
  CHECK(error_code([] {
          ahp_from_json(nlohmann::json::parse("[[1,[4,3,2,1],1],[1,1,1],[1,1,1]]"));
        }) == ErrorCode::kRange);
}

TEST_CASE("aggregated impact examples") {
  CHECK(aggregated_impact({1.0 / 3, 1.0 / 3, 1.0 / 3}, risk("a", 1, 6, 6, 6, 1)) ==
        Approx(6).epsilon(1e-15));
  CHECK(aggregated_impact({0.5, 0.3, 0.2}, risk("a", 1, 8, 5, 4, 1)) ==
        Approx(6.3).epsilon(1e-15));
  CHECK(aggregated_impact({1, 0, 0}, risk("a", 1, 7.25, 2, 3, 1)) == 7.25);
}

TEST_CASE("property: aggregated impact is a convex combination") {
  std::mt19937_64 rng(22);
  for (int k = 0; k < 1000; ++k) {
    double a = uniform(rng, 0, 1), b = uniform(rng, 0, 1), c = uniform(rng, 0, 1);
    const double s = a + b + c;
    const RiskEvent r = risk("r", 5, uniform(rng, 1, 10), uniform(rng, 1, 10),
                             uniform(rng, 1, 10), 5);
    const double ai = aggregated_impact({a / s, b / s, c / s}, r);
    const double lo = std::min({r.impact_cost, r.impact_time, r.impact_quality});
    const double hi = std::max({r.impact_cost, r.impact_time, r.impact_quality});
    CHECK(ai >= lo - 1e-12);
    CHECK(ai <= hi + 1e-12);
  }
}

TEST_CASE("risk criticality reference points") {
  const RuleBase rb = default_rule_base();
  CHECK(risk_criticality(5.5, 5.5, 5.5, rb) == Approx(5.5).epsilon(1e-12));
  const double top = risk_criticality(10, 10, 10, rb);
  CHECK(top >= 8);
  CHECK(top <= 10);
  // Regression constants of the default engine.
  CHECK(top == Approx(9.253333).epsilon(1e-6));
  CHECK(risk_criticality(1, 1, 1, rb) == Approx(1.746667).epsilon(1e-6));

  RuleBase classic = rb;
  classic.conjunction = Conjunction::kMin;
  classic.aggregation = Aggregation::kMax;
  CHECK(risk_criticality(5.5, 5.5, 5.5, classic) == Approx(5.5).epsilon(1e-12));
}

TEST_CASE("property: default engine is point-symmetric about 5.5") {
  std::mt19937_64 rng(23);
  const RuleBase rb = default_rule_base();
  for (int k = 0; k < 100; ++k) {
    const double p = uniform(rng, 1, 10), a = uniform(rng, 1, 10), d = uniform(rng, 1, 10);
    CHECK(risk_criticality(p, a, d, rb) + risk_criticality(11 - p, 11 - a, 11 - d, rb) ==
          Approx(11.0).epsilon(1e-9));
  }
}

TEST_CASE("property: raising one input never lowers criticality") {
  std::mt19937_64 rng(24);
  const RuleBase rb = default_rule_base();
  for (int k = 0; k < 300; ++k) {
    double in[3] = {uniform(rng, 1, 10), uniform(rng, 1, 10), uniform(rng, 1, 10)};
    const double before = risk_criticality(in[0], in[1], in[2], rb);
    const int j = testsupport::uniform_int(rng, 0, 2);
    in[j] = uniform(rng, in[j], 10);
    CHECK(risk_criticality(in[0], in[1], in[2], rb) >= before - 1e-9);
  }
}

TEST_CASE("rank register examples") {
  const auto ahp = AhpComparisonMatrix::uniform();
  const RuleBase rb = default_rule_base();

  const auto one = rank_register({risk("R1", 4, 4, 4, 4, 4)}, ahp, rb);
  REQUIRE(one.size() == 1);
  CHECK(one[0].rank == 1);

  const auto tied =
      rank_register({risk("R2", 6, 5, 5, 5, 6), risk("R1", 6, 5, 5, 5, 6)}, ahp, rb);
  CHECK(tied[0].risk_id == "R1");
  CHECK(tied[1].risk_id == "R2");
  CHECK(tied[0].rcn == tied[1].rcn);
  CHECK(tied[1].rank == 2);

  const auto by_p = rank_register(
      {risk("A", 3, 5, 5, 5, 5), risk("B", 9, 5, 5, 5, 5), risk("C", 6, 5, 5, 5, 5)},
      ahp, rb);
  CHECK(by_p[0].risk_id == "B");
  CHECK(by_p[1].risk_id == "C");
  CHECK(by_p[2].risk_id == "A");
  CHECK(by_p[0].rcn > by_p[1].rcn);
  CHECK(by_p[1].rcn > by_p[2].rcn);

  CHECK(error_code([&] { rank_register({}, ahp, rb); }) == ErrorCode::kInvalidInput);
}

TEST_CASE("property: ranks are a permutation with non-increasing RCN") {
  std::mt19937_64 rng(25);
  const RuleBase rb = default_rule_base();
  for (int k = 0; k < 20; ++k) {
    std::vector<RiskEvent> reg;
    const int n = testsupport::uniform_int(rng, 1, 15);
    for (int i = 0; i < n; ++i) {
      reg.push_back(risk("R" + std::to_string(i), uniform(rng, 1, 10), uniform(rng, 1, 10),
                         uniform(rng, 1, 10), uniform(rng, 1, 10), uniform(rng, 1, 10)));
    }
    const auto out = rank_register(reg, AhpComparisonMatrix::uniform(), rb);
    REQUIRE(out.size() == reg.size());
    std::set<int> ranks;
    std::set<std::string> ids;
    for (std::size_t i = 0; i < out.size(); ++i) {
      ranks.insert(out[i].rank);
      ids.insert(out[i].risk_id);
      CHECK(out[i].rank == static_cast<int>(i + 1));
      if (i > 0) CHECK(out[i].rcn <= out[i - 1].rcn);
      CHECK(out[i].ai >= 1.0);
      CHECK(out[i].ai <= 10.0);
    }
    CHECK(ranks.size() == out.size());
    CHECK(ids.size() == out.size());
  }
}
