#include "chainrisk/risk.hpp"

#include <algorithm>
#include <cmath>

#include "chainrisk/error.hpp"

namespace chainrisk {

AhpComparisonMatrix AhpComparisonMatrix::uniform() {
  AhpComparisonMatrix m;
  for (auto& row : m.entries) row.fill(TrapezoidalFuzzyNumber::crisp(1.0));
  return m;
}

CriteriaWeights ahp_weights(const AhpComparisonMatrix& matrix) {
  std::array<double, 3> tp{};
  for (std::size_t i = 0; i < 3; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
      const auto& e = matrix.entries[i][j];
      if (e.l < 0.0) {
        throw Error(ErrorCode::kInvalidInput,
                    "comparison entries must be nonnegative");
      }
      sum += graded_mean(e);
    }
    tp[i] = sum / 3.0;
  }
  const double total = tp[0] + tp[1] + tp[2];
  if (!(total > 0.0)) {
    throw Error(ErrorCode::kDegenerate, "all criteria priorities are zero");
  }
  return {tp[0] / total, tp[1] / total, tp[2] / total};
}

double aggregated_impact(const CriteriaWeights& w, const RiskEvent& r) {
  return w.tpc * r.impact_cost + w.tpt * r.impact_time +
         w.tpq * r.impact_quality;
}

RuleBase default_rule_base() {
  RuleBase rb;
  rb.inputs = {default_scale(), default_scale(), default_scale()};
  rb.output = default_scale();
  for (std::size_t p = 0; p < kTermCount; ++p) {
    for (std::size_t a = 0; a < kTermCount; ++a) {
      for (std::size_t d = 0; d < kTermCount; ++d) {
        // Means are k/3, never a half, so rounding is unambiguous.
        const auto out = static_cast<std::size_t>(
            std::lround(static_cast<double>(p + a + d) / 3.0));
        rb.rules.push_back({{p, a, d}, out});
      }
    }
  }
  return rb;
}

double risk_criticality(double p, double ai, double d, const RuleBase& rb) {
  return centroid(mamdani_infer(rb, p, ai, d));
}

std::vector<RiskAssessment> rank_register(const std::vector<RiskEvent>& risks,
                                          const AhpComparisonMatrix& matrix,
                                          const RuleBase& rb) {
  if (risks.empty()) {
    throw Error(ErrorCode::kInvalidInput, "risk register is empty");
  }
  const CriteriaWeights w = ahp_weights(matrix);
  std::vector<RiskAssessment> out;
  out.reserve(risks.size());
  for (const auto& r : risks) {
    const double ai = aggregated_impact(w, r);
    out.push_back({r.id, ai, risk_criticality(r.p, ai, r.d, rb), 0});
  }
  std::sort(out.begin(), out.end(),
            [](const RiskAssessment& a, const RiskAssessment& b) {
              if (a.rcn != b.rcn) return a.rcn > b.rcn;
              return a.risk_id < b.risk_id;
            });
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].rank = static_cast<int>(i + 1);
  }
  return out;
}

namespace {

TrapezoidalFuzzyNumber tfn_from_json(const nlohmann::json& v,
                                     const std::string& where) {
  if (v.is_number()) return TrapezoidalFuzzyNumber::crisp(v.get<double>());
  if (!v.is_array() || v.size() != 4) {
    throw Error(ErrorCode::kMalformed,
                where + ": expected a number or [l,m,n,o]");
  }
  TrapezoidalFuzzyNumber t{v[0].get<double>(), v[1].get<double>(),
                           v[2].get<double>(), v[3].get<double>()};
  if (!t.ordered()) {
    throw Error(ErrorCode::kRange, where + ": corners must be ordered");
  }
  return t;
}

}  // namespace

AhpComparisonMatrix ahp_from_json(const nlohmann::json& doc) {
  AhpComparisonMatrix m;
  try {
    const auto& rows = doc.is_object() ? doc.at("matrix") : doc;
    if (!rows.is_array() || rows.size() != 3) {
      throw Error(ErrorCode::kMalformed, "AHP matrix: expected 3 rows");
    }
    for (std::size_t i = 0; i < 3; ++i) {
      if (!rows[i].is_array() || rows[i].size() != 3) {
        throw Error(ErrorCode::kMalformed,
                    "AHP matrix row " + std::to_string(i) + ": expected 3 entries");
      }
      for (std::size_t j = 0; j < 3; ++j) {
        const std::string where =
            "AHP matrix [" + std::to_string(i) + "][" + std::to_string(j) + "]";
        m.entries[i][j] = tfn_from_json(rows[i][j], where);
        if (m.entries[i][j].l < 0.0) {
          throw Error(ErrorCode::kRange, where + ": must be nonnegative");
        }
        if (i == j) {
          const auto& e = m.entries[i][j];
          if (e.l != 1.0 || e.m != 1.0 || e.n != 1.0 || e.o != 1.0) {
            throw Error(ErrorCode::kRange, where + ": diagonal must be crisp 1");
          }
        }
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformed, std::string("AHP matrix: ") + e.what());
  }
  return m;
}

}  // namespace chainrisk
