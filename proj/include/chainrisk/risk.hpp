#pragma once

#include <array>
#include <string>
#include <vector>

#include "chainrisk/fuzzy.hpp"
#include "chainrisk/project.hpp"
#include "json.hpp"

namespace chainrisk {

/// Pairwise comparisons of the criteria (cost, time, quality); entry [k][l]
/// is the importance of criterion k over criterion l.
struct AhpComparisonMatrix {
  std::array<std::array<TrapezoidalFuzzyNumber, 3>, 3> entries;

  /// All entries crisp 1: the three criteria weigh the same.
  static AhpComparisonMatrix uniform();
};

struct CriteriaWeights {
  double tpc = 0.0;
  double tpt = 0.0;
  double tpq = 0.0;
};

struct RiskAssessment {
  std::string risk_id;
  double ai = 0.0;
  double rcn = 0.0;
  int rank = 0;
};

/// Row means of the graded-mean defuzzified matrix, normalised to sum 1.
/// Throws kDegenerate when every row mean is zero.
CriteriaWeights ahp_weights(const AhpComparisonMatrix& matrix);

double aggregated_impact(const CriteriaWeights& w, const RiskEvent& r);

/// Output term = round(mean of the three input term indices). With D read
/// as "10 = least detectable" every input raises the output.
RuleBase default_rule_base();

/// Centroid of the Mamdani output for (P, AI, D).
double risk_criticality(double p, double ai, double d, const RuleBase& rb);

/// Assesses every risk and ranks by RCN descending, ties by risk id.
std::vector<RiskAssessment> rank_register(const std::vector<RiskEvent>& risks,
                                          const AhpComparisonMatrix& matrix,
                                          const RuleBase& rb);

/// Accepts {"matrix": [[q,q,q],[q,q,q],[q,q,q]]} or the bare 3x3 array,
/// where q is a number or an [l,m,n,o] quadruple. Diagonal entries must be
/// crisp 1.
AhpComparisonMatrix ahp_from_json(const nlohmann::json& doc);

}  // namespace chainrisk
