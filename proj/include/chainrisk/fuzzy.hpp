#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace chainrisk {

/// Trapezoid (l, m, n, o): support [l, o], core [m, n].
struct TrapezoidalFuzzyNumber {
  double l = 0.0;
  double m = 0.0;
  double n = 0.0;
  double o = 0.0;

  static TrapezoidalFuzzyNumber crisp(double v) { return {v, v, v, v}; }
  bool ordered() const { return l <= m && m <= n && n <= o; }
};

/// Graded-mean defuzzification (l + 2(m + n) + o) / 6.
/// Throws kInvalidInput when the corners are out of order.
double graded_mean(const TrapezoidalFuzzyNumber& tfn);

/// Piecewise-linear membership curve. Values are held flat beyond the
/// first and last breakpoints, which is how shoulders are expressed.
struct MembershipFunction {
  std::vector<std::pair<double, double>> points;

  double operator()(double x) const;
};

struct Term {
  std::string label;
  MembershipFunction mf;
};

struct LinguisticScale {
  double lo = 1.0;
  double hi = 10.0;
  std::vector<Term> terms;

  /// Throws kUnknownTerm.
  std::size_t index_of(std::string_view label) const;
  /// Checks the five-term, [0,1]-valued, covering layout. Throws
  /// kInvalidInput naming the first problem.
  void validate() const;
};

inline constexpr std::size_t kTermCount = 5;
inline constexpr double kSampleStep = 0.01;

/// Five triangles centred on {1, 3.25, 5.5, 7.75, 10}, each falling to zero
/// at its neighbours' centres; the outer two are shoulders.
LinguisticScale default_scale();

/// Throws kUnknownTerm or kOutOfUniverse.
double membership(const LinguisticScale& scale, std::string_view label,
                  double x);

/// Membership sampled on lo, lo + 0.01, ..., hi.
struct FuzzySet {
  double lo = 1.0;
  double hi = 10.0;
  std::vector<double> mu;

  static FuzzySet empty(double lo, double hi);
  std::size_t size() const { return mu.size(); }
  double x(std::size_t i) const;
};

struct Rule {
  std::array<std::size_t, 3> inputs{};  // term indices for (P, AI, D)
  std::size_t output = 0;
};

/// How antecedent memberships combine into a firing strength.
enum class Conjunction { kMin, kProduct };

/// How firing strengths of rules sharing a consequent combine before the
/// consequent is clipped. kMax is the textbook min-max Mamdani engine;
/// kBoundedSum adds them (capped at 1) so strength moving between rules
/// with the same consequent is not lost.
enum class Aggregation { kMax, kBoundedSum };

struct RuleBase {
  std::array<LinguisticScale, 3> inputs;
  LinguisticScale output;
  std::vector<Rule> rules;
  Conjunction conjunction = Conjunction::kProduct;
  Aggregation aggregation = Aggregation::kBoundedSum;

  /// Scale checks plus exactly one rule per input combination.
  void validate() const;
  std::size_t consequent(std::size_t p, std::size_t ai, std::size_t d) const;
};

/// Mamdani inference: per-rule firing strength (rb.conjunction), clip the
/// consequent term, pointwise max over terms. Inputs must lie in each
/// scale's universe (kOutOfUniverse otherwise).
FuzzySet mamdani_infer(const RuleBase& rb, double p, double ai, double d);

/// Sum(x mu) / Sum(mu) over the samples. Throws kEmptySet on an all-zero set.
double centroid(const FuzzySet& fs);

/// JSON form: {"universe":[lo,hi],"inputs":{"p":S,"ai":S,"d":S},
/// "output":S,"rules":[[p,ai,d,out],...],"and":"product"|"min",
/// "aggregation":"sum"|"max"} with
/// S = {"terms":[{"label":..,"points":[[x,mu],...]},...]}.
RuleBase rule_base_from_json(const nlohmann::json& doc);
nlohmann::json rule_base_to_json(const RuleBase& rb);

}  // namespace chainrisk
