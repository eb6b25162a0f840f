#include "chainrisk/fuzzy.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "chainrisk/error.hpp"

namespace chainrisk {

double graded_mean(const TrapezoidalFuzzyNumber& t) {
  if (!t.ordered()) {
    throw Error(ErrorCode::kInvalidInput,
                "trapezoid corners must satisfy l <= m <= n <= o");
  }
  return (t.l + 2.0 * (t.m + t.n) + t.o) / 6.0;
}

double MembershipFunction::operator()(double x) const {
  if (points.empty()) return 0.0;
  if (x <= points.front().first) return points.front().second;
  if (x >= points.back().first) return points.back().second;
  // First breakpoint strictly right of x.
  auto hi = std::upper_bound(
      points.begin(), points.end(), x,
      [](double v, const std::pair<double, double>& p) { return v < p.first; });
  auto lo = std::prev(hi);
  const double span = hi->first - lo->first;
  if (span <= 0.0) return hi->second;
  const double w = (x - lo->first) / span;
  return lo->second + w * (hi->second - lo->second);
}

std::size_t LinguisticScale::index_of(std::string_view label) const {
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (terms[i].label == label) return i;
  }
  throw Error(ErrorCode::kUnknownTerm,
              "unknown linguistic term '" + std::string(label) + "'");
}

void LinguisticScale::validate() const {
  if (!(lo < hi)) throw Error(ErrorCode::kInvalidInput, "empty universe");
  if (terms.size() != kTermCount) {
    throw Error(ErrorCode::kInvalidInput,
                "scale needs exactly 5 terms, got " +
                    std::to_string(terms.size()));
  }
  for (const auto& t : terms) {
    if (t.mf.points.empty()) {
      throw Error(ErrorCode::kInvalidInput, "term '" + t.label + "' has no points");
    }
    double prev = -INFINITY;
    for (const auto& [x, mu] : t.mf.points) {
      if (!(x >= prev)) {
        throw Error(ErrorCode::kInvalidInput,
                    "term '" + t.label + "' breakpoints must be sorted");
      }
      if (!(mu >= 0.0 && mu <= 1.0)) {
        throw Error(ErrorCode::kInvalidInput,
                    "term '" + t.label + "' membership outside [0,1]");
      }
      prev = x;
    }
  }
  const FuzzySet grid = FuzzySet::empty(lo, hi);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.x(i);
    bool covered = false;
    for (const auto& t : terms) covered = covered || t.mf(x) > 0.0;
    if (!covered) {
      throw Error(ErrorCode::kInvalidInput,
                  "no term covers x = " + std::to_string(x));
    }
  }
}

LinguisticScale default_scale() {
  const double c[kTermCount] = {1.0, 3.25, 5.5, 7.75, 10.0};
  LinguisticScale s;
  s.terms = {
      {"Very Low", {{{c[0], 1.0}, {c[1], 0.0}}}},
      {"Low", {{{c[0], 0.0}, {c[1], 1.0}, {c[2], 0.0}}}},
      {"Medium", {{{c[1], 0.0}, {c[2], 1.0}, {c[3], 0.0}}}},
      {"High", {{{c[2], 0.0}, {c[3], 1.0}, {c[4], 0.0}}}},
      {"Very High", {{{c[3], 0.0}, {c[4], 1.0}}}},
  };
  return s;
}

namespace {

void check_universe(const LinguisticScale& s, double x, const char* what) {
  if (!(x >= s.lo && x <= s.hi)) {
    throw Error(ErrorCode::kOutOfUniverse,
                std::string(what) + " = " + std::to_string(x) +
                    " outside universe [" + std::to_string(s.lo) + "," +
                    std::to_string(s.hi) + "]");
  }
}

std::array<double, kTermCount> fuzzify(const LinguisticScale& s, double x) {
  std::array<double, kTermCount> mu{};
  for (std::size_t i = 0; i < kTermCount && i < s.terms.size(); ++i) {
    mu[i] = s.terms[i].mf(x);
  }
  return mu;
}

}  // namespace

double membership(const LinguisticScale& scale, std::string_view label,
                  double x) {
  const std::size_t idx = scale.index_of(label);
  check_universe(scale, x, "x");
  return scale.terms[idx].mf(x);
}

FuzzySet FuzzySet::empty(double lo, double hi) {
  FuzzySet fs;
  fs.lo = lo;
  fs.hi = hi;
  const auto steps = static_cast<std::size_t>(std::llround((hi - lo) / kSampleStep));
  fs.mu.assign(steps + 1, 0.0);
  return fs;
}

double FuzzySet::x(std::size_t i) const {
  if (mu.size() < 2) return lo;
  return lo + (hi - lo) * static_cast<double>(i) /
                  static_cast<double>(mu.size() - 1);
}

void RuleBase::validate() const {
  for (const auto& s : inputs) s.validate();
  output.validate();
  if (rules.size() != kTermCount * kTermCount * kTermCount) {
    throw Error(ErrorCode::kInvalidInput,
                "rule base needs 125 rules, got " + std::to_string(rules.size()));
  }
  std::set<std::array<std::size_t, 3>> seen;
  for (const auto& r : rules) {
    for (std::size_t k : r.inputs) {
      if (k >= kTermCount) {
        throw Error(ErrorCode::kInvalidInput, "rule antecedent index out of range");
      }
    }
    if (r.output >= kTermCount) {
      throw Error(ErrorCode::kInvalidInput, "rule consequent index out of range");
    }
    if (!seen.insert(r.inputs).second) {
      throw Error(ErrorCode::kInvalidInput, "duplicate rule antecedent");
    }
  }
}

std::size_t RuleBase::consequent(std::size_t p, std::size_t ai,
                                 std::size_t d) const {
  for (const auto& r : rules) {
    if (r.inputs == std::array<std::size_t, 3>{p, ai, d}) return r.output;
  }
  throw Error(ErrorCode::kInvalidInput, "rule base has no rule for combination");
}

FuzzySet mamdani_infer(const RuleBase& rb, double p, double ai, double d) {
  check_universe(rb.inputs[0], p, "p");
  check_universe(rb.inputs[1], ai, "ai");
  check_universe(rb.inputs[2], d, "d");
  const auto mp = fuzzify(rb.inputs[0], p);
  const auto ma = fuzzify(rb.inputs[1], ai);
  const auto md = fuzzify(rb.inputs[2], d);

  // Clip height per output term. Under kMax this is the same as clipping
  // every rule's consequent and taking the pointwise max.
  std::array<double, kTermCount> alpha{};
  for (const auto& r : rb.rules) {
    const double a = mp[r.inputs[0]], b = ma[r.inputs[1]], c = md[r.inputs[2]];
    const double w = rb.conjunction == Conjunction::kMin ? std::min({a, b, c})
                                                         : a * b * c;
    double& h = alpha[r.output];
    h = rb.aggregation == Aggregation::kMax ? std::max(h, w)
                                            : std::min(1.0, h + w);
  }

  FuzzySet out = FuzzySet::empty(rb.output.lo, rb.output.hi);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double x = out.x(i);
    double mu = 0.0;
    for (std::size_t t = 0; t < rb.output.terms.size(); ++t) {
      if (alpha[t] <= 0.0) continue;
      mu = std::max(mu, std::min(alpha[t], rb.output.terms[t].mf(x)));
    }
    out.mu[i] = mu;
  }
  return out;
}

double centroid(const FuzzySet& fs) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    num += fs.x(i) * fs.mu[i];
    den += fs.mu[i];
  }
  if (!(den > 0.0)) {
    throw Error(ErrorCode::kEmptySet, "cannot defuzzify an empty fuzzy set");
  }
  return num / den;
}

namespace {

using nlohmann::json;

LinguisticScale scale_from_json(const json& doc, double lo, double hi,
                                const std::string& where) {
  LinguisticScale s;
  s.lo = lo;
  s.hi = hi;
  for (const auto& t : doc.at("terms")) {
    Term term;
    term.label = t.at("label").get<std::string>();
    for (const auto& pt : t.at("points")) {
      if (!pt.is_array() || pt.size() != 2) {
        throw Error(ErrorCode::kMalformed, where + ": points are [x, mu] pairs");
      }
      term.mf.points.emplace_back(pt[0].get<double>(), pt[1].get<double>());
    }
    s.terms.push_back(std::move(term));
  }
  return s;
}

json scale_to_json(const LinguisticScale& s) {
  json terms = json::array();
  for (const auto& t : s.terms) {
    json pts = json::array();
    for (const auto& [x, mu] : t.mf.points) pts.push_back({x, mu});
    terms.push_back({{"label", t.label}, {"points", pts}});
  }
  return {{"terms", terms}};
}

}  // namespace

RuleBase rule_base_from_json(const nlohmann::json& doc) {
  RuleBase rb;
  try {
    double lo = 1.0, hi = 10.0;
    if (doc.contains("universe")) {
      lo = doc.at("universe").at(0).get<double>();
      hi = doc.at("universe").at(1).get<double>();
    }
    const auto& in = doc.at("inputs");
    rb.inputs[0] = scale_from_json(in.at("p"), lo, hi, "inputs.p");
    rb.inputs[1] = scale_from_json(in.at("ai"), lo, hi, "inputs.ai");
    rb.inputs[2] = scale_from_json(in.at("d"), lo, hi, "inputs.d");
    rb.output = scale_from_json(doc.at("output"), lo, hi, "output");
    for (const auto& row : doc.at("rules")) {
      if (!row.is_array() || row.size() != 4) {
        throw Error(ErrorCode::kMalformed, "rules: rows are [p, ai, d, out]");
      }
      Rule r;
      for (int k = 0; k < 3; ++k) r.inputs[k] = row[k].get<std::size_t>();
      r.output = row[3].get<std::size_t>();
      rb.rules.push_back(r);
    }
    const std::string conj = doc.value("and", "product");
    if (conj == "min") rb.conjunction = Conjunction::kMin;
    else if (conj == "product") rb.conjunction = Conjunction::kProduct;
    else throw Error(ErrorCode::kMalformed, "rule base: 'and' is min or product");
    const std::string agg = doc.value("aggregation", "sum");
    if (agg == "max") rb.aggregation = Aggregation::kMax;
    else if (agg == "sum") rb.aggregation = Aggregation::kBoundedSum;
    else throw Error(ErrorCode::kMalformed, "rule base: 'aggregation' is max or sum");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformed, std::string("rule base JSON: ") + e.what());
  }
  rb.validate();
  return rb;
}

nlohmann::json rule_base_to_json(const RuleBase& rb) {
  json rules = json::array();
  for (const auto& r : rb.rules) {
    rules.push_back({r.inputs[0], r.inputs[1], r.inputs[2], r.output});
  }
  return {{"universe", {rb.output.lo, rb.output.hi}},
          {"inputs",
           {{"p", scale_to_json(rb.inputs[0])},
            {"ai", scale_to_json(rb.inputs[1])},
            {"d", scale_to_json(rb.inputs[2])}}},
          {"output", scale_to_json(rb.output)},
          {"rules", rules},
          {"and", rb.conjunction == Conjunction::kMin ? "min" : "product"},
          {"aggregation", rb.aggregation == Aggregation::kMax ? "max" : "sum"}};
}

}  // namespace chainrisk
