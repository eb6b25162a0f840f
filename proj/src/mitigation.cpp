#include "chainrisk/mitigation.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include "chainrisk/error.hpp"
#include "chainrisk/fuzzy.hpp"

namespace chainrisk {

FaultNode FaultNode::basic(std::string name, double p) {
  FaultNode n;
  n.kind = Kind::kBasic;
  n.name = std::move(name);
  n.probability = p;
  return n;
}

FaultNode FaultNode::gate(Kind kind, std::string name,
                          std::vector<FaultNode> children) {
  FaultNode n;
  n.kind = kind;
  n.name = std::move(name);
  n.children = std::move(children);
  return n;
}

namespace {

// `zeroed` names a basic event forced to probability 0.
double eval(const FaultNode& node, const std::string* zeroed) {
  if (node.kind == FaultNode::Kind::kBasic) {
    if (!(node.probability >= 0.0 && node.probability <= 1.0)) {
      throw Error(ErrorCode::kRange,
                  "basic event '" + node.name + "' probability outside [0,1]");
    }
    return zeroed && *zeroed == node.name ? 0.0 : node.probability;
  }
  if (node.children.empty()) {
    throw Error(ErrorCode::kEmptyGate, "gate '" + node.name + "' has no inputs");
  }
  double acc = 1.0;
  for (const auto& child : node.children) {
    const double p = eval(child, zeroed);
    acc *= node.kind == FaultNode::Kind::kAnd ? p : 1.0 - p;
  }
  return node.kind == FaultNode::Kind::kAnd ? acc : 1.0 - acc;
}

void collect_leaves(const FaultNode& node, std::vector<std::string>& out) {
  if (node.kind == FaultNode::Kind::kBasic) {
    out.push_back(node.name);
    return;
  }
  for (const auto& c : node.children) collect_leaves(c, out);
}

}  // namespace

double evaluate_fault_tree(const FaultTree& tree) { return eval(tree, nullptr); }

std::vector<EventPath> evaluate_event_tree(const EventTree& tree) {
  const std::size_t k = tree.strategies.size();
  if (k > kMaxStrategies) {
    throw Error(ErrorCode::kTooManyStrategies,
                std::to_string(k) + " strategies exceed the limit of " +
                    std::to_string(kMaxStrategies));
  }
  if (!(tree.initiating_probability >= 0.0 &&
        tree.initiating_probability <= 1.0)) {
    throw Error(ErrorCode::kRange, "initiating probability outside [0,1]");
  }
  for (const auto& s : tree.strategies) {
    if (!(s.failure_probability >= 0.0 && s.failure_probability <= 1.0)) {
      throw Error(ErrorCode::kRange,
                  "strategy '" + s.name + "' failure probability outside [0,1]");
    }
  }
  const std::size_t count = std::size_t{1} << k;
  std::vector<EventPath> out;
  out.reserve(count);
  for (std::size_t mask = 0; mask < count; ++mask) {
    EventPath path;
    path.signature.resize(k);
    double p = tree.initiating_probability;
    for (std::size_t i = 0; i < k; ++i) {
      // First strategy is the most significant position.
      const bool failed = (mask >> (k - 1 - i)) & 1U;
      const double f = tree.strategies[i].failure_probability;
      path.signature[i] = failed ? 'F' : 'S';
      p *= failed ? f : 1.0 - f;
    }
    path.probability = p;
    out.push_back(std::move(path));
  }
  return out;
}

std::vector<RootCause> rank_root_causes(const FaultTree& tree) {
  std::vector<std::string> leaves;
  collect_leaves(tree, leaves);
  std::set<std::string> unique(leaves.begin(), leaves.end());
  if (unique.size() != leaves.size()) {
    throw Error(ErrorCode::kInvalidInput, "basic event names must be unique");
  }
  const double top = evaluate_fault_tree(tree);
  std::vector<RootCause> out;
  for (const auto& name : leaves) {
    out.push_back({name, std::max(0.0, top - eval(tree, &name))});
  }
  std::sort(out.begin(), out.end(), [](const RootCause& a, const RootCause& b) {
    if (a.contribution != b.contribution) return a.contribution > b.contribution;
    return a.event < b.event;
  });
  return out;
}

MitigationReport analyze_mitigation(const FaultTree& tree,
                                    const EventTree& events) {
  MitigationReport report;
  report.top_event_probability = evaluate_fault_tree(tree);
  report.ranked_root_causes = rank_root_causes(tree);
  EventTree et = events;
  if (et.initiating_probability < 0.0) {
    et.initiating_probability = report.top_event_probability;
  }
  report.path_table = evaluate_event_tree(et);
  return report;
}

namespace {

using nlohmann::json;

double probability_from_json(const json& v, const std::string& where) {
  if (v.is_number()) return v.get<double>();
  if (v.is_array() && v.size() == 4) {
    TrapezoidalFuzzyNumber t{v[0].get<double>(), v[1].get<double>(),
                             v[2].get<double>(), v[3].get<double>()};
    if (!t.ordered()) {
      throw Error(ErrorCode::kRange, where + ": fuzzy corners must be ordered");
    }
    return graded_mean(t);
  }
  throw Error(ErrorCode::kMalformed, where + ": expected a number or [l,m,n,o]");
}

FaultNode node_from_json(const json& v, const std::string& where) {
  if (!v.is_object()) throw Error(ErrorCode::kMalformed, where + ": expected an object");
  if (v.contains("event")) {
    return FaultNode::basic(v.at("event").get<std::string>(),
                            probability_from_json(v.at("p"), where + ".p"));
  }
  const std::string g = v.at("gate").get<std::string>();
  FaultNode::Kind kind;
  if (g == "AND" || g == "and") kind = FaultNode::Kind::kAnd;
  else if (g == "OR" || g == "or") kind = FaultNode::Kind::kOr;
  else throw Error(ErrorCode::kMalformed, where + ": gate must be AND or OR");
  std::vector<FaultNode> children;
  const auto& kids = v.at("children");
  for (std::size_t i = 0; i < kids.size(); ++i) {
    children.push_back(
        node_from_json(kids[i], where + ".children[" + std::to_string(i) + "]"));
  }
  return FaultNode::gate(kind, v.value("name", g), std::move(children));
}

}  // namespace

std::pair<FaultTree, EventTree> mitigation_from_json(const nlohmann::json& doc) {
  try {
    FaultTree tree = node_from_json(doc.at("fault_tree"), "fault_tree");
    EventTree events;
    events.initiating_probability = -1.0;
    if (doc.contains("event_tree")) {
      const auto& et = doc.at("event_tree");
      if (et.contains("initiating_probability")) {
        events.initiating_probability = probability_from_json(
            et.at("initiating_probability"), "event_tree.initiating_probability");
      }
      for (const auto& s : et.at("strategies")) {
        events.strategies.push_back(
            {s.at("name").get<std::string>(),
             probability_from_json(s.at("failure"), "event_tree.strategies")});
      }
    }
    return {std::move(tree), std::move(events)};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformed, std::string("mitigation JSON: ") + e.what());
  }
}

nlohmann::json to_json(const MitigationReport& report) {
  json causes = json::array();
  for (const auto& c : report.ranked_root_causes) {
    causes.push_back({{"event", c.event}, {"contribution", c.contribution}});
  }
  json paths = json::array();
  for (const auto& p : report.path_table) {
    paths.push_back({{"signature", p.signature}, {"probability", p.probability}});
  }
  return {{"top_event_probability", report.top_event_probability},
          {"ranked_root_causes", causes},
          {"path_table", paths}};
}

std::string format_table(const MitigationReport& report) {
  std::ostringstream os;
  char buf[128];
  std::snprintf(buf, sizeof buf, "Top event probability: %.6f\n\n",
                report.top_event_probability);
  os << buf << "Root cause                      Contribution\n";
  for (const auto& c : report.ranked_root_causes) {
    std::snprintf(buf, sizeof buf, "%-30s  %.6f\n", c.event.c_str(),
                  c.contribution);
    os << buf;
  }
  os << "\nPath                  Probability\n";
  for (const auto& p : report.path_table) {
    std::snprintf(buf, sizeof buf, "%-20s  %.6f\n",
                  p.signature.empty() ? "-" : p.signature.c_str(), p.probability);
    os << buf;
  }
  return os.str();
}

}  // namespace chainrisk
