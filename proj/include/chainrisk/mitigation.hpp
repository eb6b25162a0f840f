#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace chainrisk {

/// Fault-tree node: a basic event (leaf) or an AND/OR gate. Basic events
/// are assumed independent.
struct FaultNode {
  enum class Kind { kBasic, kAnd, kOr };

  Kind kind = Kind::kBasic;
  std::string name;
  double probability = 0.0;  // basic events only
  std::vector<FaultNode> children;

  static FaultNode basic(std::string name, double p);
  static FaultNode gate(Kind kind, std::string name,
                        std::vector<FaultNode> children);
};

using FaultTree = FaultNode;

/// AND = product, OR = 1 - prod(1 - p). Throws kEmptyGate and kRange.
double evaluate_fault_tree(const FaultTree& tree);

struct Strategy {
  std::string name;
  double failure_probability = 0.0;
};

struct EventTree {
  double initiating_probability = 1.0;
  std::vector<Strategy> strategies;
};

struct EventPath {
  std::string signature;  // one 'S' or 'F' per strategy
  double probability = 0.0;
};

inline constexpr std::size_t kMaxStrategies = 20;

/// All 2^k outcomes in lexicographic order (S < F). Throws
/// kTooManyStrategies beyond kMaxStrategies.
std::vector<EventPath> evaluate_event_tree(const EventTree& tree);

struct RootCause {
  std::string event;
  double contribution = 0.0;
};

/// P(top) - P(top | event impossible) per basic event, descending, ties by
/// name.
std::vector<RootCause> rank_root_causes(const FaultTree& tree);

struct MitigationReport {
  double top_event_probability = 0.0;
  std::vector<RootCause> ranked_root_causes;
  std::vector<EventPath> path_table;
};

/// When `events` is given its initiating probability is taken as is;
/// a negative value means "use the fault-tree result".
MitigationReport analyze_mitigation(const FaultTree& tree,
                                    const EventTree& events);

/// {"fault_tree": node, "event_tree": {"initiating_probability": p?,
/// "strategies": [{"name":..,"failure":..},...]}} where node is
/// {"gate":"AND"|"OR","name":..,"children":[..]} or {"event":..,"p":q}
/// and q is a number or an [l,m,n,o] fuzzy probability (graded mean).
std::pair<FaultTree, EventTree> mitigation_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const MitigationReport& report);
std::string format_table(const MitigationReport& report);

}  // namespace chainrisk
