#pragma once

#include <optional>
#include <string>
#include <vector>

#include "btx/bt.hpp"
#include "btx/domain.hpp"
#include "btx/planner.hpp"

namespace btx {

struct Violation {
  std::string check;
  NodeId node = 0;
  std::string message;
};

struct VerificationReport {
  std::vector<std::string> checks;
  std::vector<Violation> violations;
  std::size_t states_explored = 0;
  bool exhaustive = false;  // every projected state was a start state

  bool passed() const { return violations.empty(); }
};

struct VerifyConfig {
  // Start states for the livelock check when exhaustive enumeration does
  // not apply. Defaults to the empty state.
  std::vector<WorldState> seeds;
  std::size_t max_objects_exhaustive = 4;
  std::size_t max_atoms_exhaustive = 16;
  std::size_t max_sim_ticks = 10000;
};

// Check names as they appear in reports.
inline constexpr const char* kCheckActions = "actions";
inline constexpr const char* kCheckGoals = "goals";
inline constexpr const char* kCheckPreconditions = "preconditions";
inline constexpr const char* kCheckFallbacks = "fallbacks";
inline constexpr const char* kCheckLivelock = "livelock";

// Runs every check; the goal check is skipped without goals. The livelock
// check ticks the tree with instantly succeeding actions over the atoms its
// conditions read. With few enough objects and atoms it starts from every
// assignment of those atoms, otherwise from config.seeds.
VerificationReport verify_tree(const BehaviorTree& tree, const Domain& domain,
                               const std::optional<GoalSpec>& goals, const VerifyConfig& config = {});

std::string report_text(const VerificationReport& report);
std::string report_json(const VerificationReport& report);

}  // namespace btx
