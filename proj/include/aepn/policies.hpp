#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "aepn/env.hpp"

namespace aepn {

struct PolicyDecision {
  int index = -1;
  std::optional<std::vector<double>> probabilities;
};

// Uniform choice over action nodes.
PolicyDecision random_policy(const AssignmentGraph& obs, Rng& rng);

// Shortest-processing-time heuristic: picks the action whose binding
// minimizes the transition's registered time estimate; ties break toward the
// lowest action index. Transitions without an estimate count as 0.
PolicyDecision greedy_spt_policy(const NetDef& net, const AssignmentGraph& obs);

struct OracleConfig {
  std::uint64_t node_budget = 10'000'000;
};

struct OracleResult {
  double best_reward = 0.0;
  std::vector<int> actions;  // one optimal action sequence
  std::uint64_t nodes_expanded = 0;
};

// Exact maximum cumulative reward over all action sequences of a
// deterministic net, by depth-first search memoized on the canonical
// marking. Throws BudgetExceeded when the instance is too large.
OracleResult exhaustive_oracle(const NetDef& net, std::uint64_t seed,
                               const OracleConfig& config = {});

// Replays an action sequence and returns the binding fired at each decision
// (used to inspect which tokens an optimal trajectory consumed).
std::vector<Binding> replay_action_bindings(const NetDef& net, std::uint64_t seed,
                                            const std::vector<int>& actions);

}  // namespace aepn
