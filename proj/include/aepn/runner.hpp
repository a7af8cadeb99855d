#pragma once

#include <functional>
#include <vector>

#include "aepn/env.hpp"

namespace aepn {

// Picks an action index for an observation. The Rng is the episode's policy
// substream; deterministic policies may ignore it.
using PolicyFn = std::function<int(const AssignmentGraph&, Rng&)>;

struct EvalResult {
  std::vector<double> per_episode;
  double mean = 0.0;
  double stddev = 0.0;
};

// Runs `episodes` independent episodes with seeds derived from `seed` and
// returns per-episode cumulative rewards. The parallel version distributes
// episodes over OpenMP threads (capped by the AEPN_THREADS environment
// variable) and produces results identical to the serial reference.
EvalResult evaluate_policy(const NetDef& net, const PolicyFn& policy, int episodes,
                           std::uint64_t seed);
EvalResult evaluate_policy_serial(const NetDef& net, const PolicyFn& policy, int episodes,
                                  std::uint64_t seed);

// Worker cap: min(hardware, AEPN_THREADS) with a floor of 1.
int worker_count();

// Cumulative reward of one full episode under the policy.
double run_episode(const NetDef& net, const PolicyFn& policy, std::uint64_t episode_seed);

}  // namespace aepn
