// Compares the serial reference episode runner against the OpenMP-parallel
// one: identical per-episode rewards, throughput side by side.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>

#include "aepn/patterns.hpp"
#include "aepn/policies.hpp"
#include "aepn/runner.hpp"

using namespace aepn;

static double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

int main(int argc, char** argv) {
  int episodes = 2000;
  std::uint64_t seed = 42;
  if (argc > 1) episodes = std::atoi(argv[1]);
  if (argc > 2) seed = std::strtoull(argv[2], nullptr, 10);

  const PolicyFn random_fn = [](const AssignmentGraph& obs, Rng& rng) {
    return random_policy(obs, rng).index;
  };

  std::printf("%-8s %10s %12s %12s %8s %s\n", "problem", "episodes", "serial eps/s",
              "parallel eps/s", "speedup", "match");
  bool all_match = true;
  for (char id : {'a', 'd', 'g'}) {
    const NetDef net = build_problem(id);

    double t0 = now_seconds();
    const EvalResult serial = evaluate_policy_serial(net, random_fn, episodes, seed);
    const double serial_s = now_seconds() - t0;

    t0 = now_seconds();
    const EvalResult parallel = evaluate_policy(net, random_fn, episodes, seed);
    const double parallel_s = now_seconds() - t0;

    const bool match = serial.per_episode == parallel.per_episode;
    all_match = all_match && match;
    std::printf("%-8c %10d %12.0f %12.0f %8.2f %s\n", id, episodes,
                episodes / serial_s, episodes / parallel_s, serial_s / parallel_s,
                match ? "yes" : "NO");
  }
  if (!all_match) {
    std::fprintf(stderr, "parallel rollout diverged from the serial reference\n");
    return 1;
  }
  std::printf("workers: %d\n", worker_count());
  return 0;
}
