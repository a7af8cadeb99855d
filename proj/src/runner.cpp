#include "aepn/runner.hpp"

#include <cmath>
#include <cstdlib>
#include <numeric>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace aepn {

int worker_count() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("AEPN_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1 && cap < n) n = cap;
  }
  return n;
}

double run_episode(const NetDef& net, const PolicyFn& policy, std::uint64_t episode_seed) {
  Episode ep(net, episode_seed);
  Rng policy_rng(derive_seed(episode_seed, "policy"));
  StepResult res = ep.reset();
  double total = res.done ? res.reward : 0.0;
  while (!res.done) {
    res = ep.step(policy(res.observation, policy_rng));
    total += res.reward;
  }
  return total;
}

static EvalResult finish(std::vector<double> rewards) {
  EvalResult r;
  r.per_episode = std::move(rewards);
  if (r.per_episode.empty()) throw Error(Err::EmptyEvaluation, "episodes must be positive");
  const double n = static_cast<double>(r.per_episode.size());
  r.mean = std::accumulate(r.per_episode.begin(), r.per_episode.end(), 0.0) / n;
  double var = 0.0;
  for (const double x : r.per_episode) var += (x - r.mean) * (x - r.mean);
  r.stddev = std::sqrt(var / n);
  return r;
}

EvalResult evaluate_policy_serial(const NetDef& net, const PolicyFn& policy, int episodes,
                                  std::uint64_t seed) {
  if (episodes <= 0) throw Error(Err::EmptyEvaluation, "episodes must be positive");
  std::vector<double> rewards(static_cast<std::size_t>(episodes));
  for (int e = 0; e < episodes; ++e)
    rewards[static_cast<std::size_t>(e)] =
        run_episode(net, policy, derive_seed(seed, "episode", static_cast<std::uint64_t>(e)));
  return finish(std::move(rewards));
}

EvalResult evaluate_policy(const NetDef& net, const PolicyFn& policy, int episodes,
                           std::uint64_t seed) {
  if (episodes <= 0) throw Error(Err::EmptyEvaluation, "episodes must be positive");
  std::vector<double> rewards(static_cast<std::size_t>(episodes));
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(worker_count())
#endif
  for (int e = 0; e < episodes; ++e)
    rewards[static_cast<std::size_t>(e)] =
        run_episode(net, policy, derive_seed(seed, "episode", static_cast<std::uint64_t>(e)));
  return finish(std::move(rewards));
}

}  // namespace aepn
