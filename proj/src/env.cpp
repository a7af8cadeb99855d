#include "aepn/env.hpp"

namespace aepn {

Episode::Episode(const NetDef& net, std::uint64_t seed)
    : net_(&net), schema_(graph_schema(net)), seed_(seed), rng_(derive_seed(seed, "env")) {
  reset();
}

StepResult Episode::make_result(double reward) {
  obs_ = map_to_graph(*net_, schema_, expand(*net_, marking_));
  obs_.clock = marking_.clock;
  return {obs_, reward, done_};
}

StepResult Episode::reset() {
  rng_ = Rng(derive_seed(seed_, "env"));
  marking_ = initial_state(*net_, seed_);
  // Checkpoint before the initial advance: rewards collected before the
  // first decision land in the first step's delta, keeping the sum of
  // deltas equal to the final cumulative reward.
  checkpoint_ = marking_.cumulative_reward;
  steps_ = 0;
  const TraceSink* sink = sink_ ? &sink_ : nullptr;
  done_ = advance(*net_, marking_, rng_, sink) == AdvanceStatus::Terminal;
  if (done_) checkpoint_ = marking_.cumulative_reward;
  return make_result(done_ ? marking_.cumulative_reward - net_->initial_reward : 0.0);
}

StepResult Episode::step(int action_index) {
  if (done_) throw Error(Err::EpisodeFinished, "step() after episode end");
  const Binding& binding = action_index_to_binding(obs_, action_index);
  const auto outcome = fire(*net_, marking_, binding, rng_);
  if (sink_)
    sink_(format_trace_line(*net_, marking_.clock, Tag::A, binding, outcome.reward_delta));
  ++steps_;
  const TraceSink* sink = sink_ ? &sink_ : nullptr;
  done_ = advance(*net_, marking_, rng_, sink) == AdvanceStatus::Terminal;
  const double reward = marking_.cumulative_reward - checkpoint_;
  checkpoint_ = marking_.cumulative_reward;
  return make_result(reward);
}

}  // namespace aepn
