#pragma once

#include <cstdint>

#include "aepn/graph.hpp"

namespace aepn {

struct StepResult {
  AssignmentGraph observation;
  double reward = 0.0;  // delta since the previous decision
  bool done = false;
};

// Reset/step wrapper around net + semantics + mapping. One binding is fired
// per agent interaction; the post-action advance (including any E-transition
// rewards) is folded into the step's reward delta.
class Episode {
 public:
  Episode(const NetDef& net, std::uint64_t seed);

  StepResult reset();
  StepResult step(int action_index);

  const Marking& marking() const { return marking_; }
  const GraphSchema& schema() const { return schema_; }
  const AssignmentGraph& observation() const { return obs_; }
  bool done() const { return done_; }
  int steps() const { return steps_; }
  std::uint64_t seed() const { return seed_; }
  void set_trace_sink(TraceSink sink) { sink_ = std::move(sink); }

 private:
  StepResult make_result(double reward);

  const NetDef* net_;
  GraphSchema schema_;
  std::uint64_t seed_;
  Rng rng_;
  Marking marking_;
  AssignmentGraph obs_;
  double checkpoint_ = 0.0;
  int steps_ = 0;
  bool done_ = true;
  TraceSink sink_;
};

}  // namespace aepn
