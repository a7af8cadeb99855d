#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aepn/petri.hpp"

namespace aepn {

// A transition plus one chosen token per input arc (in arc order).
struct Binding {
  int transition = -1;
  std::vector<StoredToken> tokens;
};

struct StepOutcome {
  double reward_delta = 0.0;
  int transition = -1;
  std::vector<std::pair<int, Token>> produced;  // (place index, token)
};

enum class AdvanceStatus { DecisionPoint, Terminal };

using TraceSink = std::function<void(const std::string&)>;

// All bindings of tag-matching transitions whose token tuple is available
// (token time <= clock, distinct tokens, guard true). Ordering: transition
// declaration index, then lexicographic over the chosen token sort keys.
std::vector<Binding> enabled_bindings(const NetDef& net, const Marking& m, Tag tag);

// Fires one binding in place. Clock and tag are untouched; tokens are
// consumed, behavior outputs added, cumulative reward increased.
StepOutcome fire(const NetDef& net, Marking& m, const Binding& b, Rng& rng);

// Runs the tag-alternation engine: exhausts E-bindings, toggles tags, and
// advances the clock to the next enabling token time (capped at horizon)
// until an A-decision point or a terminal state is reached.
AdvanceStatus advance(const NetDef& net, Marking& m, Rng& rng, const TraceSink* sink = nullptr);

bool is_terminal(const NetDef& net, const Marking& m);

// Smallest token time > clock at which some binding of either tag becomes
// enabled; nullopt if none exists.
std::optional<double> next_enabling_time(const NetDef& net, const Marking& m);

// One trace line: clock;tag;transition_id;binding_tokens;reward_delta
std::string format_trace_line(const NetDef& net, double clock, Tag tag, const Binding& b,
                              double reward_delta);

}  // namespace aepn
