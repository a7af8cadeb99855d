#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "aepn/error.hpp"
#include "aepn/rng.hpp"

namespace aepn {

enum class Tag { A, E };
const char* tag_name(Tag t);

enum class AttrKind { Integer, Real, Categorical };
const char* kind_name(AttrKind k);

struct AttrDef {
  std::string name;
  AttrKind kind = AttrKind::Real;
  int cardinality = 0;  // categorical only
  // Marks a pure correlation id: guards only compare it for equality and
  // behaviors only copy it. Search code may relabel such values canonically.
  bool exchangeable = false;
};

struct AttributeSchema {
  std::vector<AttrDef> attrs;
  int size() const { return static_cast<int>(attrs.size()); }
};

// A token is a timestamp plus one value per attribute of its place's schema.
// Integer and categorical values are stored as exact small doubles.
struct Token {
  double time = 0.0;
  std::vector<double> values;
};

bool token_value_ok(const AttrDef& def, double v);
void check_token(const AttributeSchema& schema, const Token& tok, const std::string& where);

// Token as held by a marking; seq is an insertion counter used only as a
// sort tie-break so that iteration order is a stable total order.
struct StoredToken {
  Token tok;
  std::uint64_t seq = 0;
};

bool token_less(const StoredToken& a, const StoredToken& b);

struct Place {
  std::string id;
  AttributeSchema schema;
  bool observable = true;
  std::vector<bool> attribute_observable;  // sized to schema at build time
};

struct InputArc {
  std::string place;
  std::string var;
  int place_index = -1;  // resolved by build_net
};

struct OutputArc {
  std::string place;
  std::string slot;
  int place_index = -1;
};

struct TransitionSpec {
  std::string id;
  Tag tag = Tag::E;
  std::vector<InputArc> inputs;
  std::vector<OutputArc> outputs;
  std::string guard;          // registry key, "" = always true
  std::string behavior;       // registry key, required
  std::string reward;         // registry key, "" = reward 0
  std::string time_estimate;  // registry key, "" = none; used by greedy policies
  int type_index = -1;        // index among transitions of the same tag
};

// One produced token, addressed to an output arc of the firing transition.
struct EmittedToken {
  std::size_t arc = 0;
  Token token;
};

using GuardFn = std::function<bool(const std::vector<Token>&, double)>;
using BehaviorFn = std::function<std::vector<EmittedToken>(const std::vector<Token>&, double, Rng&)>;
using RewardFn = std::function<double(const std::vector<Token>&, double)>;
using TimeFn = std::function<double(const std::vector<Token>&, double)>;

struct Registry {
  std::map<std::string, GuardFn> guards;
  std::map<std::string, BehaviorFn> behaviors;
  std::map<std::string, RewardFn> rewards;
  std::map<std::string, TimeFn> time_estimates;
};

struct NetDef {
  std::vector<Place> places;
  std::vector<TransitionSpec> transitions;
  std::vector<std::vector<Token>> initial_tokens;  // indexed like places
  Tag initial_tag = Tag::E;
  double initial_reward = 0.0;
  double horizon = 0.0;
  std::shared_ptr<const Registry> registry;

  int place_index(std::string_view id) const;
  const Place& place(int i) const { return places[static_cast<std::size_t>(i)]; }
  int num_transitions(Tag t) const;
};

// Validates and finalizes a net definition: resolves arc place indices,
// assigns per-tag type indices, normalizes observability flag vectors.
// Throws Error on any malformed input.
NetDef build_net(NetDef raw);

struct Marking {
  std::vector<std::vector<StoredToken>> tokens;  // per place, kept sorted
  double clock = 0.0;
  Tag tag = Tag::E;
  double cumulative_reward = 0.0;
  std::uint64_t next_seq = 0;

  void add_token(int place, Token t);
  bool remove_token(int place, std::uint64_t seq);
  const StoredToken* find_token(int place, std::uint64_t seq) const;
  std::size_t total_tokens() const;
};

Marking initial_state(const NetDef& net, std::uint64_t seed);

// Returns a copy of the net differing only in the observability of one place.
NetDef set_observability(const NetDef& net, const std::string& place_id, bool observable,
                         const std::vector<bool>& attr_flags);

// Canonical byte string of a marking: clock, tag and the token multiset per
// place. Ignores insertion counters and the cumulative reward.
std::string canonical_key(const Marking& m);

}  // namespace aepn
