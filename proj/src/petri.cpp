#include "aepn/petri.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>

namespace aepn {

const char* err_name(Err e) {
  switch (e) {
    case Err::DuplicateId: return "DuplicateId";
    case Err::UnknownPlaceInArc: return "UnknownPlaceInArc";
    case Err::SchemaMismatch: return "SchemaMismatch";
    case Err::UnknownRegistryRef: return "UnknownRegistryRef";
    case Err::MissingTransitions: return "MissingTransitions";
    case Err::UnknownPlace: return "UnknownPlace";
    case Err::FlagLengthMismatch: return "FlagLengthMismatch";
    case Err::StaleBinding: return "StaleBinding";
    case Err::InvalidBehaviorOutput: return "InvalidBehaviorOutput";
    case Err::IndexOutOfRange: return "IndexOutOfRange";
    case Err::EpisodeFinished: return "EpisodeFinished";
    case Err::NoActions: return "NoActions";
    case Err::BudgetExceeded: return "BudgetExceeded";
    case Err::UnknownProblem: return "UnknownProblem";
    case Err::UnknownPolicy: return "UnknownPolicy";
    case Err::UnknownStage: return "UnknownStage";
    case Err::EmptyEvaluation: return "EmptyEvaluation";
    case Err::ModelSchemaMismatch: return "ModelSchemaMismatch";
    case Err::NonFiniteLoss: return "NonFiniteLoss";
  }
  return "Error";
}

const char* tag_name(Tag t) { return t == Tag::A ? "A" : "E"; }

const char* kind_name(AttrKind k) {
  switch (k) {
    case AttrKind::Integer: return "integer";
    case AttrKind::Real: return "real";
    case AttrKind::Categorical: return "categorical";
  }
  return "?";
}

bool token_value_ok(const AttrDef& def, double v) {
  if (!std::isfinite(v)) return false;
  switch (def.kind) {
    case AttrKind::Real:
      return true;
    case AttrKind::Integer:
      return v == std::floor(v);
    case AttrKind::Categorical:
      return v == std::floor(v) && v >= 0.0 && v < static_cast<double>(def.cardinality);
  }
  return false;
}

void check_token(const AttributeSchema& schema, const Token& tok, const std::string& where) {
  if (static_cast<int>(tok.values.size()) != schema.size())
    throw Error(Err::SchemaMismatch,
                where + ": token has " + std::to_string(tok.values.size()) + " values, schema has " +
                    std::to_string(schema.size()));
  if (!(tok.time >= 0.0) || !std::isfinite(tok.time))
    throw Error(Err::SchemaMismatch, where + ": token time must be a nonnegative real");
  for (std::size_t i = 0; i < tok.values.size(); ++i) {
    if (!token_value_ok(schema.attrs[i], tok.values[i]))
      throw Error(Err::SchemaMismatch, where + ": value for attribute '" + schema.attrs[i].name +
                                           "' does not match kind " +
                                           kind_name(schema.attrs[i].kind));
  }
}

bool token_less(const StoredToken& a, const StoredToken& b) {
  if (a.tok.time != b.tok.time) return a.tok.time < b.tok.time;
  if (a.tok.values != b.tok.values)
    return std::lexicographical_compare(a.tok.values.begin(), a.tok.values.end(),
                                        b.tok.values.begin(), b.tok.values.end());
  return a.seq < b.seq;
}

int NetDef::place_index(std::string_view id) const {
  for (std::size_t i = 0; i < places.size(); ++i)
    if (places[i].id == id) return static_cast<int>(i);
  return -1;
}

int NetDef::num_transitions(Tag t) const {
  int n = 0;
  for (const auto& tr : transitions)
    if (tr.tag == t) ++n;
  return n;
}

static void validate_schema(const AttributeSchema& schema, const std::string& where) {
  std::set<std::string> names;
  for (const auto& a : schema.attrs) {
    if (!names.insert(a.name).second)
      throw Error(Err::DuplicateId, where + ": duplicate attribute '" + a.name + "'");
    if (a.kind == AttrKind::Categorical && a.cardinality < 1)
      throw Error(Err::SchemaMismatch,
                  where + ": categorical attribute '" + a.name + "' needs cardinality >= 1");
  }
}

NetDef build_net(NetDef net) {
  if (net.transitions.empty()) throw Error(Err::MissingTransitions, "net has no transitions");
  if (!(net.horizon > 0.0)) throw Error(Err::SchemaMismatch, "horizon must be positive");
  if (!net.registry) net.registry = std::make_shared<Registry>();

  std::set<std::string> place_ids;
  for (auto& p : net.places) {
    if (!place_ids.insert(p.id).second)
      throw Error(Err::DuplicateId, "place '" + p.id + "'");
    validate_schema(p.schema, "place '" + p.id + "'");
    if (p.attribute_observable.empty())
      p.attribute_observable.assign(static_cast<std::size_t>(p.schema.size()), true);
    if (static_cast<int>(p.attribute_observable.size()) != p.schema.size())
      throw Error(Err::FlagLengthMismatch,
                  "place '" + p.id + "': " + std::to_string(p.attribute_observable.size()) +
                      " flags for " + std::to_string(p.schema.size()) + " attributes");
  }

  std::set<std::string> transition_ids;
  int a_count = 0, e_count = 0;
  for (auto& tr : net.transitions) {
    if (!transition_ids.insert(tr.id).second)
      throw Error(Err::DuplicateId, "transition '" + tr.id + "'");
    tr.type_index = tr.tag == Tag::A ? a_count++ : e_count++;
    std::set<std::string> vars;
    for (auto& arc : tr.inputs) {
      arc.place_index = net.place_index(arc.place);
      if (arc.place_index < 0) throw Error(Err::UnknownPlaceInArc, "'" + arc.place + "'");
      if (!vars.insert(arc.var).second)
        throw Error(Err::DuplicateId,
                    "transition '" + tr.id + "': duplicate variable '" + arc.var + "'");
    }
    for (auto& arc : tr.outputs) {
      arc.place_index = net.place_index(arc.place);
      if (arc.place_index < 0) throw Error(Err::UnknownPlaceInArc, "'" + arc.place + "'");
    }
    if (!tr.guard.empty() && !net.registry->guards.count(tr.guard))
      throw Error(Err::UnknownRegistryRef, "guard '" + tr.guard + "'");
    if (!net.registry->behaviors.count(tr.behavior))
      throw Error(Err::UnknownRegistryRef, "behavior '" + tr.behavior + "'");
    if (!tr.reward.empty() && !net.registry->rewards.count(tr.reward))
      throw Error(Err::UnknownRegistryRef, "reward '" + tr.reward + "'");
    if (!tr.time_estimate.empty() && !net.registry->time_estimates.count(tr.time_estimate))
      throw Error(Err::UnknownRegistryRef, "time_estimate '" + tr.time_estimate + "'");
  }

  if (net.initial_tokens.empty()) net.initial_tokens.resize(net.places.size());
  if (net.initial_tokens.size() != net.places.size())
    throw Error(Err::SchemaMismatch, "initial_tokens must have one entry per place");
  for (std::size_t i = 0; i < net.places.size(); ++i)
    for (const auto& tok : net.initial_tokens[i])
      check_token(net.places[i].schema, tok, "initial token in place '" + net.places[i].id + "'");

  return net;
}

void Marking::add_token(int place, Token t) {
  StoredToken st{std::move(t), next_seq++};
  auto& v = tokens[static_cast<std::size_t>(place)];
  v.insert(std::upper_bound(v.begin(), v.end(), st, token_less), std::move(st));
}

bool Marking::remove_token(int place, std::uint64_t seq) {
  auto& v = tokens[static_cast<std::size_t>(place)];
  for (auto it = v.begin(); it != v.end(); ++it) {
    if (it->seq == seq) {
      v.erase(it);
      return true;
    }
  }
  return false;
}

const StoredToken* Marking::find_token(int place, std::uint64_t seq) const {
  for (const auto& st : tokens[static_cast<std::size_t>(place)])
    if (st.seq == seq) return &st;
  return nullptr;
}

std::size_t Marking::total_tokens() const {
  std::size_t n = 0;
  for (const auto& v : tokens) n += v.size();
  return n;
}

Marking initial_state(const NetDef& net, std::uint64_t /*seed*/) {
  Marking m;
  m.tokens.resize(net.places.size());
  m.clock = 0.0;
  m.tag = net.initial_tag;
  m.cumulative_reward = net.initial_reward;
  for (std::size_t i = 0; i < net.places.size(); ++i)
    for (const auto& tok : net.initial_tokens[i]) m.add_token(static_cast<int>(i), tok);
  return m;
}

NetDef set_observability(const NetDef& net, const std::string& place_id, bool observable,
                         const std::vector<bool>& attr_flags) {
  const int pi = net.place_index(place_id);
  if (pi < 0) throw Error(Err::UnknownPlace, "'" + place_id + "'");
  NetDef out = net;
  Place& p = out.places[static_cast<std::size_t>(pi)];
  if (static_cast<int>(attr_flags.size()) != p.schema.size())
    throw Error(Err::FlagLengthMismatch,
                "place '" + place_id + "': " + std::to_string(attr_flags.size()) + " flags for " +
                    std::to_string(p.schema.size()) + " attributes");
  p.observable = observable;
  p.attribute_observable = attr_flags;
  return out;
}

static void append_double(std::string& s, double v) {
  char buf[sizeof(double)];
  std::memcpy(buf, &v, sizeof(double));
  s.append(buf, sizeof(double));
}

std::string canonical_key(const Marking& m) {
  std::string s;
  s.reserve(16 + m.total_tokens() * 24);
  append_double(s, m.clock);
  s.push_back(m.tag == Tag::A ? 'A' : 'E');
  for (const auto& v : m.tokens) {
    s.push_back('|');
    for (const auto& st : v) {  // already sorted by (time, values, seq)
      append_double(s, st.tok.time);
      for (const double x : st.tok.values) append_double(s, x);
      s.push_back(';');
    }
  }
  return s;
}

}  // namespace aepn
