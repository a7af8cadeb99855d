#include "aepn/semantics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace aepn {

namespace {

// Candidate tokens for one input arc at the current clock.
std::vector<const StoredToken*> available_tokens(const Marking& m, int place, double clock) {
  std::vector<const StoredToken*> out;
  for (const auto& st : m.tokens[static_cast<std::size_t>(place)]) {
    if (st.tok.time <= clock) out.push_back(&st);
  }
  return out;
}

bool guard_holds(const NetDef& net, const TransitionSpec& tr, const std::vector<Token>& bound,
                 double clock) {
  if (tr.guard.empty()) return true;
  const auto& fn = net.registry->guards.at(tr.guard);
  try {
    return fn(bound, clock);
  } catch (const std::exception& e) {
    // A throwing guard counts as guard=false.
    std::fprintf(stderr, "warning: guard '%s' threw (%s); treated as false\n", tr.guard.c_str(),
                 e.what());
    return false;
  }
}

void enumerate_transition(const NetDef& net, const Marking& m, int ti,
                          std::vector<Binding>& out) {
  const TransitionSpec& tr = net.transitions[static_cast<std::size_t>(ti)];
  const std::size_t arity = tr.inputs.size();
  std::vector<std::vector<const StoredToken*>> cands(arity);
  for (std::size_t i = 0; i < arity; ++i) {
    cands[i] = available_tokens(m, tr.inputs[i].place_index, m.clock);
    if (cands[i].empty()) return;
  }
  std::vector<std::size_t> idx(arity, 0);
  std::vector<Token> bound(arity);
  while (true) {
    bool ok = true;
    // Arcs reading the same place must pick distinct tokens.
    for (std::size_t i = 0; ok && i < arity; ++i)
      for (std::size_t j = i + 1; ok && j < arity; ++j)
        if (tr.inputs[i].place_index == tr.inputs[j].place_index &&
            cands[i][idx[i]]->seq == cands[j][idx[j]]->seq)
          ok = false;
    if (ok) {
      for (std::size_t i = 0; i < arity; ++i) bound[i] = cands[i][idx[i]]->tok;
      if (guard_holds(net, tr, bound, m.clock)) {
        Binding b;
        b.transition = ti;
        b.tokens.reserve(arity);
        for (std::size_t i = 0; i < arity; ++i) b.tokens.push_back(*cands[i][idx[i]]);
        out.push_back(std::move(b));
      }
    }
    std::size_t k = arity;
    while (k > 0) {
      --k;
      if (++idx[k] < cands[k].size()) break;
      idx[k] = 0;
      if (k == 0) return;
    }
  }
}

}  // namespace

std::vector<Binding> enabled_bindings(const NetDef& net, const Marking& m, Tag tag) {
  std::vector<Binding> out;
  for (std::size_t ti = 0; ti < net.transitions.size(); ++ti) {
    if (net.transitions[ti].tag != tag) continue;
    enumerate_transition(net, m, static_cast<int>(ti), out);
  }
  return out;
}

StepOutcome fire(const NetDef& net, Marking& m, const Binding& b, Rng& rng) {
  const TransitionSpec& tr = net.transitions[static_cast<std::size_t>(b.transition)];
  if (b.tokens.size() != tr.inputs.size())
    throw Error(Err::StaleBinding, "binding arity does not match transition '" + tr.id + "'");
  for (std::size_t i = 0; i < tr.inputs.size(); ++i) {
    const StoredToken* st = m.find_token(tr.inputs[i].place_index, b.tokens[i].seq);
    if (!st || st->tok.time > m.clock)
      throw Error(Err::StaleBinding, "token for arc '" + tr.inputs[i].var + "' of transition '" +
                                         tr.id + "' is no longer available");
  }

  std::vector<Token> bound;
  bound.reserve(b.tokens.size());
  for (const auto& st : b.tokens) bound.push_back(st.tok);

  StepOutcome outcome;
  outcome.transition = b.transition;
  if (!tr.reward.empty())
    outcome.reward_delta = net.registry->rewards.at(tr.reward)(bound, m.clock);

  for (std::size_t i = 0; i < tr.inputs.size(); ++i)
    m.remove_token(tr.inputs[i].place_index, b.tokens[i].seq);

  const auto emitted = net.registry->behaviors.at(tr.behavior)(bound, m.clock, rng);
  for (const auto& e : emitted) {
    if (e.arc >= tr.outputs.size())
      throw Error(Err::InvalidBehaviorOutput,
                  "behavior '" + tr.behavior + "' addressed output arc " + std::to_string(e.arc));
    if (e.token.time < m.clock)
      throw Error(Err::InvalidBehaviorOutput,
                  "behavior '" + tr.behavior + "' produced a token in the past");
    const int place = tr.outputs[e.arc].place_index;
    check_token(net.places[static_cast<std::size_t>(place)].schema, e.token,
                "output of behavior '" + tr.behavior + "'");
    m.add_token(place, e.token);
    outcome.produced.emplace_back(place, e.token);
  }

  m.cumulative_reward += outcome.reward_delta;
  return outcome;
}

std::optional<double> next_enabling_time(const NetDef& net, const Marking& m) {
  std::set<double> candidates;
  for (const auto& v : m.tokens)
    for (const auto& st : v)
      if (st.tok.time > m.clock) candidates.insert(st.tok.time);
  Marking probe = m;
  for (const double t : candidates) {
    probe.clock = t;
    if (!enabled_bindings(net, probe, Tag::A).empty() ||
        !enabled_bindings(net, probe, Tag::E).empty())
      return t;
  }
  return std::nullopt;
}

AdvanceStatus advance(const NetDef& net, Marking& m, Rng& rng, const TraceSink* sink) {
  constexpr std::size_t kFiringCap = 1'000'000;
  std::size_t firings = 0;
  while (true) {
    if (m.tag == Tag::E) {
      while (true) {
        const auto bindings = enabled_bindings(net, m, Tag::E);
        if (bindings.empty()) break;
        const auto outcome = fire(net, m, bindings.front(), rng);
        if (sink)
          (*sink)(format_trace_line(net, m.clock, Tag::E, bindings.front(), outcome.reward_delta));
        if (++firings > kFiringCap)
          throw Error(Err::InvalidBehaviorOutput, "advance exceeded firing cap; zero-delay loop?");
      }
      m.tag = Tag::A;
    }
    // No agent decisions at or beyond the horizon; evolutions at exactly the
    // horizon (above) still count.
    if (m.clock >= net.horizon) return AdvanceStatus::Terminal;
    if (!enabled_bindings(net, m, Tag::A).empty()) return AdvanceStatus::DecisionPoint;
    if (!enabled_bindings(net, m, Tag::E).empty()) {
      m.tag = Tag::E;
      continue;
    }
    const auto t = next_enabling_time(net, m);
    if (!t || *t > net.horizon) {
      m.clock = net.horizon;
      return AdvanceStatus::Terminal;
    }
    m.clock = *t;
    m.tag = Tag::E;  // evolutions run first at each new clock instant
  }
}

bool is_terminal(const NetDef& net, const Marking& m) {
  if (m.clock >= net.horizon) return true;
  if (!enabled_bindings(net, m, Tag::A).empty() || !enabled_bindings(net, m, Tag::E).empty())
    return false;
  const auto t = next_enabling_time(net, m);
  return !t || *t > net.horizon;
}

std::string format_trace_line(const NetDef& net, double clock, Tag tag, const Binding& b,
                              double reward_delta) {
  char buf[64];
  std::string s;
  std::snprintf(buf, sizeof(buf), "%.17g", clock);
  s += buf;
  s += ';';
  s += tag_name(tag);
  s += ';';
  s += net.transitions[static_cast<std::size_t>(b.transition)].id;
  s += ';';
  for (std::size_t i = 0; i < b.tokens.size(); ++i) {
    if (i) s += '|';
    std::snprintf(buf, sizeof(buf), "%.17g", b.tokens[i].tok.time);
    s += buf;
    s += '[';
    for (std::size_t j = 0; j < b.tokens[i].tok.values.size(); ++j) {
      if (j) s += ' ';
      std::snprintf(buf, sizeof(buf), "%.17g", b.tokens[i].tok.values[j]);
      s += buf;
    }
    s += ']';
  }
  s += ';';
  std::snprintf(buf, sizeof(buf), "%.17g", reward_delta);
  s += buf;
  return s;
}

}  // namespace aepn
