#include "aepn/policies.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

namespace aepn {

PolicyDecision random_policy(const AssignmentGraph& obs, Rng& rng) {
  const int n = static_cast<int>(obs.action_nodes.size());
  if (n == 0) throw Error(Err::NoActions, "random_policy on observation without actions");
  PolicyDecision d;
  d.index = rng.uniform_int(n);
  d.probabilities = std::vector<double>(static_cast<std::size_t>(n), 1.0 / n);
  return d;
}

PolicyDecision greedy_spt_policy(const NetDef& net, const AssignmentGraph& obs) {
  const int n = static_cast<int>(obs.action_nodes.size());
  if (n == 0) throw Error(Err::NoActions, "greedy_spt_policy on observation without actions");
  int best = 0;
  double best_time = 0.0;
  for (int i = 0; i < n; ++i) {
    const Binding& b = obs.action_nodes[static_cast<std::size_t>(i)].binding;
    const auto& tr = net.transitions[static_cast<std::size_t>(b.transition)];
    double t = 0.0;
    if (!tr.time_estimate.empty()) {
      std::vector<Token> bound;
      bound.reserve(b.tokens.size());
      for (const auto& st : b.tokens) bound.push_back(st.tok);
      t = net.registry->time_estimates.at(tr.time_estimate)(bound, obs.clock);
    }
    if (i == 0 || t < best_time) {
      best = i;
      best_time = t;
    }
  }
  return {best, std::nullopt};
}

namespace {

void append_bytes(std::string& s, double v) {
  s.append(reinterpret_cast<const char*>(&v), sizeof(v));
}

// Memoization key for the oracle: a canonical marking serialization that
// additionally merges states known to be behaviorally equivalent —
//   * token timestamps already in the past are clamped to the clock (an
//     enabled token's exact age never changes what can happen next), and
//   * values of attributes declared `exchangeable` are relabeled densely in
//     encounter order (they are opaque correlation tags).
// Both merges assume guards/behaviors/rewards do not read bound-token
// timestamps or exchangeable magnitudes; every shipped net satisfies this,
// and the micro-scale comparison against naive tree search exercises it.
std::string oracle_key(const NetDef& net, const Marking& m) {
  std::string s;
  s.reserve(16 + m.total_tokens() * 24);
  append_bytes(s, m.clock);
  s.push_back(m.tag == Tag::A ? 'A' : 'E');
  std::unordered_map<double, double> relabel;
  std::vector<std::pair<double, const std::vector<double>*>> order;
  for (std::size_t pi = 0; pi < m.tokens.size(); ++pi) {
    const auto& attrs = net.places[pi].schema.attrs;
    order.clear();
    for (const auto& st : m.tokens[pi])
      order.emplace_back(std::max(st.tok.time, m.clock), &st.tok.values);
    std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first < b.first;
      return *a.second < *b.second;
    });
    s.push_back('|');
    for (const auto& [eff_time, values] : order) {
      append_bytes(s, eff_time);
      for (std::size_t j = 0; j < values->size(); ++j) {
        double v = (*values)[j];
        if (attrs[j].exchangeable)
          v = relabel.try_emplace(v, static_cast<double>(relabel.size())).first->second;
        append_bytes(s, v);
      }
      s.push_back(';');
    }
  }
  return s;
}

struct OracleSearch {
  const NetDef& net;
  std::uint64_t budget;
  std::uint64_t nodes = 0;
  std::unordered_map<std::string, double> memo;
  Rng rng{0};  // oracle requires deterministic behaviors; stream is unused entropy

  // Optimal reward-to-go from a decision point.
  double value(const Marking& m, const std::string& key) {
    if (const auto it = memo.find(key); it != memo.end()) return it->second;
    if (++nodes > budget)
      throw Error(Err::BudgetExceeded, "oracle exceeded node budget of " + std::to_string(budget));
    const auto bindings = enabled_bindings(net, m, Tag::A);
    double best = 0.0;
    bool first = true;
    std::unordered_set<std::string> seen;  // symmetric bindings produce identical children
    for (const auto& b : bindings) {
      Marking child = m;
      const double before = child.cumulative_reward;
      fire(net, child, b, rng);
      const bool terminal = advance(net, child, rng) == AdvanceStatus::Terminal;
      const double delta = child.cumulative_reward - before;
      std::string child_key = oracle_key(net, child);
      std::string dedupe = child_key;
      dedupe.append(reinterpret_cast<const char*>(&delta), sizeof(delta));
      if (!seen.insert(std::move(dedupe)).second) continue;
      double v = delta;
      if (!terminal) v += value(child, child_key);
      if (first || v > best) best = v;
      first = false;
    }
    memo[key] = best;
    return best;
  }
};

}  // namespace

OracleResult exhaustive_oracle(const NetDef& net, std::uint64_t seed, const OracleConfig& config) {
  OracleSearch search{net, config.node_budget};
  Marking m = initial_state(net, seed);
  const double initial = m.cumulative_reward;
  bool terminal = advance(net, m, search.rng) == AdvanceStatus::Terminal;
  OracleResult result;
  result.best_reward = m.cumulative_reward - initial;
  if (!terminal) result.best_reward += search.value(m, oracle_key(net, m));

  // Walk one optimal trajectory by re-evaluating children against the memo.
  // Among equally optimal bindings, prefer the one with the smallest
  // registered time estimate so the returned schedule wastes no capacity.
  while (!terminal) {
    const auto bindings = enabled_bindings(net, m, Tag::A);
    const double target = search.memo.at(oracle_key(net, m));
    int chosen = -1;
    double chosen_estimate = 0.0;
    Marking chosen_state;
    bool chosen_terminal = false;
    for (std::size_t i = 0; i < bindings.size(); ++i) {
      Marking child = m;
      const double before = child.cumulative_reward;
      fire(net, child, bindings[i], search.rng);
      const bool t = advance(net, child, search.rng) == AdvanceStatus::Terminal;
      double v = child.cumulative_reward - before;
      if (!t) v += search.memo.at(oracle_key(net, child));
      if (v < target - 1e-9) continue;
      const auto& tr = net.transitions[static_cast<std::size_t>(bindings[i].transition)];
      double estimate = 0.0;
      if (!tr.time_estimate.empty()) {
        std::vector<Token> bound;
        for (const auto& st : bindings[i].tokens) bound.push_back(st.tok);
        estimate = net.registry->time_estimates.at(tr.time_estimate)(bound, m.clock);
      }
      if (chosen < 0 || estimate < chosen_estimate) {
        chosen = static_cast<int>(i);
        chosen_estimate = estimate;
        chosen_state = std::move(child);
        chosen_terminal = t;
      }
    }
    result.actions.push_back(chosen);
    m = std::move(chosen_state);
    terminal = chosen_terminal;
  }
  result.nodes_expanded = search.nodes;
  return result;
}

std::vector<Binding> replay_action_bindings(const NetDef& net, std::uint64_t seed,
                                            const std::vector<int>& actions) {
  Episode ep(net, seed);
  std::vector<Binding> fired;
  fired.reserve(actions.size());
  for (const int a : actions) {
    fired.push_back(action_index_to_binding(ep.observation(), a));
    ep.step(a);
  }
  return fired;
}

}  // namespace aepn
