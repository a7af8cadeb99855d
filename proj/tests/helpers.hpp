#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "aepn/learn.hpp"
#include "aepn/patterns.hpp"
#include "aepn/policies.hpp"
#include "aepn/semantics.hpp"

namespace aepn::testing {

// Minimal two-stage net used by the unit suites: one generator place, one
// queue, one A-assignment and one E-completion, all with simple schemas.
inline NetDef tiny_net(double horizon = 3.0) {
  NetDef net;
  net.horizon = horizon;
  auto reg = std::make_shared<Registry>();

  net.places.push_back({"Gen", {}, true, {}});
  net.initial_tokens.push_back({{0.0, {}}});
  net.places.push_back({"Queue", {}, true, {}});
  net.initial_tokens.push_back({});
  net.places.push_back({"Pool", {{{"rid", AttrKind::Categorical, 2}}}, true, {}});
  net.initial_tokens.push_back({{0.0, {0.0}}, {0.0, {1.0}}});
  net.places.push_back({"Busy", {{{"rid", AttrKind::Categorical, 2}}}, true, {}});
  net.initial_tokens.push_back({});
  net.places.push_back({"Out", {}, true, {}});
  net.initial_tokens.push_back({});

  reg->behaviors["gen"] = [](const std::vector<Token>& b, double clock, Rng&) {
    return std::vector<EmittedToken>{{0, {clock, {}}}, {1, {clock + 1.0, b[0].values}}};
  };
  net.transitions.push_back({"Arrive", Tag::E, {{"Gen", "g"}}, {{"Queue", "q"}, {"Gen", "g"}},
                             "", "gen", "", ""});

  reg->behaviors["take"] = [](const std::vector<Token>& b, double clock, Rng&) {
    return std::vector<EmittedToken>{{0, {clock + 1.0 + b[1].values[0], b[1].values}}};
  };
  reg->time_estimates["take_t"] = [](const std::vector<Token>& b, double) {
    return 1.0 + b[1].values[0];
  };
  net.transitions.push_back({"Take", Tag::A, {{"Queue", "q"}, {"Pool", "r"}}, {{"Busy", "b"}},
                             "", "take", "", "take_t"});

  reg->behaviors["done"] = [](const std::vector<Token>& b, double clock, Rng&) {
    return std::vector<EmittedToken>{{0, {clock, {}}}, {1, {clock, b[0].values}}};
  };
  reg->rewards["one"] = [](const std::vector<Token>&, double) { return 1.0; };
  net.transitions.push_back({"Done", Tag::E, {{"Busy", "b"}}, {{"Out", "o"}, {"Pool", "r"}},
                             "", "done", "one", ""});

  net.registry = std::move(reg);
  return build_net(std::move(net));
}

// Independent binding enumerator used as an oracle for enabled_bindings:
// straightforward recursion over arcs, checking availability, distinctness
// and the guard, without sharing any code with the engine.
inline void collect_bindings_rec(const NetDef& net, const Marking& m, int ti, std::size_t arc,
                                 std::vector<StoredToken>& picked, std::vector<Binding>& out) {
  const TransitionSpec& tr = net.transitions[static_cast<std::size_t>(ti)];
  if (arc == tr.inputs.size()) {
    std::vector<Token> bound;
    for (const auto& st : picked) bound.push_back(st.tok);
    bool ok = true;
    if (!tr.guard.empty()) ok = net.registry->guards.at(tr.guard)(bound, m.clock);
    if (ok) out.push_back({ti, picked});
    return;
  }
  for (const auto& st : m.tokens[static_cast<std::size_t>(tr.inputs[arc].place_index)]) {
    if (st.tok.time > m.clock) continue;
    bool dup = false;
    for (std::size_t i = 0; i < arc; ++i)
      if (tr.inputs[i].place_index == tr.inputs[arc].place_index && picked[i].seq == st.seq)
        dup = true;
    if (dup) continue;
    picked.push_back(st);
    collect_bindings_rec(net, m, ti, arc + 1, picked, out);
    picked.pop_back();
  }
}

inline std::vector<Binding> brute_force_bindings(const NetDef& net, const Marking& m, Tag tag) {
  std::vector<Binding> out;
  for (std::size_t ti = 0; ti < net.transitions.size(); ++ti) {
    if (net.transitions[ti].tag != tag) continue;
    std::vector<StoredToken> picked;
    collect_bindings_rec(net, m, static_cast<int>(ti), 0, picked, out);
  }
  return out;
}

// Naive exhaustive tree search (no memoization, no symmetry merging) — the
// reference the memoized oracle is checked against at micro scale.
inline double naive_best_reward(const NetDef& net, const Marking& m) {
  Rng rng(0);
  const auto bindings = brute_force_bindings(net, m, Tag::A);
  double best = 0.0;
  bool first = true;
  for (const auto& b : bindings) {
    Marking child = m;
    const double before = child.cumulative_reward;
    fire(net, child, b, rng);
    const bool terminal = advance(net, child, rng) == AdvanceStatus::Terminal;
    double v = child.cumulative_reward - before;
    if (!terminal) v += naive_best_reward(net, child);
    if (first || v > best) best = v;
    first = false;
  }
  return best;
}

inline double naive_oracle(const NetDef& net, std::uint64_t seed) {
  Rng rng(0);
  Marking m = initial_state(net, seed);
  const double initial = m.cumulative_reward;
  const bool terminal = advance(net, m, rng) == AdvanceStatus::Terminal;
  double v = m.cumulative_reward - initial;
  if (!terminal) v += naive_best_reward(net, m);
  return v;
}

// Scalar objective combining every model output (weighted log-policy plus a
// slice of the value head), rebuilt from scratch on each call so finite
// differences see a pure function of the parameters.
inline double model_objective(const Model& model, const AssignmentGraph& g,
                              const nn::Mat& logit_weights) {
  nn::Tape tape;
  std::vector<int> params;
  for (const auto& p : model.params) params.push_back(tape.input(p));
  const GraphForward fwd = forward_on_tape(tape, params, model, g);
  int loss = tape.scale(fwd.value, 0.5);
  if (fwd.logits >= 0) {
    const int lp = tape.log_softmax_col(fwd.logits);
    const int weighted = tape.mul(lp, tape.input(logit_weights));
    loss = tape.add(loss, tape.sum(weighted));
  }
  return tape.value(loss).at(0, 0);
}

// Analytic gradient of model_objective, flattened over all parameters.
inline std::vector<double> model_objective_grad(const Model& model, const AssignmentGraph& g,
                                                const nn::Mat& logit_weights) {
  nn::Tape tape;
  std::vector<int> params;
  for (const auto& p : model.params) params.push_back(tape.input(p));
  const GraphForward fwd = forward_on_tape(tape, params, model, g);
  int loss = tape.scale(fwd.value, 0.5);
  if (fwd.logits >= 0) {
    const int lp = tape.log_softmax_col(fwd.logits);
    const int weighted = tape.mul(lp, tape.input(logit_weights));
    loss = tape.add(loss, tape.sum(weighted));
  }
  tape.backward(loss);
  std::vector<double> out;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    const nn::Mat& gr = tape.grad(params[pi]);
    // Parameters unused by this graph keep an empty gradient: pad zeros.
    if (gr.size() == model.params[pi].size())
      out.insert(out.end(), gr.d.begin(), gr.d.end());
    else
      out.insert(out.end(), model.params[pi].size(), 0.0);
  }
  return out;
}

// Central-difference check of model_objective_grad; returns the max relative
// error over all parameter scalars. The objective is piecewise smooth (relu):
// where a perturbation straddles a kink the two one-sided slopes disagree and
// the central difference estimates no derivative at all, so such scalars are
// excluded rather than compared.
inline double max_grad_error(Model model, const AssignmentGraph& g, const nn::Mat& logit_weights,
                             double eps = 1e-5, double* compared_fraction = nullptr) {
  const std::vector<double> analytic = model_objective_grad(model, g, logit_weights);
  const double base = model_objective(model, g, logit_weights);
  double worst = 0.0;
  std::size_t flat = 0;
  std::size_t compared = 0;
  for (auto& p : model.params) {
    for (double& w : p.d) {
      const double saved = w;
      w = saved + eps;
      const double up = model_objective(model, g, logit_weights);
      w = saved - eps;
      const double down = model_objective(model, g, logit_weights);
      w = saved;
      const double slope_up = (up - base) / eps;
      const double slope_down = (base - down) / eps;
      const double kink =
          std::abs(slope_up - slope_down) / std::max({1.0, std::abs(slope_up), std::abs(slope_down)});
      if (kink > 1e-4) {
        ++flat;
        continue;  // non-differentiable point; finite differences are invalid
      }
      const double numeric = (up - down) / (2.0 * eps);
      const double denom = std::max({1.0, std::abs(numeric), std::abs(analytic[flat])});
      worst = std::max(worst, std::abs(numeric - analytic[flat]) / denom);
      ++flat;
      ++compared;
    }
  }
  if (compared_fraction)
    *compared_fraction = flat == 0 ? 1.0 : static_cast<double>(compared) / static_cast<double>(flat);
  return worst;
}

inline bool same_binding(const Binding& a, const Binding& b) {
  if (a.transition != b.transition || a.tokens.size() != b.tokens.size()) return false;
  for (std::size_t i = 0; i < a.tokens.size(); ++i)
    if (a.tokens[i].seq != b.tokens[i].seq) return false;
  return true;
}

}  // namespace aepn::testing
