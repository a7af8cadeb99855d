#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "aepn/runner.hpp"
#include "helpers.hpp"

using namespace aepn;
using namespace aepn::testing;

TEST_CASE("random policy is uniform over action nodes") {
  const NetDef net = build_named("single");
  Episode ep(net, 0);
  const auto res = ep.reset();
  const int n = static_cast<int>(res.observation.action_nodes.size());
  REQUIRE(n == 4);
  Rng rng(123);
  const int draws = 40000;
  std::vector<int> counts(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < draws; ++i) {
    const auto d = random_policy(res.observation, rng);
    counts[static_cast<std::size_t>(d.index)] += 1;
    REQUIRE(d.probabilities.has_value());
    CHECK((*d.probabilities)[0] == doctest::Approx(1.0 / n));
  }
  // Chi-square against uniform; 3 dof, 0.999 quantile ~ 16.27.
  const double expected = static_cast<double>(draws) / n;
  double chi2 = 0.0;
  for (const int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  CHECK(chi2 < 16.27);
}

TEST_CASE("random policy without actions throws NoActions") {
  AssignmentGraph empty;
  Rng rng(0);
  try {
    random_policy(empty, rng);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == Err::NoActions);
  }
}

TEST_CASE("greedy picks the smallest time estimate with low-index ties") {
  const NetDef net = build_named("single");
  Episode ep(net, 0);
  const auto res = ep.reset();
  const auto d = greedy_spt_policy(net, res.observation);
  const Binding& b = res.observation.action_nodes[static_cast<std::size_t>(d.index)].binding;
  // The chosen assignment is matched (1 time unit).
  CHECK(b.tokens[0].tok.values[0] == b.tokens[1].tok.values[0]);
  // It is the first such pairing in action order.
  for (int i = 0; i < d.index; ++i) {
    const Binding& other = res.observation.action_nodes[static_cast<std::size_t>(i)].binding;
    CHECK(other.tokens[0].tok.values[0] != other.tokens[1].tok.values[0]);
  }
}

TEST_CASE("greedy realizes the optimum on the joint sequence problem") {
  const NetDef net = build_problem('a');
  const auto eval = evaluate_policy_serial(
      net, [&net](const AssignmentGraph& o, Rng&) { return greedy_spt_policy(net, o).index; }, 10,
      7);
  CHECK(eval.mean == 9.0);
  CHECK(eval.stddev == 0.0);
}

TEST_CASE("random baseline on the joint cycle problem sits in the documented band") {
  const NetDef net = build_problem('e');
  const auto eval = evaluate_policy_serial(
      net, [](const AssignmentGraph& o, Rng& rng) { return random_policy(o, rng).index; }, 10, 1);
  CHECK(eval.mean >= 0.5);
  CHECK(eval.mean <= 5.5);
}

TEST_CASE("memoized oracle equals naive tree search at micro scale") {
  for (char id = 'a'; id <= 'h'; ++id) {
    for (const double horizon : {2.0, 3.0, 4.0}) {
      const NetDef net = build_problem(id, horizon);
      const double naive = naive_oracle(net, 0);
      const OracleResult memo = exhaustive_oracle(net, 0);
      INFO("problem ", id, " horizon ", horizon);
      CHECK(memo.best_reward == naive);
    }
  }
}

TEST_CASE("oracle reproduces the known optima") {
  const double expected[] = {9, 9, 10, 10, 9, 9, 20, 20};
  for (char id = 'a'; id <= 'h'; ++id) {
    const OracleResult r = exhaustive_oracle(build_problem(id), 0);
    INFO("problem ", id);
    CHECK(r.best_reward == expected[id - 'a']);
  }
}

TEST_CASE("replaying the oracle's actions achieves its reported reward") {
  for (const char id : {'a', 'e', 'g'}) {
    const NetDef net = build_problem(id);
    const OracleResult r = exhaustive_oracle(net, 3);
    Episode ep(net, 3);
    auto res = ep.reset();
    double total = 0.0;
    for (const int a : r.actions) {
      res = ep.step(a);
      total += res.reward;
    }
    CHECK(res.done);
    CHECK(total == r.best_reward);
  }
}

TEST_CASE("oracle budget exhaustion raises BudgetExceeded") {
  OracleConfig cfg;
  cfg.node_budget = 3;
  try {
    exhaustive_oracle(build_problem('a'), 0, cfg);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == Err::BudgetExceeded);
  }
}

TEST_CASE("oracle trajectories never bind the third resource") {
  for (char id = 'a'; id <= 'h'; ++id) {
    const NetDef net = build_problem(id);
    const OracleResult r = exhaustive_oracle(net, 0);
    for (const auto& b : replay_action_bindings(net, 0, r.actions)) {
      const auto& tr = net.transitions[static_cast<std::size_t>(b.transition)];
      for (std::size_t i = 0; i < tr.inputs.size(); ++i) {
        if (tr.inputs[i].place.rfind("Resources", 0) != 0) continue;
        INFO("problem ", id, " transition ", tr.id);
        CHECK(b.tokens[i].tok.values[0] != 2.0);
      }
    }
  }
}

TEST_CASE("replay_action_bindings returns the fired bindings in order") {
  const NetDef net = build_problem('a');
  const OracleResult r = exhaustive_oracle(net, 0);
  const auto bindings = replay_action_bindings(net, 0, r.actions);
  CHECK(bindings.size() == r.actions.size());
  for (const auto& b : bindings)
    CHECK(net.transitions[static_cast<std::size_t>(b.transition)].tag == Tag::A);
}

TEST_CASE("raising the disjoint parallel arrival rate breaks the documented optimum") {
  // With two arrivals per instant the disjoint parallel problem exceeds the
  // reference optimum of 10, so that configuration belongs to the exclusive
  // problems only.
  ProblemSpec spec = problem_spec('d');
  spec.arrivals_per_instant = 2;
  const OracleResult r = exhaustive_oracle(build_problem(spec), 0);
  CHECK(r.best_reward > 10.0);
  CHECK(exhaustive_oracle(build_problem('d'), 0).best_reward == 10.0);
}

TEST_CASE("parallel evaluation matches the serial reference exactly") {
  const NetDef net = build_problem('c');
  const PolicyFn random_fn = [](const AssignmentGraph& o, Rng& rng) {
    return random_policy(o, rng).index;
  };
  const auto serial = evaluate_policy_serial(net, random_fn, 16, 11);
  const auto parallel = evaluate_policy(net, random_fn, 16, 11);
  CHECK(serial.per_episode == parallel.per_episode);
  CHECK(serial.mean == parallel.mean);
  CHECK(serial.stddev == parallel.stddev);
}

TEST_CASE("evaluation with zero episodes is rejected") {
  const NetDef net = build_problem('a');
  const PolicyFn fn = [](const AssignmentGraph&, Rng&) { return 0; };
  CHECK_THROWS_AS(evaluate_policy(net, fn, 0, 0), Error);
  CHECK_THROWS_AS(evaluate_policy_serial(net, fn, 0, 0), Error);
}
