#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>

#include "aepn/env.hpp"
#include "aepn/serialize.hpp"
#include "helpers.hpp"

using namespace aepn;
using namespace aepn::testing;

TEST_CASE("problem specs cover the four patterns and two poolings") {
  const std::map<char, std::pair<Pattern, Pooling>> expected{
      {'a', {Pattern::Sequence, Pooling::Joint}},   {'b', {Pattern::Sequence, Pooling::Disjoint}},
      {'c', {Pattern::Parallel, Pooling::Joint}},   {'d', {Pattern::Parallel, Pooling::Disjoint}},
      {'e', {Pattern::Cycle, Pooling::Joint}},      {'f', {Pattern::Cycle, Pooling::Disjoint}},
      {'g', {Pattern::Exclusive, Pooling::Joint}},  {'h', {Pattern::Exclusive, Pooling::Disjoint}}};
  for (const auto& [id, pp] : expected) {
    const ProblemSpec s = problem_spec(id);
    CHECK(s.pattern == pp.first);
    CHECK(s.pooling == pp.second);
    CHECK(s.horizon == 10.0);
    CHECK(s.interarrival == 1.0);
    CHECK(s.resources_per_pool == 3);
    CHECK(s.arrivals_per_instant == ((id == 'g' || id == 'h') ? 2 : 1));
    CHECK(s.processing_time[0][0] == 1.0);
    CHECK(s.processing_time[0][1] == 2.0);
    CHECK(s.processing_time[1][0] == 2.0);
    CHECK(s.processing_time[1][1] == 1.0);
    CHECK(s.processing_time[2][0] == 3.0);
    CHECK(s.processing_time[2][1] == 3.0);
  }
  CHECK_THROWS_AS(problem_spec('z'), Error);
}

TEST_CASE("reference table lookups") {
  CHECK(table2_row('e').optimum == 9.0);
  CHECK(table2_row('h').optimum == 20.0);
  CHECK(table2_row('a').random_mean == doctest::Approx(6.1));
  CHECK(table2_row('g').ppo_mean == 20.0);
  CHECK(table2_reference().size() == 8);
  try {
    table2_row('z');
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == Err::UnknownProblem);
  }
}

TEST_CASE("build_named resolves every problem and rejects the rest") {
  for (const char* name : {"a", "b", "c", "d", "e", "f", "g", "h", "single", "disjoint", "joint"})
    CHECK_NOTHROW(build_named(name));
  CHECK_THROWS_AS(build_named("z"), Error);
  CHECK_THROWS_AS(build_named(""), Error);
  CHECK_THROWS_AS(build_named("ab"), Error);
}

TEST_CASE("benchmark nets hide the arrival process") {
  for (char id = 'a'; id <= 'h'; ++id) {
    const NetDef net = build_problem(id);
    const auto& arrival = net.places[static_cast<std::size_t>(net.place_index("Arrival"))];
    CHECK(!arrival.observable);
  }
}

TEST_CASE("joint problems share one pool place, disjoint problems use two") {
  for (char id = 'a'; id <= 'h'; ++id) {
    const NetDef net = build_problem(id);
    const bool joint = (id - 'a') % 2 == 0;
    if (joint) {
      CHECK(net.place_index("Resources") >= 0);
      CHECK(net.place_index("Resources1") < 0);
    } else {
      CHECK(net.place_index("Resources1") >= 0);
      CHECK(net.place_index("Resources2") >= 0);
    }
  }
}

TEST_CASE("arrivals appear once per time unit per slot") {
  const NetDef net = build_problem('g');  // two arrivals per instant
  Episode ep(net, 0);
  const auto res = ep.reset();
  CHECK(!res.done);
  // At clock 0 two fresh cases are queued (one per slot), split by type.
  std::size_t queued = 0;
  queued += ep.marking().tokens[static_cast<std::size_t>(net.place_index("Queue1"))].size();
  queued += ep.marking().tokens[static_cast<std::size_t>(net.place_index("Queue2"))].size();
  CHECK(queued == 2);
}

TEST_CASE("cycle cases alternate types and carry the repetition counter") {
  const NetDef net = build_problem('e');
  Marking m = initial_state(net, 0);
  Rng rng(derive_seed(0, "env"));
  advance(net, m, rng);
  const auto& q1 = m.tokens[static_cast<std::size_t>(net.place_index("Queue1"))];
  const auto& q2 = m.tokens[static_cast<std::size_t>(net.place_index("Queue2"))];
  CHECK(q1.size() + q2.size() == 1);  // first arrival goes to queue 1
  REQUIRE(q1.size() == 1);
  CHECK(q1[0].tok.values[0] == 2.0);  // two repetitions pending
}

TEST_CASE("sequence: the second activity starts only after the first completes") {
  const NetDef net = build_problem('a');
  Episode ep(net, 13);
  std::vector<std::string> lines;
  ep.set_trace_sink([&lines](const std::string& l) { lines.push_back(l); });
  Rng rng(derive_seed(13, "drive"));
  auto res = ep.reset();
  while (!res.done)
    res = ep.step(rng.uniform_int(static_cast<int>(res.observation.action_nodes.size())));
  int complete1 = 0, start2 = 0;
  for (const auto& l : lines) {
    if (l.find(";Complete1;") != std::string::npos) ++complete1;
    if (l.find(";Start2;") != std::string::npos) {
      ++start2;
      CHECK(start2 <= complete1);  // prefix property along the trace
    }
  }
  CHECK(complete1 > 0);
}

TEST_CASE("parallel: cases complete only when both branches are done") {
  const NetDef net = build_problem('c');
  Episode ep(net, 13);
  Rng rng(derive_seed(13, "drive"));
  auto res = ep.reset();
  const std::size_t completed = static_cast<std::size_t>(net.place_index("Completed"));
  const std::size_t d1 = static_cast<std::size_t>(net.place_index("Done1"));
  const std::size_t d2 = static_cast<std::size_t>(net.place_index("Done2"));
  while (!res.done) {
    // The join is exhausted during evolution: no matching pair may linger.
    std::set<double> left, right;
    for (const auto& st : ep.marking().tokens[d1]) left.insert(st.tok.values[0]);
    for (const auto& st : ep.marking().tokens[d2]) right.insert(st.tok.values[0]);
    for (const double c : left) CHECK(!right.count(c));
    res = ep.step(rng.uniform_int(static_cast<int>(res.observation.action_nodes.size())));
  }
  CHECK(static_cast<double>(ep.marking().tokens[completed].size()) ==
        ep.marking().cumulative_reward);
}

TEST_CASE("rework loop: only the matching resource advances the counter") {
  const NetDef net = build_problem('e');
  const auto& complete = net.registry->behaviors.at("complete1");
  const auto& finish = net.registry->rewards.at("finish1");
  Rng rng(0);
  // Busy token layout: {remaining, resource_id}. Activity 1 matches resource 0.
  const std::vector<Token> mismatched{{3.0, {2.0, 1.0}}};
  auto out = complete(mismatched, 3.0, rng);
  CHECK(out[0].arc == 0);                  // back to the queue...
  CHECK(out[0].token.values[0] == 2.0);    // ...with the counter untouched
  CHECK(finish(mismatched, 3.0) == 0.0);
  const std::vector<Token> matched{{3.0, {2.0, 0.0}}};
  out = complete(matched, 3.0, rng);
  CHECK(out[0].arc == 0);
  CHECK(out[0].token.values[0] == 1.0);    // counter decremented
  CHECK(finish(matched, 3.0) == 0.0);
  const std::vector<Token> final_pass{{3.0, {1.0, 0.0}}};
  out = complete(final_pass, 3.0, rng);
  CHECK(out[0].arc == 1);                  // case completes
  CHECK(finish(final_pass, 3.0) == 1.0);
}

TEST_CASE("single-assignment demo structure") {
  const NetDef net = build_single_assignment_demo();
  CHECK(net.num_transitions(Tag::A) == 1);
  CHECK(net.num_transitions(Tag::E) == 2);
  CHECK(net.place_index("Waiting") >= 0);
  CHECK(net.horizon == 10.0);
}

TEST_CASE("demo nets expose exactly two action transitions") {
  for (const char* name : {"joint", "disjoint"}) {
    const NetDef net = build_named(name);
    CHECK(net.num_transitions(Tag::A) == 2);
  }
}

TEST_CASE("pattern and pooling names") {
  CHECK(std::string(pattern_name(Pattern::Sequence)) == "sequence");
  CHECK(std::string(pattern_name(Pattern::Exclusive)) == "exclusive");
  CHECK(std::string(pooling_name(Pooling::Joint)) == "joint");
  CHECK(std::string(pooling_name(Pooling::Disjoint)) == "disjoint");
}

TEST_CASE("net serialization exposes the structural pieces") {
  const auto j = net_to_json(build_problem('a'));
  CHECK(j.at("version") == 1);
  CHECK(j.at("horizon") == 10.0);
  CHECK(j.contains("places"));
  CHECK(j.contains("transitions"));
  CHECK(j.contains("initial_tokens"));
  CHECK(!j.at("observability").at("Arrival").at("place").get<bool>());
  CHECK(j.at("observability").at("Queue1").at("place").get<bool>());
}

TEST_CASE("benchmark horizons can be reduced for micro testing") {
  const NetDef net = build_problem('a', 2.0);
  CHECK(net.horizon == 2.0);
  const OracleResult r = exhaustive_oracle(net, 0);
  CHECK(r.best_reward >= 0.0);
  CHECK(r.best_reward <= 2.0);
}
