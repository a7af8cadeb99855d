#include "aepn/patterns.hpp"

#include <cmath>

namespace aepn {

namespace {

constexpr int kNumResources = 3;

AttributeSchema resource_schema(int cardinality = kNumResources) {
  return {{{"resource_id", AttrKind::Categorical, cardinality}}};
}

std::vector<Token> pool_tokens(int n) {
  std::vector<Token> out;
  for (int r = 0; r < n; ++r) out.push_back({0.0, {static_cast<double>(r)}});
  return out;
}

std::vector<Token> generator_tokens(int arrivals_per_instant) {
  std::vector<Token> out;
  for (int s = 0; s < arrivals_per_instant; ++s) out.push_back({0.0, {static_cast<double>(s)}});
  return out;
}

Place arrival_place(int arrivals_per_instant) {
  Place p;
  p.id = "Arrival";
  p.schema = {{{"slot", AttrKind::Categorical, std::max(1, arrivals_per_instant)}}};
  p.observable = false;  // the arrival process is hidden from the agent
  return p;
}

// Pool place ids for the two activity types. Joint pooling shares one place.
std::pair<std::string, std::string> pool_ids(Pooling pooling) {
  if (pooling == Pooling::Joint) return {"Resources", "Resources"};
  return {"Resources1", "Resources2"};
}

void add_pools(NetDef& net, Pooling pooling, int per_pool) {
  const auto [p1, p2] = pool_ids(pooling);
  net.places.push_back({p1, resource_schema(), true, {}});
  net.initial_tokens.push_back(pool_tokens(per_pool));
  if (pooling == Pooling::Disjoint) {
    net.places.push_back({p2, resource_schema(), true, {}});
    net.initial_tokens.push_back(pool_tokens(per_pool));
  }
}

void add_place(NetDef& net, Place p, std::vector<Token> init = {}) {
  net.places.push_back(std::move(p));
  net.initial_tokens.push_back(std::move(init));
}

// Start transition for one activity type plus its registry entries.
void add_start(NetDef& net, Registry& reg, const ProblemSpec& spec, int activity,
               const std::string& queue, const std::string& pool, const std::string& busy,
               int case_attrs) {
  const auto pt = spec.processing_time;
  const std::string idx = std::to_string(activity + 1);
  reg.behaviors["start" + idx] = [pt, activity, case_attrs](const std::vector<Token>& bound,
                                                            double clock, Rng&) {
    const int r = static_cast<int>(bound[1].values[0]);
    Token busy_tok;
    busy_tok.time = clock + pt[static_cast<std::size_t>(r)][static_cast<std::size_t>(activity)];
    for (int k = 0; k < case_attrs; ++k) busy_tok.values.push_back(bound[0].values[static_cast<std::size_t>(k)]);
    busy_tok.values.push_back(static_cast<double>(r));
    return std::vector<EmittedToken>{{0, busy_tok}};
  };
  reg.time_estimates["pt" + idx] = [pt, activity](const std::vector<Token>& bound, double) {
    const int r = static_cast<int>(bound[1].values[0]);
    return pt[static_cast<std::size_t>(r)][static_cast<std::size_t>(activity)];
  };
  TransitionSpec start;
  start.id = "Start" + idx;
  start.tag = Tag::A;
  start.inputs = {{queue, "case"}, {pool, "resource"}};
  start.outputs = {{busy, "busy"}};
  start.behavior = "start" + idx;
  start.time_estimate = "pt" + idx;
  net.transitions.push_back(std::move(start));
}

NetDef finish(NetDef net, std::shared_ptr<Registry> reg) {
  net.registry = std::move(reg);
  net.initial_tag = Tag::E;
  net.initial_reward = 0.0;
  return build_net(std::move(net));
}

NetDef build_sequence(const ProblemSpec& spec) {
  NetDef net;
  net.horizon = spec.horizon;
  auto reg = std::make_shared<Registry>();
  const auto [pool1, pool2] = pool_ids(spec.pooling);
  const double ia = spec.interarrival;

  add_place(net, arrival_place(spec.arrivals_per_instant),
            generator_tokens(spec.arrivals_per_instant));
  add_place(net, {"Queue1", {}, true, {}});
  add_place(net, {"Queue2", {}, true, {}});
  add_pools(net, spec.pooling, spec.resources_per_pool);
  add_place(net, {"Busy1", resource_schema(), true, {}});
  add_place(net, {"Busy2", resource_schema(), true, {}});
  add_place(net, {"Completed", {}, true, {}});

  reg->behaviors["arrive"] = [ia](const std::vector<Token>& bound, double clock, Rng&) {
    return std::vector<EmittedToken>{{0, {clock, {}}}, {1, {clock + ia, bound[0].values}}};
  };
  net.transitions.push_back({"Arrive", Tag::E, {{"Arrival", "gen"}},
                             {{"Queue1", "case"}, {"Arrival", "next"}}, "", "arrive", "", ""});

  add_start(net, *reg, spec, 0, "Queue1", pool1, "Busy1", 0);
  reg->behaviors["complete1"] = [](const std::vector<Token>& bound, double clock, Rng&) {
    return std::vector<EmittedToken>{{0, {clock, {}}}, {1, {clock, bound[0].values}}};
  };
  net.transitions.push_back({"Complete1", Tag::E, {{"Busy1", "busy"}},
                             {{"Queue2", "case"}, {pool1, "resource"}}, "", "complete1", "", ""});

  add_start(net, *reg, spec, 1, "Queue2", pool2, "Busy2", 0);
  reg->behaviors["complete2"] = [](const std::vector<Token>& bound, double clock, Rng&) {
    return std::vector<EmittedToken>{{0, {clock, {}}}, {1, {clock, bound[0].values}}};
  };
  reg->rewards["unit"] = [](const std::vector<Token>&, double) { return 1.0; };
  net.transitions.push_back({"Complete2", Tag::E, {{"Busy2", "busy"}},
                             {{"Completed", "done"}, {pool2, "resource"}}, "", "complete2", "unit",
                             ""});
  return finish(std::move(net), reg);
}

NetDef build_parallel(const ProblemSpec& spec) {
  NetDef net;
  net.horizon = spec.horizon;
  auto reg = std::make_shared<Registry>();
  const auto [pool1, pool2] = pool_ids(spec.pooling);
  const double ia = spec.interarrival;
  const int arrivals = spec.arrivals_per_instant;

  // The case correlation id is bookkeeping for the parallel join and is not
  // exposed to the agent.
  AttributeSchema case_schema{{{"case_id", AttrKind::Integer, 0, true}}};
  AttributeSchema busy_schema{{{"case_id", AttrKind::Integer, 0, true},
                               {"resource_id", AttrKind::Categorical, kNumResources}}};
  const std::vector<bool> hide_case{false};
  const std::vector<bool> busy_flags{false, true};

  add_place(net, arrival_place(arrivals), generator_tokens(arrivals));
  add_place(net, {"Queue1", case_schema, true, hide_case});
  add_place(net, {"Queue2", case_schema, true, hide_case});
  add_pools(net, spec.pooling, spec.resources_per_pool);
  add_place(net, {"Busy1", busy_schema, true, busy_flags});
  add_place(net, {"Busy2", busy_schema, true, busy_flags});
  add_place(net, {"Done1", case_schema, true, hide_case});
  add_place(net, {"Done2", case_schema, true, hide_case});
  add_place(net, {"Completed", {}, true, {}});

  reg->behaviors["arrive"] = [ia, arrivals](const std::vector<Token>& bound, double clock, Rng&) {
    const double cid = clock * arrivals + bound[0].values[0];
    return std::vector<EmittedToken>{
        {0, {clock, {cid}}}, {1, {clock, {cid}}}, {2, {clock + ia, bound[0].values}}};
  };
  net.transitions.push_back({"Arrive", Tag::E, {{"Arrival", "gen"}},
                             {{"Queue1", "branch1"}, {"Queue2", "branch2"}, {"Arrival", "next"}},
                             "", "arrive", "", ""});

  add_start(net, *reg, spec, 0, "Queue1", pool1, "Busy1", 1);
  reg->behaviors["complete1"] = [](const std::vector<Token>& bound, double clock, Rng&) {
    return std::vector<EmittedToken>{{0, {clock, {bound[0].values[0]}}},
                                     {1, {clock, {bound[0].values[1]}}}};
  };
  net.transitions.push_back({"Complete1", Tag::E, {{"Busy1", "busy"}},
                             {{"Done1", "done"}, {pool1, "resource"}}, "", "complete1", "", ""});

  add_start(net, *reg, spec, 1, "Queue2", pool2, "Busy2", 1);
  reg->behaviors["complete2"] = [](const std::vector<Token>& bound, double clock, Rng&) {
    return std::vector<EmittedToken>{{0, {clock, {bound[0].values[0]}}},
                                     {1, {clock, {bound[0].values[1]}}}};
  };
  net.transitions.push_back({"Complete2", Tag::E, {{"Busy2", "busy"}},
                             {{"Done2", "done"}, {pool2, "resource"}}, "", "complete2", "", ""});

  reg->guards["same_case"] = [](const std::vector<Token>& bound, double) {
    return bound[0].values[0] == bound[1].values[0];
  };
  reg->behaviors["join"] = [](const std::vector<Token>&, double clock, Rng&) {
    return std::vector<EmittedToken>{{0, {clock, {}}}};
  };
  reg->rewards["unit"] = [](const std::vector<Token>&, double) { return 1.0; };
  net.transitions.push_back({"Join", Tag::E, {{"Done1", "left"}, {"Done2", "right"}},
                             {{"Completed", "done"}}, "same_case", "join", "unit", ""});
  return finish(std::move(net), reg);
}

// Cycle and exclusive-choice share their shape: typed cases are routed to
// one of two queues at arrival; cycle cases repeat their activity
// `cycle_repetitions` times, exclusive cases run it once.
NetDef build_routed(const ProblemSpec& spec) {
  const bool cyclic = spec.pattern == Pattern::Cycle;
  NetDef net;
  net.horizon = spec.horizon;
  auto reg = std::make_shared<Registry>();
  const auto [pool1, pool2] = pool_ids(spec.pooling);
  const double ia = spec.interarrival;
  const int arrivals = spec.arrivals_per_instant;
  const int reps = spec.cycle_repetitions;

  AttributeSchema case_schema;
  AttributeSchema busy_schema = resource_schema();
  if (cyclic) {
    case_schema.attrs.push_back({"remaining", AttrKind::Integer, 0});
    busy_schema.attrs.insert(busy_schema.attrs.begin(), {"remaining", AttrKind::Integer, 0});
  }

  add_place(net, arrival_place(arrivals), generator_tokens(arrivals));
  add_place(net, {"Queue1", case_schema, true, {}});
  add_place(net, {"Queue2", case_schema, true, {}});
  add_pools(net, spec.pooling, spec.resources_per_pool);
  add_place(net, {"Busy1", busy_schema, true, {}});
  add_place(net, {"Busy2", busy_schema, true, {}});
  add_place(net, {"Completed", {}, true, {}});

  reg->behaviors["arrive"] = [ia, arrivals, reps, cyclic](const std::vector<Token>& bound,
                                                          double clock, Rng&) {
    // Deterministic alternation: case type cycles over arrival slots and
    // instants.
    const long ordinal = std::lround(clock / ia) * arrivals + std::lround(bound[0].values[0]);
    const std::size_t queue_arc = static_cast<std::size_t>(ordinal % 2);
    Token c{clock, {}};
    if (cyclic) c.values.push_back(static_cast<double>(reps));
    return std::vector<EmittedToken>{{queue_arc, c}, {2, {clock + ia, bound[0].values}}};
  };
  net.transitions.push_back({"Arrive", Tag::E, {{"Arrival", "gen"}},
                             {{"Queue1", "type1"}, {"Queue2", "type2"}, {"Arrival", "next"}}, "",
                             "arrive", "", ""});

  for (int activity = 0; activity < 2; ++activity) {
    const std::string idx = std::to_string(activity + 1);
    const std::string queue = "Queue" + idx;
    const std::string busy = "Busy" + idx;
    const std::string pool = activity == 0 ? pool1 : pool2;
    add_start(net, *reg, spec, activity, queue, pool, busy, cyclic ? 1 : 0);
    if (cyclic) {
      // Rework loop: only the matching resource advances the repetition
      // counter; a mismatched execution sends the case back unchanged.
      reg->behaviors["complete" + idx] = [activity](const std::vector<Token>& bound, double clock,
                                                    Rng&) {
        const double remaining = bound[0].values[0];
        const bool matched = static_cast<int>(bound[0].values[1]) == activity;
        std::vector<EmittedToken> out;
        if (matched && remaining <= 1.0)
          out.push_back({1, {clock, {}}});
        else
          out.push_back({0, {clock, {matched ? remaining - 1.0 : remaining}}});
        out.push_back({2, {clock, {bound[0].values[1]}}});
        return out;
      };
      reg->rewards["finish" + idx] = [activity](const std::vector<Token>& bound, double) {
        const bool matched = static_cast<int>(bound[0].values[1]) == activity;
        return matched && bound[0].values[0] == 1.0 ? 1.0 : 0.0;
      };
      net.transitions.push_back({"Complete" + idx, Tag::E, {{busy, "busy"}},
                                 {{queue, "again"}, {"Completed", "done"}, {pool, "resource"}},
                                 "", "complete" + idx, "finish" + idx, ""});
    } else {
      reg->behaviors["complete" + idx] = [](const std::vector<Token>& bound, double clock, Rng&) {
        return std::vector<EmittedToken>{{0, {clock, {}}}, {1, {clock, {bound[0].values[0]}}}};
      };
      reg->rewards["unit"] = [](const std::vector<Token>&, double) { return 1.0; };
      net.transitions.push_back({"Complete" + idx, Tag::E, {{busy, "busy"}},
                                 {{"Completed", "done"}, {pool, "resource"}}, "", "complete" + idx,
                                 "unit", ""});
    }
  }
  return finish(std::move(net), reg);
}

}  // namespace

const char* pattern_name(Pattern p) {
  switch (p) {
    case Pattern::Sequence: return "sequence";
    case Pattern::Parallel: return "parallel";
    case Pattern::Cycle: return "cycle";
    case Pattern::Exclusive: return "exclusive";
  }
  return "?";
}

const char* pooling_name(Pooling p) { return p == Pooling::Joint ? "joint" : "disjoint"; }

ProblemSpec problem_spec(char id) {
  ProblemSpec s;
  s.id = id;
  switch (id) {
    case 'a': s.pattern = Pattern::Sequence; s.pooling = Pooling::Joint; break;
    case 'b': s.pattern = Pattern::Sequence; s.pooling = Pooling::Disjoint; break;
    case 'c': s.pattern = Pattern::Parallel; s.pooling = Pooling::Joint; break;
    case 'd': s.pattern = Pattern::Parallel; s.pooling = Pooling::Disjoint; break;
    case 'e': s.pattern = Pattern::Cycle; s.pooling = Pooling::Joint; break;
    case 'f': s.pattern = Pattern::Cycle; s.pooling = Pooling::Disjoint; break;
    case 'g': s.pattern = Pattern::Exclusive; s.pooling = Pooling::Joint; break;
    case 'h': s.pattern = Pattern::Exclusive; s.pooling = Pooling::Disjoint; break;
    default: throw Error(Err::UnknownProblem, std::string("'") + id + "'");
  }
  // Two arrivals per instant for the exclusive problems; one everywhere
  // else. The reference optima fix these rates (see the consistency test on
  // the disjoint parallel problem).
  s.arrivals_per_instant = (id == 'g' || id == 'h') ? 2 : 1;
  return s;
}

NetDef build_problem(const ProblemSpec& spec) {
  switch (spec.pattern) {
    case Pattern::Sequence: return build_sequence(spec);
    case Pattern::Parallel: return build_parallel(spec);
    case Pattern::Cycle:
    case Pattern::Exclusive: return build_routed(spec);
  }
  throw Error(Err::UnknownProblem, "bad pattern");
}

NetDef build_problem(char id, double horizon) {
  ProblemSpec spec = problem_spec(id);
  spec.horizon = horizon;
  return build_problem(spec);
}

const std::map<char, Table2Row>& table2_reference() {
  static const std::map<char, Table2Row> table{
      {'a', {6.1, 0.8, 9, 9}},  {'b', {7.5, 0.5, 9, 9}},   {'c', {6.8, 0.4, 10, 10}},
      {'d', {8.8, 0.4, 10, 10}}, {'e', {2.9, 1.4, 9, 9}},   {'f', {3.9, 0.4, 9, 9}},
      {'g', {15.1, 1.1, 20, 20}}, {'h', {17.8, 1.2, 20, 20}}};
  return table;
}

const Table2Row& table2_row(char id) {
  const auto& t = table2_reference();
  const auto it = t.find(id);
  if (it == t.end()) throw Error(Err::UnknownProblem, std::string("'") + id + "'");
  return it->second;
}

NetDef build_single_assignment_demo(double horizon) {
  NetDef net;
  net.horizon = horizon;
  auto reg = std::make_shared<Registry>();
  AttributeSchema case_schema{{{"task_type", AttrKind::Categorical, 2}}};
  AttributeSchema res_schema{{{"resource_id", AttrKind::Categorical, 2}}};

  add_place(net, {"Arrival", case_schema, true, {}}, {{0.0, {0.0}}, {0.0, {1.0}}});
  add_place(net, {"Waiting", case_schema, true, {}});
  add_place(net, {"Resources", res_schema, true, {}}, {{0.0, {0.0}}, {0.0, {1.0}}});
  add_place(net, {"Busy", res_schema, true, {}});
  add_place(net, {"Completed", {}, true, {}});

  reg->behaviors["arrive"] = [](const std::vector<Token>& bound, double clock, Rng&) {
    return std::vector<EmittedToken>{{0, {clock, bound[0].values}},
                                     {1, {clock + 1.0, bound[0].values}}};
  };
  net.transitions.push_back({"Arrive", Tag::E, {{"Arrival", "gen"}},
                             {{"Waiting", "case"}, {"Arrival", "next"}}, "", "arrive", "", ""});

  // Matched assignments take 1 time unit, mismatched 2.
  reg->behaviors["assign"] = [](const std::vector<Token>& bound, double clock, Rng&) {
    const double delay = bound[0].values[0] == bound[1].values[0] ? 1.0 : 2.0;
    return std::vector<EmittedToken>{{0, {clock + delay, bound[1].values}}};
  };
  reg->time_estimates["tf"] = [](const std::vector<Token>& bound, double) {
    return bound[0].values[0] == bound[1].values[0] ? 1.0 : 2.0;
  };
  net.transitions.push_back({"Start", Tag::A, {{"Waiting", "X"}, {"Resources", "Y"}},
                             {{"Busy", "busy"}}, "", "assign", "", "tf"});

  reg->behaviors["complete"] = [](const std::vector<Token>& bound, double clock, Rng&) {
    return std::vector<EmittedToken>{{0, {clock, {}}}, {1, {clock, bound[0].values}}};
  };
  reg->rewards["unit"] = [](const std::vector<Token>&, double) { return 1.0; };
  net.transitions.push_back({"Complete", Tag::E, {{"Busy", "busy"}},
                             {{"Completed", "done"}, {"Resources", "resource"}}, "", "complete",
                             "unit", ""});
  return finish(std::move(net), reg);
}

namespace {

NetDef build_two_action_demo(Pooling pooling) {
  NetDef net;
  net.horizon = 10.0;
  auto reg = std::make_shared<Registry>();
  const auto [pool1, pool2] = pool_ids(pooling);
  const std::array<std::array<double, 2>, 3> pt{{{1, 2}, {2, 1}, {3, 3}}};

  add_place(net, {"Wait1", {}, true, {}}, {{0.0, {}}});
  add_place(net, {"Wait2", {}, true, {}}, {{0.0, {}}});
  add_pools(net, pooling, kNumResources);
  add_place(net, {"Busy1", resource_schema(), true, {}});
  add_place(net, {"Busy2", resource_schema(), true, {}});
  add_place(net, {"Done", {}, true, {}});

  for (int activity = 0; activity < 2; ++activity) {
    const std::string idx = std::to_string(activity + 1);
    const std::string pool = activity == 0 ? pool1 : pool2;
    reg->behaviors["start" + idx] = [pt, activity](const std::vector<Token>& bound, double clock,
                                                   Rng&) {
      const int r = static_cast<int>(bound[1].values[0]);
      const double delay = pt[static_cast<std::size_t>(r)][static_cast<std::size_t>(activity)];
      return std::vector<EmittedToken>{{0, {clock + delay, bound[1].values}}};
    };
    reg->time_estimates["pt" + idx] = [pt, activity](const std::vector<Token>& bound, double) {
      const int r = static_cast<int>(bound[1].values[0]);
      return pt[static_cast<std::size_t>(r)][static_cast<std::size_t>(activity)];
    };
    net.transitions.push_back({"Start" + idx, Tag::A, {{"Wait" + idx, "case"}, {pool, "resource"}},
                               {{"Busy" + idx, "busy"}}, "", "start" + idx, "", "pt" + idx});
    reg->behaviors["complete" + idx] = [](const std::vector<Token>& bound, double clock, Rng&) {
      return std::vector<EmittedToken>{{0, {clock, {}}}, {1, {clock, bound[0].values}}};
    };
    reg->rewards["unit"] = [](const std::vector<Token>&, double) { return 1.0; };
    net.transitions.push_back({"Complete" + idx, Tag::E, {{"Busy" + idx, "busy"}},
                               {{"Done", "done"}, {pool, "resource"}}, "", "complete" + idx,
                               "unit", ""});
  }
  return finish(std::move(net), reg);
}

}  // namespace

NetDef build_disjoint_demo() { return build_two_action_demo(Pooling::Disjoint); }
NetDef build_joint_demo() { return build_two_action_demo(Pooling::Joint); }

NetDef build_named(const std::string& name) {
  if (name.size() == 1 && name[0] >= 'a' && name[0] <= 'h') return build_problem(name[0]);
  if (name == "single") return build_single_assignment_demo();
  if (name == "disjoint") return build_disjoint_demo();
  if (name == "joint") return build_joint_demo();
  throw Error(Err::UnknownProblem, "'" + name + "'");
}

}  // namespace aepn
