#pragma once

#include <array>
#include <map>
#include <string>

#include "aepn/petri.hpp"

namespace aepn {

enum class Pattern { Sequence, Parallel, Cycle, Exclusive };
enum class Pooling { Joint, Disjoint };

const char* pattern_name(Pattern p);
const char* pooling_name(Pooling p);

// Configuration of one benchmark problem. All eight problems share the
// processing-time table: resource 1 -> (1, 2), resource 2 -> (2, 1),
// resource 3 -> (3, 3) over the two activity types.
struct ProblemSpec {
  char id = '?';
  Pattern pattern = Pattern::Sequence;
  Pooling pooling = Pooling::Joint;
  double interarrival = 1.0;
  int arrivals_per_instant = 1;
  double horizon = 10.0;
  std::array<std::array<double, 2>, 3> processing_time{{{1, 2}, {2, 1}, {3, 3}}};
  int resources_per_pool = 3;
  int cycle_repetitions = 2;
};

ProblemSpec problem_spec(char id);  // id in {a..h}

NetDef build_problem(char id, double horizon = 10.0);
NetDef build_problem(const ProblemSpec& spec);

struct Table2Row {
  double random_mean = 0.0;
  double random_std = 0.0;
  double ppo_mean = 0.0;
  double optimum = 0.0;
};

// Reference values per problem: (random mean, random std, PPO mean, optimum).
const std::map<char, Table2Row>& table2_reference();
const Table2Row& table2_row(char id);

// Demo nets used in docs and tests.
// Single-assignment demo: one A-transition; two case types, two resources;
// matched assignments take 1 time unit, mismatched take 2.
NetDef build_single_assignment_demo(double horizon = 10.0);
// Snapshots of the two-action examples: one waiting task per queue and a
// full pool of three resources (separate pools / one shared pool).
NetDef build_disjoint_demo();
NetDef build_joint_demo();

// Resolves CLI problem names: "a".."h", "single", "disjoint", "joint".
NetDef build_named(const std::string& name);

}  // namespace aepn
