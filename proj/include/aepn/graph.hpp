#pragma once

#include <string>
#include <utility>
#include <vector>

#include "aepn/petri.hpp"
#include "aepn/semantics.hpp"

namespace aepn {

// One place per token of the marking; back-reference to the origin place.
struct ExpandedPlace {
  int origin_place = -1;
  StoredToken token;
};

// One transition per enabled binding (of either tag).
struct ExpandedTransition {
  int origin_transition = -1;
  Tag tag = Tag::E;
  Binding binding;
  std::vector<int> input_places;  // indices into ExpandedNet::places, per input arc
};

struct ExpandedNet {
  std::vector<ExpandedPlace> places;
  std::vector<ExpandedTransition> transitions;  // all A expansions first, then E
  int num_a = 0;
};

// Node-type universe of a net's assignment graphs. Type 0 is A_Transition,
// type 1 is E_Transition; the rest are keyed by the observable-attribute
// schema of observable places, so places with identical observable schemas
// share a type.
struct NodeTypeInfo {
  std::string name;
  int width = 0;  // feature vector length
};

struct GraphSchema {
  std::vector<NodeTypeInfo> types;
  std::vector<int> place_type;  // per net place: type id, or -1 if unobservable
  int num_a_types = 0;
  int num_e_types = 0;
  static constexpr int kATransition = 0;
  static constexpr int kETransition = 1;
};

GraphSchema graph_schema(const NetDef& net);

struct GraphNode {
  int type = -1;
  std::vector<double> features;
};

struct ActionNode {
  int node = -1;  // index into AssignmentGraph::nodes
  Binding binding;
};

struct AssignmentGraph {
  std::vector<GraphNode> nodes;
  std::vector<std::pair<int, int>> edges;  // directed: place node -> transition node
  std::vector<ActionNode> action_nodes;    // same order as enabled A-bindings
  double clock = 0.0;
};

ExpandedNet expand(const NetDef& net, const Marking& m);

AssignmentGraph map_to_graph(const NetDef& net, const GraphSchema& schema,
                             const ExpandedNet& expanded);

const Binding& action_index_to_binding(const AssignmentGraph& g, int index);

// DOT renderings for the CLI export command.
std::string net_to_dot(const NetDef& net);
std::string expanded_to_dot(const NetDef& net, const ExpandedNet& expanded);
std::string graph_to_dot(const GraphSchema& schema, const AssignmentGraph& g);

// Number of weakly connected components (test and doc utility).
int weak_components(const AssignmentGraph& g);

}  // namespace aepn
