#include "aepn/graph.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

namespace aepn {

namespace {

// Signature of a place's observable attributes; places sharing it share a
// node type.
std::string observable_signature(const Place& p) {
  std::string s = "place(";
  bool first = true;
  for (std::size_t i = 0; i < p.schema.attrs.size(); ++i) {
    if (!p.attribute_observable[i]) continue;
    const auto& a = p.schema.attrs[i];
    if (!first) s += ',';
    first = false;
    s += a.name;
    s += ':';
    s += kind_name(a.kind);
    if (a.kind == AttrKind::Categorical) s += std::to_string(a.cardinality);
  }
  s += ')';
  return s;
}

int attr_width(const AttrDef& a) {
  return a.kind == AttrKind::Categorical ? a.cardinality : 1;
}

}  // namespace

GraphSchema graph_schema(const NetDef& net) {
  GraphSchema s;
  s.num_a_types = net.num_transitions(Tag::A);
  s.num_e_types = net.num_transitions(Tag::E);
  s.types.push_back({"A_Transition", std::max(1, s.num_a_types)});
  s.types.push_back({"E_Transition", std::max(1, s.num_e_types)});
  std::map<std::string, int> by_sig;
  s.place_type.assign(net.places.size(), -1);
  for (std::size_t i = 0; i < net.places.size(); ++i) {
    const Place& p = net.places[i];
    if (!p.observable) continue;
    const std::string sig = observable_signature(p);
    auto it = by_sig.find(sig);
    if (it == by_sig.end()) {
      int width = 1;  // token time
      for (std::size_t k = 0; k < p.schema.attrs.size(); ++k)
        if (p.attribute_observable[k]) width += attr_width(p.schema.attrs[k]);
      it = by_sig.emplace(sig, static_cast<int>(s.types.size())).first;
      s.types.push_back({sig, width});
    }
    s.place_type[i] = it->second;
  }
  return s;
}

ExpandedNet expand(const NetDef& net, const Marking& m) {
  ExpandedNet out;
  // (place index, seq) -> expanded place index
  std::map<std::pair<int, std::uint64_t>, int> index;
  for (std::size_t pi = 0; pi < m.tokens.size(); ++pi) {
    for (const auto& st : m.tokens[pi]) {
      index[{static_cast<int>(pi), st.seq}] = static_cast<int>(out.places.size());
      out.places.push_back({static_cast<int>(pi), st});
    }
  }
  const auto add = [&](Tag tag) {
    for (auto& b : enabled_bindings(net, m, tag)) {
      ExpandedTransition et;
      et.origin_transition = b.transition;
      et.tag = tag;
      const auto& tr = net.transitions[static_cast<std::size_t>(b.transition)];
      et.input_places.reserve(b.tokens.size());
      for (std::size_t i = 0; i < b.tokens.size(); ++i)
        et.input_places.push_back(index.at({tr.inputs[i].place_index, b.tokens[i].seq}));
      et.binding = std::move(b);
      out.transitions.push_back(std::move(et));
    }
  };
  add(Tag::A);
  out.num_a = static_cast<int>(out.transitions.size());
  add(Tag::E);
  return out;
}

AssignmentGraph map_to_graph(const NetDef& net, const GraphSchema& schema,
                             const ExpandedNet& expanded) {
  AssignmentGraph g;
  const double scale = 1.0 / net.horizon;
  std::vector<int> place_node(expanded.places.size(), -1);
  for (std::size_t i = 0; i < expanded.places.size(); ++i) {
    const auto& ep = expanded.places[i];
    const int type = schema.place_type[static_cast<std::size_t>(ep.origin_place)];
    if (type < 0) continue;  // unobservable place: excluded entirely
    const Place& p = net.place(ep.origin_place);
    GraphNode node;
    node.type = type;
    node.features.reserve(static_cast<std::size_t>(schema.types[type].width));
    node.features.push_back(ep.token.tok.time * scale);
    for (std::size_t k = 0; k < p.schema.attrs.size(); ++k) {
      if (!p.attribute_observable[k]) continue;
      const auto& a = p.schema.attrs[k];
      const double v = ep.token.tok.values[k];
      if (a.kind == AttrKind::Categorical) {
        for (int c = 0; c < a.cardinality; ++c)
          node.features.push_back(c == static_cast<int>(v) ? 1.0 : 0.0);
      } else {
        node.features.push_back(v * scale);
      }
    }
    place_node[i] = static_cast<int>(g.nodes.size());
    g.nodes.push_back(std::move(node));
  }
  for (std::size_t ti = 0; ti < expanded.transitions.size(); ++ti) {
    const auto& et = expanded.transitions[ti];
    const auto& tr = net.transitions[static_cast<std::size_t>(et.origin_transition)];
    GraphNode node;
    const bool is_a = et.tag == Tag::A;
    node.type = is_a ? GraphSchema::kATransition : GraphSchema::kETransition;
    node.features.assign(static_cast<std::size_t>(schema.types[node.type].width), 0.0);
    node.features[static_cast<std::size_t>(tr.type_index)] = 1.0;
    const int node_index = static_cast<int>(g.nodes.size());
    g.nodes.push_back(std::move(node));
    for (const int epi : et.input_places) {
      const int pn = place_node[static_cast<std::size_t>(epi)];
      if (pn >= 0) g.edges.emplace_back(pn, node_index);
    }
    if (is_a) g.action_nodes.push_back({node_index, et.binding});
  }
  return g;
}

const Binding& action_index_to_binding(const AssignmentGraph& g, int index) {
  if (index < 0 || index >= static_cast<int>(g.action_nodes.size()))
    throw Error(Err::IndexOutOfRange, "action index " + std::to_string(index) + " of " +
                                          std::to_string(g.action_nodes.size()));
  return g.action_nodes[static_cast<std::size_t>(index)].binding;
}

std::string net_to_dot(const NetDef& net) {
  std::ostringstream os;
  os << "digraph net {\n  rankdir=LR;\n";
  for (const auto& p : net.places)
    os << "  \"p_" << p.id << "\" [shape=ellipse,label=\"" << p.id << (p.observable ? "" : " (hidden)")
       << "\"];\n";
  for (const auto& t : net.transitions) {
    os << "  \"t_" << t.id << "\" [shape=box,label=\"" << t.id << " : " << tag_name(t.tag)
       << "\"];\n";
    for (const auto& arc : t.inputs)
      os << "  \"p_" << arc.place << "\" -> \"t_" << t.id << "\" [label=\"" << arc.var << "\"];\n";
    for (const auto& arc : t.outputs)
      os << "  \"t_" << t.id << "\" -> \"p_" << arc.place << "\";\n";
  }
  os << "}\n";
  return os.str();
}

std::string expanded_to_dot(const NetDef& net, const ExpandedNet& expanded) {
  std::ostringstream os;
  os << "digraph expanded {\n  rankdir=LR;\n";
  char buf[64];
  for (std::size_t i = 0; i < expanded.places.size(); ++i) {
    const auto& ep = expanded.places[i];
    os << "  p" << i << " [shape=ellipse,label=\"" << net.place(ep.origin_place).id << "#" << i
       << "\\nt=";
    std::snprintf(buf, sizeof(buf), "%g", ep.token.tok.time);
    os << buf;
    for (const double v : ep.token.tok.values) {
      std::snprintf(buf, sizeof(buf), " %g", v);
      os << buf;
    }
    os << "\"];\n";
  }
  for (std::size_t i = 0; i < expanded.transitions.size(); ++i) {
    const auto& et = expanded.transitions[i];
    const auto& tr = net.transitions[static_cast<std::size_t>(et.origin_transition)];
    os << "  t" << i << " [shape=box,label=\"" << tr.id << "#" << i << " : " << tag_name(et.tag)
       << "\"];\n";
    for (const int epi : et.input_places) os << "  p" << epi << " -> t" << i << ";\n";
  }
  os << "}\n";
  return os.str();
}

std::string graph_to_dot(const GraphSchema& schema, const AssignmentGraph& g) {
  std::ostringstream os;
  os << "digraph observation {\n  rankdir=LR;\n";
  std::vector<bool> is_action(g.nodes.size(), false);
  for (const auto& an : g.action_nodes) is_action[static_cast<std::size_t>(an.node)] = true;
  char buf[64];
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const auto& n = g.nodes[i];
    os << "  n" << i << " [shape=" << (n.type <= GraphSchema::kETransition ? "box" : "ellipse");
    if (is_action[i]) os << ",peripheries=2";
    os << ",label=\"" << schema.types[static_cast<std::size_t>(n.type)].name << "|";
    for (std::size_t k = 0; k < n.features.size(); ++k) {
      std::snprintf(buf, sizeof(buf), k ? " %g" : "%g", n.features[k]);
      os << buf;
    }
    os << "\"];\n";
  }
  for (const auto& [a, b] : g.edges) os << "  n" << a << " -> n" << b << ";\n";
  os << "}\n";
  return os.str();
}

int weak_components(const AssignmentGraph& g) {
  const int n = static_cast<int>(g.nodes.size());
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  for (const auto& [a, b] : g.edges) parent[static_cast<std::size_t>(find(a))] = find(b);
  int components = 0;
  for (int i = 0; i < n; ++i)
    if (find(i) == i) ++components;
  return components;
}

}  // namespace aepn
