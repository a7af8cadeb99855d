#include "aepn/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace aepn {

using nlohmann::json;

static json token_to_json(const Token& t) {
  return json{{"time", t.time}, {"values", t.values}};
}

json net_to_json(const NetDef& net) {
  json places = json::array();
  json observability = json::object();
  json initial = json::array();
  for (std::size_t i = 0; i < net.places.size(); ++i) {
    const Place& p = net.places[i];
    json attrs = json::array();
    for (const auto& a : p.schema.attrs)
      attrs.push_back({{"name", a.name}, {"kind", kind_name(a.kind)}, {"cardinality", a.cardinality}});
    places.push_back({{"id", p.id}, {"attributes", attrs}});
    observability[p.id] = {{"place", p.observable},
                           {"attributes", std::vector<bool>(p.attribute_observable.begin(),
                                                            p.attribute_observable.end())}};
    json toks = json::array();
    for (const auto& t : net.initial_tokens[i]) toks.push_back(token_to_json(t));
    initial.push_back({{"place", p.id}, {"tokens", toks}});
  }

  json transitions = json::array();
  json registry_refs = json::array();
  for (const auto& t : net.transitions) {
    json inputs = json::array();
    for (const auto& a : t.inputs) inputs.push_back({{"place", a.place}, {"var", a.var}});
    json outputs = json::array();
    for (const auto& a : t.outputs) outputs.push_back({{"place", a.place}, {"slot", a.slot}});
    transitions.push_back({{"id", t.id},
                           {"tag", tag_name(t.tag)},
                           {"inputs", inputs},
                           {"outputs", outputs},
                           {"guard", t.guard},
                           {"behavior", t.behavior},
                           {"reward", t.reward},
                           {"time_estimate", t.time_estimate},
                           {"type_index", t.type_index}});
    for (const std::string& r : {t.guard, t.behavior, t.reward, t.time_estimate})
      if (!r.empty()) registry_refs.push_back(r);
  }

  return json{{"version", 1},
              {"places", places},
              {"transitions", transitions},
              {"observability", observability},
              {"initial_tokens", initial},
              {"initial_tag", tag_name(net.initial_tag)},
              {"initial_reward", net.initial_reward},
              {"horizon", net.horizon},
              {"registry_refs", registry_refs}};
}

json expanded_to_json(const NetDef& net, const ExpandedNet& expanded) {
  json places = json::array();
  for (const auto& ep : expanded.places) {
    places.push_back({{"origin_place", net.places[static_cast<std::size_t>(ep.origin_place)].id},
                      {"token", token_to_json(ep.token.tok)},
                      {"seq", ep.token.seq}});
  }
  json transitions = json::array();
  for (const auto& et : expanded.transitions) {
    transitions.push_back(
        {{"origin_transition",
          net.transitions[static_cast<std::size_t>(et.origin_transition)].id},
         {"tag", tag_name(et.tag)},
         {"input_places", et.input_places}});
  }
  return json{{"version", 1}, {"places", places}, {"transitions", transitions},
              {"num_a", expanded.num_a}};
}

json graph_to_json(const GraphSchema& schema, const AssignmentGraph& g) {
  json nodes = json::array();
  for (const auto& n : g.nodes)
    nodes.push_back({{"type", schema.types[static_cast<std::size_t>(n.type)].name},
                     {"type_id", n.type},
                     {"features", n.features}});
  json edges = json::array();
  for (const auto& [a, b] : g.edges) edges.push_back({a, b});
  json actions = json::array();
  for (const auto& an : g.action_nodes) actions.push_back(an.node);
  return json{{"version", 1}, {"clock", g.clock}, {"nodes", nodes}, {"edges", edges},
              {"action_nodes", actions}};
}

static json mat_to_json(const nn::Mat& m) {
  return json{{"rows", m.rows}, {"cols", m.cols}, {"data", m.d}};
}

static nn::Mat mat_from_json(const json& j) {
  nn::Mat m(j.at("rows").get<int>(), j.at("cols").get<int>());
  m.d = j.at("data").get<std::vector<double>>();
  if (m.d.size() != static_cast<std::size_t>(m.rows) * static_cast<std::size_t>(m.cols))
    throw Error(Err::ModelSchemaMismatch, "weight matrix size disagrees with its shape");
  return m;
}

json model_to_json(const Model& model) {
  json types = json::array();
  for (const auto& t : model.sig.types) types.push_back({{"name", t.name}, {"width", t.width}});
  json params = json::array();
  for (const auto& p : model.params) params.push_back(mat_to_json(p));
  return json{{"version", 1},
              {"config", {{"hidden", model.cfg.hidden}, {"rounds", model.cfg.rounds}}},
              {"schema",
               {{"types", types},
                {"num_a_types", model.sig.num_a_types},
                {"num_e_types", model.sig.num_e_types}}},
              {"params", params}};
}

Model model_from_json(const json& j) {
  if (j.value("version", 0) != 1)
    throw Error(Err::ModelSchemaMismatch, "unsupported model file version");
  Model m;
  m.cfg.hidden = j.at("config").at("hidden").get<int>();
  m.cfg.rounds = j.at("config").at("rounds").get<int>();
  for (const auto& t : j.at("schema").at("types"))
    m.sig.types.push_back({t.at("name").get<std::string>(), t.at("width").get<int>()});
  m.sig.num_a_types = j.at("schema").at("num_a_types").get<int>();
  m.sig.num_e_types = j.at("schema").at("num_e_types").get<int>();
  for (const auto& p : j.at("params")) m.params.push_back(mat_from_json(p));
  if (static_cast<int>(m.params.size()) != m.num_params())
    throw Error(Err::ModelSchemaMismatch, "parameter count disagrees with config");
  return m;
}

void save_model(const std::string& path, const Model& model) {
  write_file_atomic(path, model_to_json(model).dump(2) + "\n");
}

Model load_model(const std::string& path) {
  return model_from_json(json::parse(read_file(path)));
}

RunReport make_report(std::string problem, std::string policy, std::uint64_t seed,
                      std::vector<double> per_episode, double wall_clock_seconds) {
  RunReport r;
  r.problem = std::move(problem);
  r.policy = std::move(policy);
  r.seed = seed;
  r.per_episode = std::move(per_episode);
  r.wall_clock_seconds = wall_clock_seconds;
  if (r.per_episode.empty()) throw Error(Err::EmptyEvaluation, "no episodes evaluated");
  const double n = static_cast<double>(r.per_episode.size());
  r.mean_reward = std::accumulate(r.per_episode.begin(), r.per_episode.end(), 0.0) / n;
  double var = 0.0;
  for (const double x : r.per_episode) var += (x - r.mean_reward) * (x - r.mean_reward);
  r.std_reward = std::sqrt(var / n);
  return r;
}

json report_to_json(const RunReport& r) {
  return json{{"problem", r.problem},
              {"policy", r.policy},
              {"episodes", r.per_episode.size()},
              {"seed", r.seed},
              {"per_episode", r.per_episode},
              {"mean_reward", r.mean_reward},
              {"std_reward", r.std_reward},
              {"wall_clock_seconds", r.wall_clock_seconds}};
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("short write: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("rename failed: " + tmp + " -> " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace aepn
