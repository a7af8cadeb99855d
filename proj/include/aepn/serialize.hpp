#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "aepn/graph.hpp"
#include "aepn/learn.hpp"

namespace aepn {

// Versioned structural export of a net (function bodies are registry names).
nlohmann::json net_to_json(const NetDef& net);
nlohmann::json expanded_to_json(const NetDef& net, const ExpandedNet& expanded);
nlohmann::json graph_to_json(const GraphSchema& schema, const AssignmentGraph& g);

nlohmann::json model_to_json(const Model& model);
Model model_from_json(const nlohmann::json& j);

void save_model(const std::string& path, const Model& model);
Model load_model(const std::string& path);

struct RunReport {
  std::string problem;
  std::string policy;
  std::uint64_t seed = 0;
  std::vector<double> per_episode;
  double mean_reward = 0.0;
  double std_reward = 0.0;
  double wall_clock_seconds = 0.0;
};

RunReport make_report(std::string problem, std::string policy, std::uint64_t seed,
                      std::vector<double> per_episode, double wall_clock_seconds);
nlohmann::json report_to_json(const RunReport& r);

// Writes via a sibling temp file followed by rename.
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace aepn
