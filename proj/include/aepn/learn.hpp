#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "aepn/graph.hpp"
#include "aepn/tape.hpp"

namespace aepn {

struct EncoderConfig {
  int hidden = 32;
  int rounds = 2;
};

// Node-type universe a model was built for; persisted with the weights and
// checked at load/eval time.
struct SchemaSig {
  std::vector<NodeTypeInfo> types;
  int num_a_types = 0;
  int num_e_types = 0;
};

SchemaSig schema_sig(const GraphSchema& s);
bool sig_equal(const SchemaSig& a, const SchemaSig& b);

// Per-type linear embedders, message-passing rounds with separate weights
// for self / in-neighbors / out-neighbors, a policy head scoring each
// A_Transition node, and a mean-pooled value head.
struct Model {
  EncoderConfig cfg;
  SchemaSig sig;
  std::vector<nn::Mat> params;

  int num_types() const { return static_cast<int>(sig.types.size()); }
  int embed_w(int type) const { return 2 * type; }
  int embed_b(int type) const { return 2 * type + 1; }
  int round_base() const { return 2 * num_types(); }
  int round_w_self(int r) const { return round_base() + 4 * r; }
  int round_w_in(int r) const { return round_base() + 4 * r + 1; }
  int round_w_out(int r) const { return round_base() + 4 * r + 2; }
  int round_b(int r) const { return round_base() + 4 * r + 3; }
  int policy_w() const { return round_base() + 4 * cfg.rounds; }
  int policy_b() const { return policy_w() + 1; }
  int value_w() const { return policy_w() + 2; }
  int value_b() const { return policy_w() + 3; }
  int num_params() const { return policy_w() + 4; }
  std::size_t num_scalars() const;
};

Model init_model(const GraphSchema& schema, const EncoderConfig& cfg, std::uint64_t seed);

// Tape node ids of the policy logits (over action nodes) and the value
// scalar; logits is -1 when the graph has no action nodes.
struct GraphForward {
  int logits = -1;
  int value = -1;
};

GraphForward forward_on_tape(nn::Tape& tape, const std::vector<int>& param_nodes,
                             const Model& model, const AssignmentGraph& graph);

struct ForwardOut {
  std::vector<double> logits;  // one per action node
  double value = 0.0;
};

ForwardOut forward(const Model& model, const AssignmentGraph& graph);

// Samples from softmax(logits); returns (index, log-probability).
std::pair<int, double> sample_action(const std::vector<double>& logits, Rng& rng);
int greedy_action(const std::vector<double>& logits);  // argmax, lowest-index tie-break
std::vector<double> log_softmax(const std::vector<double>& logits);

struct PPOConfig {
  double clip_ratio = 0.2;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double learning_rate = 3e-4;
  int rollout_length = 2048;
  int update_epochs = 4;
  int minibatch_size = 256;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  double grad_norm_cap = 0.5;
  long total_steps = 200000;
};

struct Transition {
  AssignmentGraph obs;
  int action = 0;
  double log_prob = 0.0;
  double value = 0.0;
  double reward = 0.0;
  bool done = false;  // episode ended after this interaction
};

struct TrajectoryBuffer {
  std::vector<Transition> steps;
  std::vector<double> advantages;
  std::vector<double> returns;
};

void compute_gae(TrajectoryBuffer& buffer, double gamma, double lambda);

struct AdamState {
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long t = 0;
  std::vector<nn::Mat> m, v;
};

struct UpdateMetrics {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
};

// One PPO update over the buffer: normalized advantages, clipped surrogate,
// entropy bonus, value loss, gradient-norm cap. Throws NonFiniteLoss on
// divergence.
UpdateMetrics ppo_update(Model& model, AdamState& adam, const TrajectoryBuffer& buffer,
                         const PPOConfig& cfg, Rng& rng);

struct LogRow {
  long step = 0;
  double mean_reward = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
};

struct TrainResult {
  Model model;
  std::vector<LogRow> log;
  bool reached_target = false;
  long interactions = 0;
};

// Trains on one benchmark problem; stops early once the deterministic
// evaluation matches the known optimum with zero variance.
TrainResult train_problem(char problem, const PPOConfig& cfg, std::uint64_t seed);
TrainResult train_net(const NetDef& net, double target_reward, const PPOConfig& cfg,
                      std::uint64_t seed);

std::string training_log_csv(const std::vector<LogRow>& log);

}  // namespace aepn
