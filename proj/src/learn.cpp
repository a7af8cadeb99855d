#include "aepn/learn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "aepn/env.hpp"
#include "aepn/patterns.hpp"

namespace aepn {

using nn::Mat;
using nn::Tape;

SchemaSig schema_sig(const GraphSchema& s) {
  return {s.types, s.num_a_types, s.num_e_types};
}

bool sig_equal(const SchemaSig& a, const SchemaSig& b) {
  if (a.num_a_types != b.num_a_types || a.num_e_types != b.num_e_types) return false;
  if (a.types.size() != b.types.size()) return false;
  for (std::size_t i = 0; i < a.types.size(); ++i)
    if (a.types[i].name != b.types[i].name || a.types[i].width != b.types[i].width) return false;
  return true;
}

std::size_t Model::num_scalars() const {
  std::size_t n = 0;
  for (const auto& p : params) n += p.size();
  return n;
}

static Mat init_weight(int rows, int cols, Rng& rng) {
  Mat w(rows, cols);
  const double s = std::sqrt(2.0 / (rows + cols));
  for (auto& x : w.d) x = s * rng.normal();
  return w;
}

Model init_model(const GraphSchema& schema, const EncoderConfig& cfg, std::uint64_t seed) {
  Model m;
  m.cfg = cfg;
  m.sig = schema_sig(schema);
  Rng rng(derive_seed(seed, "model-init"));
  const int h = cfg.hidden;
  for (const auto& t : schema.types) {
    m.params.push_back(init_weight(t.width, h, rng));
    m.params.emplace_back(1, h);
  }
  for (int r = 0; r < cfg.rounds; ++r) {
    m.params.push_back(init_weight(h, h, rng));
    m.params.push_back(init_weight(h, h, rng));
    m.params.push_back(init_weight(h, h, rng));
    m.params.emplace_back(1, h);
  }
  m.params.push_back(init_weight(h, 1, rng));
  m.params.emplace_back(1, 1);
  m.params.push_back(init_weight(h, 1, rng));
  m.params.emplace_back(1, 1);
  return m;
}

GraphForward forward_on_tape(Tape& tape, const std::vector<int>& params, const Model& model,
                             const AssignmentGraph& graph) {
  GraphForward out;
  const int n = static_cast<int>(graph.nodes.size());
  if (n == 0) {
    out.value = tape.input(Mat(1, 1));
    return out;
  }

  // Per-type embeddings scattered back into node order.
  std::vector<std::vector<int>> by_type(model.sig.types.size());
  for (int i = 0; i < n; ++i)
    by_type[static_cast<std::size_t>(graph.nodes[static_cast<std::size_t>(i)].type)].push_back(i);
  int hidden = -1;
  for (std::size_t t = 0; t < by_type.size(); ++t) {
    const auto& rows = by_type[t];
    if (rows.empty()) continue;
    const int width = model.sig.types[t].width;
    Mat x(static_cast<int>(rows.size()), width);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto& f = graph.nodes[static_cast<std::size_t>(rows[r])].features;
      for (int c = 0; c < width; ++c) x.at(static_cast<int>(r), c) = f[static_cast<std::size_t>(c)];
    }
    const int e = tape.relu(tape.add_rowvec(
        tape.matmul(tape.input(std::move(x)), params[static_cast<std::size_t>(model.embed_w(static_cast<int>(t)))]),
        params[static_cast<std::size_t>(model.embed_b(static_cast<int>(t)))]));
    const int scattered = tape.scatter_rows(e, rows, n);
    hidden = hidden < 0 ? scattered : tape.add(hidden, scattered);
  }

  std::vector<int> src, dst;
  src.reserve(graph.edges.size());
  dst.reserve(graph.edges.size());
  for (const auto& [a, b] : graph.edges) {
    src.push_back(a);
    dst.push_back(b);
  }
  for (int r = 0; r < model.cfg.rounds; ++r) {
    const int self = tape.matmul(hidden, params[static_cast<std::size_t>(model.round_w_self(r))]);
    int combined = self;
    if (!src.empty()) {
      const int m_in = tape.edge_mean(hidden, src, dst, n);
      const int m_out = tape.edge_mean(hidden, dst, src, n);
      combined = tape.add(
          combined, tape.matmul(m_in, params[static_cast<std::size_t>(model.round_w_in(r))]));
      combined = tape.add(
          combined, tape.matmul(m_out, params[static_cast<std::size_t>(model.round_w_out(r))]));
    }
    hidden = tape.relu(tape.add_rowvec(combined, params[static_cast<std::size_t>(model.round_b(r))]));
  }

  out.value = tape.add(
      tape.matmul(tape.mean_rows(hidden), params[static_cast<std::size_t>(model.value_w())]),
      params[static_cast<std::size_t>(model.value_b())]);

  if (!graph.action_nodes.empty()) {
    std::vector<int> action_rows;
    action_rows.reserve(graph.action_nodes.size());
    for (const auto& an : graph.action_nodes) action_rows.push_back(an.node);
    const int scores = tape.add_rowvec(
        tape.matmul(hidden, params[static_cast<std::size_t>(model.policy_w())]),
        params[static_cast<std::size_t>(model.policy_b())]);
    out.logits = tape.gather_rows(scores, std::move(action_rows));
  }
  return out;
}

ForwardOut forward(const Model& model, const AssignmentGraph& graph) {
  Tape tape;
  std::vector<int> params;
  params.reserve(model.params.size());
  for (const auto& p : model.params) params.push_back(tape.input(p));
  const auto fwd = forward_on_tape(tape, params, model, graph);
  ForwardOut out;
  out.value = tape.value(fwd.value).d[0];
  if (fwd.logits >= 0) out.logits = tape.value(fwd.logits).d;
  return out;
}

std::vector<double> log_softmax(const std::vector<double>& logits) {
  double mx = logits[0];
  for (const double v : logits) mx = std::max(mx, v);
  double z = 0.0;
  for (const double v : logits) z += std::exp(v - mx);
  const double lse = mx + std::log(z);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
  return out;
}

std::pair<int, double> sample_action(const std::vector<double>& logits, Rng& rng) {
  if (logits.empty()) throw Error(Err::NoActions, "sample_action on empty logits");
  const auto lp = log_softmax(logits);
  const double u = rng.uniform();
  double acc = 0.0;
  int chosen = static_cast<int>(logits.size()) - 1;
  for (std::size_t i = 0; i < lp.size(); ++i) {
    acc += std::exp(lp[i]);
    if (u < acc) {
      chosen = static_cast<int>(i);
      break;
    }
  }
  return {chosen, lp[static_cast<std::size_t>(chosen)]};
}

int greedy_action(const std::vector<double>& logits) {
  if (logits.empty()) throw Error(Err::NoActions, "greedy_action on empty logits");
  int best = 0;
  for (std::size_t i = 1; i < logits.size(); ++i)
    if (logits[i] > logits[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  return best;
}

void compute_gae(TrajectoryBuffer& buffer, double gamma, double lambda) {
  const std::size_t n = buffer.steps.size();
  buffer.advantages.assign(n, 0.0);
  buffer.returns.assign(n, 0.0);
  double adv = 0.0;
  double next_value = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    const Transition& s = buffer.steps[k];
    if (s.done) {
      next_value = 0.0;
      adv = 0.0;
    }
    const double delta = s.reward + gamma * next_value - s.value;
    adv = delta + gamma * lambda * adv;
    buffer.advantages[k] = adv;
    buffer.returns[k] = adv + s.value;
    next_value = s.value;
  }
}

namespace {

void adam_step(Model& model, AdamState& adam, const std::vector<Mat>& grads, double lr) {
  if (adam.m.empty()) {
    for (const auto& p : model.params) {
      adam.m.emplace_back(p.rows, p.cols);
      adam.v.emplace_back(p.rows, p.cols);
    }
  }
  adam.t += 1;
  const double c1 = 1.0 - std::pow(adam.beta1, static_cast<double>(adam.t));
  const double c2 = 1.0 - std::pow(adam.beta2, static_cast<double>(adam.t));
  for (std::size_t i = 0; i < model.params.size(); ++i) {
    auto& p = model.params[i];
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double g = grads[i].d[k];
      adam.m[i].d[k] = adam.beta1 * adam.m[i].d[k] + (1.0 - adam.beta1) * g;
      adam.v[i].d[k] = adam.beta2 * adam.v[i].d[k] + (1.0 - adam.beta2) * g * g;
      const double mhat = adam.m[i].d[k] / c1;
      const double vhat = adam.v[i].d[k] / c2;
      p.d[k] -= lr * mhat / (std::sqrt(vhat) + adam.eps);
    }
  }
}

}  // namespace

UpdateMetrics ppo_update(Model& model, AdamState& adam, const TrajectoryBuffer& buffer,
                         const PPOConfig& cfg, Rng& rng) {
  const std::size_t n = buffer.steps.size();
  if (n == 0) throw Error(Err::EmptyEvaluation, "ppo_update on empty buffer");

  // Advantage normalization over the update batch.
  double mean = std::accumulate(buffer.advantages.begin(), buffer.advantages.end(), 0.0) /
                static_cast<double>(n);
  double var = 0.0;
  for (const double a : buffer.advantages) var += (a - mean) * (a - mean);
  var /= static_cast<double>(n);
  const double inv_std = 1.0 / (std::sqrt(var) + 1e-8);
  std::vector<double> adv(n);
  for (std::size_t i = 0; i < n; ++i) adv[i] = (buffer.advantages[i] - mean) * inv_std;

  UpdateMetrics metrics;
  std::size_t metric_samples = 0;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < cfg.update_epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i)
      std::swap(order[i - 1], order[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(i)))]);
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.minibatch_size)) {
      const std::size_t end = std::min(n, start + static_cast<std::size_t>(cfg.minibatch_size));
      const double batch = static_cast<double>(end - start);
      Tape tape;
      std::vector<int> params;
      params.reserve(model.params.size());
      for (const auto& p : model.params) params.push_back(tape.input(p));

      int policy_sum = -1, entropy_sum = -1, value_sum = -1;
      for (std::size_t k = start; k < end; ++k) {
        const Transition& s = buffer.steps[order[k]];
        const double a = adv[order[k]];
        const auto fwd = forward_on_tape(tape, params, model, s.obs);
        const int lp_all = tape.log_softmax_col(fwd.logits);
        const int lp = tape.gather_rows(lp_all, {s.action});
        const int ratio = tape.exp_(tape.add_const(lp, -s.log_prob));
        const int surr1 = tape.scale(ratio, a);
        const int surr2 = tape.scale(tape.clamp(ratio, 1.0 - cfg.clip_ratio, 1.0 + cfg.clip_ratio), a);
        const int pol = tape.scale(tape.min_(surr1, surr2), -1.0);
        const int ent = tape.scale(tape.sum(tape.mul(tape.exp_(lp_all), lp_all)), -1.0);
        const int vdiff = tape.add_const(fwd.value, -buffer.returns[order[k]]);
        const int vloss = tape.mul(vdiff, vdiff);
        policy_sum = policy_sum < 0 ? pol : tape.add(policy_sum, pol);
        entropy_sum = entropy_sum < 0 ? ent : tape.add(entropy_sum, ent);
        value_sum = value_sum < 0 ? vloss : tape.add(value_sum, vloss);

        const double r = tape.value(ratio).d[0];
        if (std::abs(r - 1.0) > cfg.clip_ratio) metrics.clip_fraction += 1.0;
      }
      const int loss =
          tape.add(tape.add(tape.scale(policy_sum, 1.0 / batch),
                            tape.scale(entropy_sum, -cfg.entropy_coef / batch)),
                   tape.scale(value_sum, cfg.value_coef / batch));
      const double loss_value = tape.value(loss).d[0];
      if (!std::isfinite(loss_value))
        throw Error(Err::NonFiniteLoss, "loss diverged during PPO update");
      tape.backward(loss);

      std::vector<Mat> grads;
      grads.reserve(params.size());
      double norm_sq = 0.0;
      for (std::size_t i = 0; i < params.size(); ++i) {
        Mat g = tape.grad(params[i]);
        if (g.size() == 0) g = Mat(model.params[i].rows, model.params[i].cols);
        for (const double x : g.d) norm_sq += x * x;
        grads.push_back(std::move(g));
      }
      const double norm = std::sqrt(norm_sq);
      if (norm > cfg.grad_norm_cap && norm > 0.0) {
        const double s = cfg.grad_norm_cap / norm;
        for (auto& g : grads)
          for (auto& x : g.d) x *= s;
      }
      adam_step(model, adam, grads, cfg.learning_rate);

      metrics.policy_loss += tape.value(policy_sum).d[0];
      metrics.value_loss += tape.value(value_sum).d[0];
      metrics.entropy += tape.value(entropy_sum).d[0];
      metric_samples += end - start;
    }
  }
  metrics.policy_loss /= static_cast<double>(metric_samples);
  metrics.value_loss /= static_cast<double>(metric_samples);
  metrics.entropy /= static_cast<double>(metric_samples);
  metrics.clip_fraction /= static_cast<double>(metric_samples);
  return metrics;
}

namespace {

struct EpisodeRollout {
  std::vector<Transition> steps;
  double total_reward = 0.0;
};

EpisodeRollout rollout_episode(const NetDef& net, const Model& model, std::uint64_t ep_seed) {
  EpisodeRollout out;
  Episode ep(net, ep_seed);
  Rng action_rng(derive_seed(ep_seed, "action"));
  StepResult res = ep.reset();
  while (!res.done) {
    Transition t;
    t.obs = res.observation;
    const auto fwd = forward(model, t.obs);
    auto [idx, lp] = sample_action(fwd.logits, action_rng);
    t.action = idx;
    t.log_prob = lp;
    t.value = fwd.value;
    res = ep.step(idx);
    t.reward = res.reward;
    t.done = res.done;
    out.total_reward += res.reward;
    out.steps.push_back(std::move(t));
  }
  return out;
}

// Deterministic evaluation: argmax policy over a fixed set of seeds.
std::vector<double> greedy_eval(const NetDef& net, const Model& model, std::uint64_t seed,
                                int episodes) {
  std::vector<double> rewards(static_cast<std::size_t>(episodes), 0.0);
  for (int e = 0; e < episodes; ++e) {
    Episode ep(net, derive_seed(seed, "eval", static_cast<std::uint64_t>(e)));
    StepResult res = ep.reset();
    double total = 0.0;
    while (!res.done) {
      const auto fwd = forward(model, res.observation);
      res = ep.step(greedy_action(fwd.logits));
      total += res.reward;
    }
    rewards[static_cast<std::size_t>(e)] = total;
  }
  return rewards;
}

}  // namespace

TrainResult train_net(const NetDef& net, double target_reward, const PPOConfig& cfg,
                      std::uint64_t seed) {
  const GraphSchema schema = graph_schema(net);
  TrainResult result;
  result.model = init_model(schema, {}, seed);
  AdamState adam;
  Rng update_rng(derive_seed(seed, "ppo"));

  constexpr int kWave = 8;  // episodes collected per parallel wave
  // A run that has not hit the target after this many interactions is
  // restarted from fresh weights; the interaction budget keeps counting.
  constexpr long kRestartAfter = 70000;
  std::uint64_t episode_counter = 0;
  long interactions = 0;
  long attempt_start = 0;
  std::uint64_t attempt = 0;

  while (interactions < cfg.total_steps) {
    if (interactions - attempt_start >= kRestartAfter) {
      attempt += 1;
      attempt_start = interactions;
      result.model = init_model(schema, {}, derive_seed(seed, "attempt", attempt));
      adam = AdamState{};
      update_rng = Rng(derive_seed(seed, "ppo", attempt));
    }
    TrajectoryBuffer buffer;
    double reward_sum = 0.0;
    int episode_count = 0;
    while (static_cast<int>(buffer.steps.size()) < cfg.rollout_length &&
           interactions + static_cast<long>(buffer.steps.size()) < cfg.total_steps) {
      std::vector<EpisodeRollout> wave(kWave);
#pragma omp parallel for schedule(static)
      for (int w = 0; w < kWave; ++w) {
        wave[static_cast<std::size_t>(w)] = rollout_episode(
            net, result.model,
            derive_seed(seed, "episode", episode_counter + static_cast<std::uint64_t>(w)));
      }
      episode_counter += kWave;
      std::size_t collected = 0;
      for (auto& r : wave) {
        collected += r.steps.size();
        reward_sum += r.total_reward;
        episode_count += 1;
        for (auto& s : r.steps) buffer.steps.push_back(std::move(s));
      }
      if (collected == 0) break;  // net offers no decisions; nothing to learn from
    }
    if (buffer.steps.empty()) break;
    interactions += static_cast<long>(buffer.steps.size());

    compute_gae(buffer, cfg.gamma, cfg.gae_lambda);
    const UpdateMetrics m = ppo_update(result.model, adam, buffer, cfg, update_rng);
    result.log.push_back({interactions, reward_sum / std::max(1, episode_count), m.policy_loss,
                          m.value_loss, m.entropy, m.clip_fraction});

    const auto eval = greedy_eval(net, result.model, seed, 10);
    bool all_at_target = true;
    for (const double r : eval)
      if (std::abs(r - target_reward) > 1e-9) all_at_target = false;
    if (all_at_target) {
      result.reached_target = true;
      break;
    }
  }
  result.interactions = interactions;
  return result;
}

TrainResult train_problem(char problem, const PPOConfig& cfg, std::uint64_t seed) {
  const NetDef net = build_problem(problem);
  return train_net(net, table2_row(problem).optimum, cfg, seed);
}

std::string training_log_csv(const std::vector<LogRow>& log) {
  std::string out = "step,mean_reward,policy_loss,value_loss,entropy,clip_frac\n";
  char buf[256];
  for (const auto& row : log) {
    std::snprintf(buf, sizeof(buf), "%ld,%.17g,%.17g,%.17g,%.17g,%.17g\n", row.step,
                  row.mean_reward, row.policy_loss, row.value_loss, row.entropy,
                  row.clip_fraction);
    out += buf;
  }
  return out;
}

}  // namespace aepn
