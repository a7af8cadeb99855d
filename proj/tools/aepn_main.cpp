#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aepn/patterns.hpp"
#include "aepn/policies.hpp"
#include "aepn/runner.hpp"
#include "aepn/serialize.hpp"

namespace {

using namespace aepn;

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

void emit(const std::string& path, const std::string& content) {
  if (path.empty())
    std::fputs(content.c_str(), stdout);
  else
    write_file_atomic(path, content);
}

// Runs one episode per seed following the oracle's optimal action sequence.
EvalResult evaluate_oracle(const NetDef& net, int episodes, std::uint64_t seed) {
  if (episodes <= 0) throw Error(Err::EmptyEvaluation, "episodes must be positive");
  std::vector<double> rewards;
  for (int e = 0; e < episodes; ++e) {
    const std::uint64_t ep_seed = derive_seed(seed, "episode", static_cast<std::uint64_t>(e));
    const OracleResult res = exhaustive_oracle(net, ep_seed);
    rewards.push_back(res.best_reward);
  }
  EvalResult out;
  out.per_episode = rewards;
  double sum = 0.0;
  for (const double r : rewards) sum += r;
  out.mean = sum / static_cast<double>(rewards.size());
  double var = 0.0;
  for (const double r : rewards) var += (r - out.mean) * (r - out.mean);
  out.stddev = std::sqrt(var / static_cast<double>(rewards.size()));
  return out;
}

EvalResult evaluate_named_policy(const NetDef& net, const std::string& policy, int episodes,
                                 std::uint64_t seed) {
  if (policy == "random") {
    return evaluate_policy(
        net, [](const AssignmentGraph& obs, Rng& rng) { return random_policy(obs, rng).index; },
        episodes, seed);
  }
  if (policy == "greedy") {
    return evaluate_policy(
        net,
        [&net](const AssignmentGraph& obs, Rng&) { return greedy_spt_policy(net, obs).index; },
        episodes, seed);
  }
  if (policy == "oracle") return evaluate_oracle(net, episodes, seed);
  throw Error(Err::UnknownPolicy, "policy must be random, greedy, or oracle: " + policy);
}

EvalResult evaluate_model(const NetDef& net, const Model& model, bool deterministic,
                          int episodes, std::uint64_t seed) {
  if (!sig_equal(model.sig, schema_sig(graph_schema(net))))
    throw Error(Err::ModelSchemaMismatch, "model was trained for a different observation schema");
  return evaluate_policy(
      net,
      [&model, deterministic](const AssignmentGraph& obs, Rng& rng) {
        const auto fwd = forward(model, obs);
        return deterministic ? greedy_action(fwd.logits) : sample_action(fwd.logits, rng).first;
      },
      episodes, seed);
}

void print_report(const RunReport& r) {
  std::printf("problem=%s policy=%s episodes=%zu seed=%llu mean=%.6g std=%.6g (%.2fs)\n",
              r.problem.c_str(), r.policy.c_str(), r.per_episode.size(),
              static_cast<unsigned long long>(r.seed), r.mean_reward, r.std_reward,
              r.wall_clock_seconds);
}

int cmd_run(const std::string& problem, const std::string& policy, int episodes,
            std::uint64_t seed, const std::string& out) {
  const NetDef net = build_named(problem);
  const double t0 = now_seconds();
  const EvalResult res = evaluate_named_policy(net, policy, episodes, seed);
  const RunReport report =
      make_report(problem, policy, seed, res.per_episode, now_seconds() - t0);
  if (!out.empty()) write_file_atomic(out, report_to_json(report).dump(2) + "\n");
  print_report(report);
  return 0;
}

int cmd_train(const std::string& problem, long steps, std::uint64_t seed, const std::string& out,
              const std::string& log_path) {
  const NetDef net = build_named(problem);
  PPOConfig cfg;
  cfg.total_steps = steps;
  double target = 0.0;
  if (problem.size() == 1 && problem[0] >= 'a' && problem[0] <= 'h')
    target = table2_row(problem[0]).optimum;
  else
    target = exhaustive_oracle(net, derive_seed(seed, "episode", 0)).best_reward;

  if (steps <= 0) {
    std::fprintf(stderr, "warning: zero training budget; saving the initialized model\n");
    const Model model = init_model(graph_schema(net), {}, seed);
    if (!out.empty()) save_model(out, model);
    if (!log_path.empty()) write_file_atomic(log_path, training_log_csv({}));
    return 0;
  }

  const TrainResult result = train_net(net, target, cfg, seed);
  if (!out.empty()) save_model(out, result.model);
  if (!log_path.empty()) write_file_atomic(log_path, training_log_csv(result.log));
  std::printf("trained problem=%s interactions=%ld reached_target=%s\n", problem.c_str(),
              result.interactions, result.reached_target ? "yes" : "no");
  if (!result.reached_target)
    std::fprintf(stderr, "warning: training budget exhausted before reaching the target\n");
  return 0;
}

int cmd_eval(const std::string& problem, const std::string& model_path, bool deterministic,
             int episodes, std::uint64_t seed, const std::string& out) {
  const NetDef net = build_named(problem);
  const Model model = load_model(model_path);
  const double t0 = now_seconds();
  const EvalResult res = evaluate_model(net, model, deterministic, episodes, seed);
  const RunReport report = make_report(problem, deterministic ? "model:greedy" : "model:sample",
                                       seed, res.per_episode, now_seconds() - t0);
  if (!out.empty()) write_file_atomic(out, report_to_json(report).dump(2) + "\n");
  print_report(report);
  return 0;
}

int cmd_export(const std::string& problem, const std::string& format, const std::string& stage,
               std::uint64_t seed, const std::string& out) {
  const NetDef net = build_named(problem);
  if (format != "dot" && format != "json")
    throw Error(Err::UnknownStage, "format must be dot or json: " + format);
  std::string content;
  if (stage == "net") {
    content = format == "dot" ? net_to_dot(net) : net_to_json(net).dump(2) + "\n";
  } else if (stage == "expanded" || stage == "graph") {
    Marking m = initial_state(net, seed);
    Rng rng(derive_seed(seed, "env"));
    advance(net, m, rng);
    const ExpandedNet expanded = expand(net, m);
    if (stage == "expanded") {
      content = format == "dot" ? expanded_to_dot(net, expanded)
                                : expanded_to_json(net, expanded).dump(2) + "\n";
    } else {
      const GraphSchema schema = graph_schema(net);
      const AssignmentGraph g = map_to_graph(net, schema, expanded);
      content =
          format == "dot" ? graph_to_dot(schema, g) : graph_to_json(schema, g).dump(2) + "\n";
    }
  } else {
    throw Error(Err::UnknownStage, "stage must be net, expanded, or graph: " + stage);
  }
  emit(out, content);
  return 0;
}

int cmd_list_problems() {
  std::printf("%-3s %-9s %-8s %9s %8s %8s %5s %5s\n", "id", "pattern", "pooling", "arrivals",
              "horizon", "interarr", "pools", "reps");
  for (char id = 'a'; id <= 'h'; ++id) {
    const ProblemSpec s = problem_spec(id);
    std::printf("%-3c %-9s %-8s %9d %8.3g %8.3g %5d %5d\n", s.id, pattern_name(s.pattern),
                pooling_name(s.pooling), s.arrivals_per_instant, s.horizon, s.interarrival,
                s.resources_per_pool, s.cycle_repetitions);
  }
  std::printf("extra nets: single, disjoint, joint\n");
  return 0;
}

int cmd_reproduce_table2(long budget, std::uint64_t seed, const std::string& out) {
  std::string md =
      "| problem | random (paper) | random (ours) | random ok | optimum (paper) | oracle | "
      "oracle ok | ppo (paper) | ppo | ppo ok |\n|---|---|---|---|---|---|---|---|---|---|\n";
  nlohmann::json rows = nlohmann::json::array();
  bool all_ok = true;
  for (char id = 'a'; id <= 'h'; ++id) {
    const Table2Row ref = table2_row(id);
    const NetDef net = build_problem(id);

    const EvalResult rnd = evaluate_named_policy(net, "random", 10, seed);
    const bool rnd_ok = std::abs(rnd.mean - ref.random_mean) <= 2.0;

    const OracleResult oracle = exhaustive_oracle(net, derive_seed(seed, "episode", 0));
    const bool oracle_ok = oracle.best_reward == ref.optimum;

    std::string ppo_cell = "skipped";
    std::string ppo_ok = "skipped";
    double ppo_mean = 0.0;
    bool ppo_pass = true;
    if (budget > 0) {
      PPOConfig cfg;
      cfg.total_steps = budget;
      const TrainResult trained = train_net(net, ref.optimum, cfg, seed);
      const EvalResult ev = evaluate_model(net, trained.model, true, 10, seed);
      ppo_mean = ev.mean;
      ppo_pass = ev.mean == ref.optimum && ev.stddev == 0.0;
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.4g ± %.4g", ev.mean, ev.stddev);
      ppo_cell = buf;
      ppo_ok = ppo_pass ? "pass" : "fail";
    }
    all_ok = all_ok && rnd_ok && oracle_ok && ppo_pass;

    char line[512];
    std::snprintf(line, sizeof(line),
                  "| %c | %.1f ± %.1f | %.4g ± %.4g | %s | %.4g | %.4g | %s | %.4g ± 0 | %s | %s |\n",
                  id, ref.random_mean, ref.random_std, rnd.mean, rnd.stddev,
                  rnd_ok ? "pass" : "fail", ref.optimum, oracle.best_reward,
                  oracle_ok ? "pass" : "fail", ref.ppo_mean, ppo_cell.c_str(), ppo_ok.c_str());
    md += line;

    rows.push_back({{"problem", std::string(1, id)},
                    {"random_mean", rnd.mean},
                    {"random_std", rnd.stddev},
                    {"random_ok", rnd_ok},
                    {"oracle", oracle.best_reward},
                    {"oracle_ok", oracle_ok},
                    {"ppo", budget > 0 ? nlohmann::json(ppo_mean) : nlohmann::json("skipped")},
                    {"ppo_ok", budget > 0 ? nlohmann::json(ppo_pass) : nlohmann::json("skipped")}});
  }
  std::fputs(md.c_str(), stdout);
  if (!out.empty())
    write_file_atomic(out, nlohmann::json{{"seed", seed}, {"budget", budget}, {"rows", rows},
                                          {"all_ok", all_ok}}
                               .dump(2) +
                               "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Action-Evolution Petri net benchmark toolkit"};
  app.require_subcommand(1);

  std::string problem = "a", policy = "random", out, log_path, model_path, format = "dot",
              stage = "net";
  int episodes = 10;
  std::uint64_t seed = 0;
  long steps = 200000, budget = 200000;
  bool deterministic = false;

  auto* run = app.add_subcommand("run", "Evaluate a built-in policy on a problem");
  run->add_option("--problem", problem, "Problem name (a..h, single, disjoint, joint)");
  run->add_option("--policy", policy, "random | greedy | oracle");
  run->add_option("--episodes", episodes, "Number of episodes");
  run->add_option("--seed", seed, "Base seed");
  run->add_option("--out", out, "RunReport JSON path");

  auto* train = app.add_subcommand("train", "Train a PPO agent on a problem");
  train->add_option("--problem", problem, "Problem name");
  train->add_option("--steps", steps, "Interaction budget");
  train->add_option("--seed", seed, "Base seed");
  train->add_option("--out", out, "Model JSON path");
  train->add_option("--log", log_path, "Training-log CSV path");

  auto* eval = app.add_subcommand("eval", "Evaluate a saved model");
  eval->add_option("--problem", problem, "Problem name");
  eval->add_option("--model", model_path, "Model JSON path")->required();
  eval->add_flag("--deterministic", deterministic, "Greedy instead of sampled actions");
  eval->add_option("--episodes", episodes, "Number of episodes");
  eval->add_option("--seed", seed, "Base seed");
  eval->add_option("--out", out, "RunReport JSON path");

  auto* exp = app.add_subcommand("export", "Export a net / expansion / observation graph");
  exp->add_option("--problem", problem, "Problem name");
  exp->add_option("--format", format, "dot | json");
  exp->add_option("--stage", stage, "net | expanded | graph");
  exp->add_option("--seed", seed, "Base seed");
  exp->add_option("--out", out, "Output path (stdout when omitted)");

  auto* t2 = app.add_subcommand("reproduce-table2", "Random / oracle / PPO comparison table");
  t2->add_option("--budget", budget, "PPO interaction budget per problem (0 skips PPO)");
  t2->add_option("--seed", seed, "Base seed");
  t2->add_option("--out", out, "JSON results path");

  auto* list = app.add_subcommand("list-problems", "Show the benchmark problem table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) return cmd_run(problem, policy, episodes, seed, out);
    if (train->parsed()) return cmd_train(problem, steps, seed, out, log_path);
    if (eval->parsed()) return cmd_eval(problem, model_path, deterministic, episodes, seed, out);
    if (exp->parsed()) return cmd_export(problem, format, stage, seed, out);
    if (t2->parsed()) return cmd_reproduce_table2(budget, seed, out);
    if (list->parsed()) return cmd_list_problems();
  } catch (const aepn::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.is_usage() ? 2 : 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
