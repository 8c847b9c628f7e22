#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "overtake/commands.hpp"

namespace {

std::optional<std::filesystem::path> optional_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::filesystem::path(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Highway overtaking simulator and deep Q-learning harness"};
  app.require_subcommand(1);

  std::string config;
  std::uint64_t seed = 0;

  auto* train = app.add_subcommand("train", "Train an agent and write metrics, checkpoints and weights");
  std::string train_out;
  train->add_option("--config", config, "Run configuration (INI)");
  train->add_option("--seed", seed, "Master seed");
  train->add_option("--out", train_out, "Run directory")->required();

  auto* eval = app.add_subcommand("eval", "Greedy evaluation of a trained or reference policy");
  std::string weights, eval_out;
  int episodes = -1;
  eval->add_option("weights", weights, "Weights file (ignored for algorithm = reference)");
  eval->add_option("--config", config, "Run configuration (INI)");
  eval->add_option("--episodes", episodes, "Number of test episodes (default from config: 10)");
  eval->add_option("--seed", seed, "Master seed");
  eval->add_option("--out", eval_out, "Optional summary CSV");

  auto* rollout = app.add_subcommand("rollout", "Record a per-tick trace of one episode");
  std::string policy, trace;
  rollout->add_option("policy", policy, "Weights file or 'reference'")->required();
  rollout->add_option("--config", config, "Run configuration (INI)");
  rollout->add_option("--seed", seed, "Episode seed");
  rollout->add_option("--trace", trace, "Trace output (JSONL)")->required();

  auto* compare = app.add_subcommand("compare", "Train and compare reference, DQN and DDQN");
  std::vector<std::uint64_t> seeds;
  std::string compare_out;
  compare->add_option("--config", config, "Run configuration (INI)");
  compare->add_option("--seeds", seeds, "Seeds, comma separated")->delimiter(',')->required();
  compare->add_option("--out", compare_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? overtake::kExitOk : overtake::kExitUsage;
  }

  if (train->parsed())
    return overtake::cmd_train({optional_path(config), seed, train_out}, std::cout, std::cerr);
  if (eval->parsed()) {
    overtake::EvalArgs args{weights, optional_path(config), std::nullopt, seed, optional_path(eval_out)};
    if (episodes >= 0) args.episodes = episodes;
    return overtake::cmd_eval(args, std::cout, std::cerr);
  }
  if (rollout->parsed())
    return overtake::cmd_rollout({policy, optional_path(config), seed, trace}, std::cout, std::cerr);
  if (compare->parsed())
    return overtake::cmd_compare({optional_path(config), seeds, compare_out}, std::cout, std::cerr);
  return overtake::kExitUsage;
}
