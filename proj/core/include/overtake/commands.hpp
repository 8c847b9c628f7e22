#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace overtake {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,  // usage or configuration error
  kExitIo = 2,
  kExitFormat = 3,
};

struct TrainArgs {
  std::optional<std::filesystem::path> config;
  std::uint64_t seed = 0;
  std::filesystem::path out;
};

struct EvalArgs {
  std::filesystem::path weights;  // ignored for algorithm = reference
  std::optional<std::filesystem::path> config;
  std::optional<int> episodes;
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> out;  // summary CSV
};

struct RolloutArgs {
  std::string policy;  // weights path or "reference"
  std::optional<std::filesystem::path> config;
  std::uint64_t seed = 0;
  std::filesystem::path trace;  // JSONL; action sequence goes to <trace>.actions.csv
};

struct CompareArgs {
  std::optional<std::filesystem::path> config;
  std::vector<std::uint64_t> seeds;
  std::filesystem::path out;
};

// Each command reports progress to `log`, errors to `err`, and returns an ExitCode.
int cmd_train(const TrainArgs& args, std::ostream& log, std::ostream& err);
int cmd_eval(const EvalArgs& args, std::ostream& log, std::ostream& err);
int cmd_rollout(const RolloutArgs& args, std::ostream& log, std::ostream& err);
int cmd_compare(const CompareArgs& args, std::ostream& log, std::ostream& err);

inline constexpr const char* kCompareHeader =
    "seed,algorithm,return,return_normalized,collision,mean_speed,distance,eval_return,"
    "eval_collision,eval_mean_speed,eval_distance";

}  // namespace overtake
