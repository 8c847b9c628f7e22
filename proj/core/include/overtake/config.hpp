#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "overtake/agents.hpp"
#include "overtake/env.hpp"

namespace overtake {

struct TrainConfig {
  int episodes = 2000;
  int eval_episodes = 10;
  double final_window = 0.1;  // fraction of episodes in the comparison window

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct IoConfig {
  int checkpoint_every = 100;
  int workers = 1;

  friend bool operator==(const IoConfig&, const IoConfig&) = default;
};

// Full experiment configuration. Text form is INI-like:
//
//   [section]
//   key = value   # comment
//
// Sections: env, idm, mobil, gains, agent, train, io. Unknown sections or keys
// and malformed values raise ConfigError.
struct RunConfig {
  EnvConfig env;
  AgentConfig agent;
  TrainConfig train;
  IoConfig io;

  void validate() const;
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

RunConfig parse_config(std::string_view text);
// Throws IoError when the file cannot be read.
RunConfig load_config(const std::filesystem::path& path);

// Every key with its resolved value; parse_config(echo_config(c)) == c.
std::string echo_config(const RunConfig& cfg);

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace overtake
