#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <unordered_map>
#include <span>
#include <vector>

#include "overtake/env.hpp"
#include "overtake/q_network.hpp"
#include "overtake/replay.hpp"
#include "overtake/rng.hpp"

namespace overtake {

struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.05;
  std::int64_t decay_steps = 6000;

  void validate() const;
  friend bool operator==(const EpsilonSchedule&, const EpsilonSchedule&) = default;
};

// Linear from start to end over decay_steps, then flat.
double epsilon(std::int64_t step, const EpsilonSchedule& sched);

// Consumes exactly one draw when greedy and two when exploring.
int select_action(std::span<const double> q_values, double eps, Rng& rng);

struct AgentConfig {
  Algorithm algorithm = Algorithm::kDdqn;
  double gamma = 0.8;
  double tabular_alpha = 0.2;
  double nn_lr = 1e-4;
  int batch = 32;
  int target_sync_steps = 500;
  int buffer_capacity = 10000;
  int hidden = 128;
  int train_every = 1;  // policy steps per gradient step
  DuelingAggregation dueling_aggregation = DuelingAggregation::kMax;
  EpsilonSchedule epsilon;

  void validate() const;
  friend bool operator==(const AgentConfig&, const AgentConfig&) = default;
};

// --- Tabular Q-learning ----------------------------------------------------

class QTable {
 public:
  explicit QTable(int action_count) : action_count_(action_count) {}

  int action_count() const { return action_count_; }
  // Row for a state; unseen states read as zeros.
  std::vector<double> values(std::int64_t state) const;
  double get(std::int64_t state, int action) const;
  void set(std::int64_t state, int action, double q);
  std::size_t size() const { return table_.size(); }

 private:
  int action_count_;
  std::unordered_map<std::int64_t, std::vector<double>> table_;
};

// Q(s,a) += alpha [r + gamma max Q(s',.) - Q(s,a)]; no bootstrap when terminal.
void tabular_q_update(QTable& q, std::int64_t s, int a, double r, std::int64_t s_next,
                      bool terminal, double alpha, double gamma);

// Deterministic grid: actions up/down/left/right, walls keep the agent in
// place, reaching the goal cell yields `goal_reward` and terminates.
class Gridworld {
 public:
  static constexpr int kActions = 4;

  Gridworld(int rows, int cols, int goal_row, int goal_col, double goal_reward = 1.0,
            double step_reward = 0.0);

  struct Outcome {
    std::int64_t next = 0;
    double reward = 0.0;
    bool terminal = false;
  };

  int state_count() const { return rows_ * cols_; }
  std::int64_t goal() const { return goal_; }
  bool is_terminal(std::int64_t s) const { return s == goal_; }
  Outcome step(std::int64_t s, int action) const;
  int rows() const { return rows_; }
  int cols() const { return cols_; }

 private:
  int rows_, cols_;
  std::int64_t goal_;
  double goal_reward_, step_reward_;
};

struct TabularRunConfig {
  int episodes = 5000;
  int max_steps = 100;
  double alpha = 0.2;
  double gamma = 0.8;
  EpsilonSchedule epsilon;
};

// Exploring starts: each episode begins in a uniformly drawn non-terminal cell.
QTable train_tabular(const Gridworld& grid, const TabularRunConfig& cfg, std::uint64_t seed);

// --- Deep Q agents ---------------------------------------------------------

class DqnAgent {
 public:
  DqnAgent(const AgentConfig& cfg, int observation_size, std::uint64_t seed);
  // Wraps existing parameters; the target starts as a copy.
  DqnAgent(const AgentConfig& cfg, QNetwork online, std::uint64_t seed);

  int act(std::span<const double> obs, double eps);
  std::vector<double> q_values(std::span<const double> obs) const { return online_.q_values(obs); }

  void remember(Transition t) { buffer_.push(std::move(t)); }
  bool ready() const { return buffer_.size() >= static_cast<std::size_t>(cfg_.batch); }

  struct TrainStats {
    double loss = 0.0;
    double mean_abs_td = 0.0;
  };

  // One gradient step on `batch`; returns the loss before the update.
  TrainStats train_step(std::span<const Transition> batch);
  // Samples a batch from the replay buffer, trains, and syncs the target on cadence.
  TrainStats learn();
  void sync_target() { target_ = online_; }

  const QNetwork& online() const { return online_; }
  const QNetwork& target() const { return target_; }
  QNetwork& online() { return online_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  std::int64_t gradient_steps() const { return gradient_steps_; }
  const AgentConfig& config() const { return cfg_; }

 private:
  AgentConfig cfg_;
  QNetwork online_;
  QNetwork target_;
  ReplayBuffer buffer_;
  Rng explore_rng_;
  Rng replay_rng_;
  std::int64_t gradient_steps_ = 0;
};

struct EpisodeMetrics {
  int episode = 0;
  double ret = 0.0;
  double return_normalized = 0.0;
  int steps = 0;
  bool collision = false;
  double mean_speed = 0.0;
  double distance = 0.0;
  double epsilon = 0.0;
  double mean_td_error = 0.0;

  friend bool operator==(const EpisodeMetrics&, const EpisodeMetrics&) = default;
};

// (ret - min) / (max - min) over the run; all zeros when the range is empty.
void normalize_returns(std::vector<EpisodeMetrics>& history);

struct AggregateMetrics {
  int episodes = 0;
  double mean_return = 0.0;
  double mean_return_normalized = 0.0;
  double collision_rate = 0.0;
  double mean_speed = 0.0;
  double mean_distance = 0.0;
  double mean_steps = 0.0;
};

AggregateMetrics aggregate(std::span<const EpisodeMetrics> episodes);

struct TrainingOptions {
  int episodes = 2000;
  int checkpoint_every = 100;  // 0 disables periodic checkpoints
  // Called with (episode count so far, current online network).
  std::function<void(int, const QNetwork&)> on_checkpoint;
  std::function<void(const EpisodeMetrics&)> on_episode;
};

struct TrainingResult {
  std::optional<QNetwork> params;  // empty for the reference algorithm
  std::vector<EpisodeMetrics> history;
};

TrainingResult run_training(const AgentConfig& cfg, const EnvConfig& env_cfg,
                            std::uint64_t master_seed, const TrainingOptions& opts);

// A greedy policy: either a Q-network or the reference stack.
struct Policy {
  std::optional<QNetwork> network;

  static Policy reference() { return {}; }
  static Policy greedy(QNetwork net) { return {std::move(net)}; }
  bool is_reference() const { return !network.has_value(); }
};

// Runs one greedy episode. Each step's realized action index is appended to
// `actions` when given.
EpisodeMetrics run_episode(const Policy& policy, HighwayEnv& env, std::uint64_t seed,
                           std::vector<int>* actions = nullptr);

struct EvaluationResult {
  std::vector<EpisodeMetrics> episodes;
  AggregateMetrics summary;
};

// Greedy (epsilon = 0) evaluation on held-out episode seeds. Episodes may run on
// `workers` threads; results are ordered by episode index.
EvaluationResult evaluate(const Policy& policy, const EnvConfig& env_cfg, int n_episodes,
                          std::uint64_t master_seed, int workers = 1);

}  // namespace overtake
