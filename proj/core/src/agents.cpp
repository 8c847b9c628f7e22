#include "overtake/agents.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "overtake/error.hpp"

namespace overtake {

void EpsilonSchedule::validate() const {
  if (!(start >= end && end >= 0.0 && start <= 1.0))
    throw ConfigError("epsilon: need 1 >= start >= end >= 0");
  if (decay_steps <= 0) throw ConfigError("epsilon: decay_steps must be positive");
}

double epsilon(std::int64_t step, const EpsilonSchedule& sched) {
  if (step < 0) throw InvalidInputError("epsilon: step must be >= 0");
  if (step >= sched.decay_steps) return sched.end;
  const double frac = static_cast<double>(step) / static_cast<double>(sched.decay_steps);
  return sched.start + (sched.end - sched.start) * frac;
}

int select_action(std::span<const double> q_values, double eps, Rng& rng) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw InvalidInputError("select_action: epsilon outside [0, 1]");
  if (q_values.empty()) throw ShapeError("select_action: no actions");
  if (rng.uniform() < eps) return static_cast<int>(rng.below(q_values.size()));
  return argmax_action(q_values);
}

void AgentConfig::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("agent: gamma must be in [0, 1]");
  if (!(tabular_alpha >= 0.0 && tabular_alpha <= 1.0))
    throw ConfigError("agent: tabular_alpha must be in [0, 1]");
  if (!(nn_lr > 0.0)) throw ConfigError("agent: nn_lr must be positive");
  if (batch <= 0) throw ConfigError("agent: batch must be positive");
  if (buffer_capacity < batch) throw ConfigError("agent: batch must not exceed buffer_capacity");
  if (target_sync_steps <= 0) throw ConfigError("agent: target_sync_steps must be positive");
  if (hidden <= 0) throw ConfigError("agent: hidden must be positive");
  if (train_every <= 0) throw ConfigError("agent: train_every must be positive");
  epsilon.validate();
}

// --- DqnAgent ---------------------------------------------------------------

namespace {

QNetwork initial_network(const AgentConfig& cfg, int observation_size, std::uint64_t seed) {
  Rng rng(derive_seed(seed, seed_stream::kNetworkInit));
  switch (cfg.algorithm) {
    case Algorithm::kDqn:
      return QNetwork::make_dqn(observation_size, cfg.hidden, kActionCount, rng);
    case Algorithm::kDdqn:
      return QNetwork::make_dueling(observation_size, cfg.hidden, kActionCount, rng,
                                    cfg.dueling_aggregation);
    default:
      throw ConfigError("DqnAgent: algorithm must be dqn or ddqn");
  }
}

}  // namespace

DqnAgent::DqnAgent(const AgentConfig& cfg, int observation_size, std::uint64_t seed)
    : DqnAgent(cfg, initial_network(cfg, observation_size, seed), seed) {}

DqnAgent::DqnAgent(const AgentConfig& cfg, QNetwork online, std::uint64_t seed)
    : cfg_(cfg),
      online_(std::move(online)),
      target_(online_),
      buffer_(static_cast<std::size_t>(cfg.buffer_capacity)),
      explore_rng_(derive_seed(seed, seed_stream::kExploration)),
      replay_rng_(derive_seed(seed, seed_stream::kReplay)) {
  cfg_.validate();
}

int DqnAgent::act(std::span<const double> obs, double eps) {
  return select_action(online_.q_values(obs), eps, explore_rng_);
}

DqnAgent::TrainStats DqnAgent::train_step(std::span<const Transition> batch) {
  if (batch.empty()) throw ShapeError("train_step: empty batch");
  const auto n = static_cast<Eigen::Index>(batch.size());
  const Eigen::Index dim = online_.input_dim();
  Eigen::MatrixXd s(dim, n), s_next(dim, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& t = batch[k];
    if (static_cast<Eigen::Index>(t.s.size()) != dim ||
        static_cast<Eigen::Index>(t.s_next.size()) != dim)
      throw ShapeError("train_step: observation size does not match the network");
    s.col(k) = Eigen::Map<const Eigen::VectorXd>(t.s.data(), dim);
    s_next.col(k) = Eigen::Map<const Eigen::VectorXd>(t.s_next.data(), dim);
  }

  const Eigen::MatrixXd q_next = target_.forward(s_next);
  QCache cache;
  const Eigen::MatrixXd q = online_.forward(s, &cache);

  std::vector<double> pred(n), targets(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& t = batch[k];
    if (t.a < 0 || t.a >= q.rows()) throw InvalidInputError("train_step: action out of range");
    std::span<const double> next(q_next.col(k).data(), static_cast<std::size_t>(q_next.rows()));
    targets[k] = td_target(t.r, next, cfg_.gamma, t.done);
    pred[k] = q(t.a, k);
  }

  TrainStats stats;
  stats.loss = mse_loss(pred, targets);
  Eigen::MatrixXd upstream = Eigen::MatrixXd::Zero(q.rows(), n);
  double abs_td = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    upstream(batch[k].a, k) = 2.0 * (pred[k] - targets[k]) / static_cast<double>(n);
    abs_td += std::abs(targets[k] - pred[k]);
  }
  stats.mean_abs_td = abs_td / static_cast<double>(n);

  online_.sgd_step(online_.backward(cache, upstream), cfg_.nn_lr);
  ++gradient_steps_;
  return stats;
}

DqnAgent::TrainStats DqnAgent::learn() {
  const auto batch = buffer_.sample(static_cast<std::size_t>(cfg_.batch), replay_rng_);
  const auto stats = train_step(batch);
  if (gradient_steps_ % cfg_.target_sync_steps == 0) sync_target();
  return stats;
}

// --- Metrics ----------------------------------------------------------------

void normalize_returns(std::vector<EpisodeMetrics>& history) {
  if (history.empty()) return;
  const auto [lo, hi] = std::minmax_element(history.begin(), history.end(),
                                            [](const auto& a, const auto& b) { return a.ret < b.ret; });
  const double min = lo->ret, range = hi->ret - lo->ret;
  for (auto& m : history) m.return_normalized = range > 0.0 ? (m.ret - min) / range : 0.0;
}

AggregateMetrics aggregate(std::span<const EpisodeMetrics> episodes) {
  AggregateMetrics a;
  a.episodes = static_cast<int>(episodes.size());
  if (episodes.empty()) return a;
  for (const auto& m : episodes) {
    a.mean_return += m.ret;
    a.mean_return_normalized += m.return_normalized;
    a.collision_rate += m.collision ? 1.0 : 0.0;
    a.mean_speed += m.mean_speed;
    a.mean_distance += m.distance;
    a.mean_steps += m.steps;
  }
  const double n = static_cast<double>(episodes.size());
  a.mean_return /= n;
  a.mean_return_normalized /= n;
  a.collision_rate /= n;
  a.mean_speed /= n;
  a.mean_distance /= n;
  a.mean_steps /= n;
  return a;
}

// --- Episodes ---------------------------------------------------------------

namespace {

struct EpisodeAccumulator {
  double ret = 0.0;
  double speed_sum = 0.0;
  int steps = 0;
  bool collision = false;

  void add(const StepResult& res) {
    ret += res.reward;
    speed_sum += res.info.ego_speed;
    ++steps;
    collision = collision || res.info.collision;
  }

  EpisodeMetrics finish(int episode, double distance) const {
    EpisodeMetrics m;
    m.episode = episode;
    m.ret = ret;
    m.steps = steps;
    m.collision = collision;
    m.mean_speed = steps > 0 ? speed_sum / steps : 0.0;
    m.distance = distance;
    return m;
  }
};

// Time-limit truncation is not a terminal state: the observation carries no clock.
bool is_terminal(const StepResult& res) {
  return res.done && res.info.cause != Termination::kHorizon;
}

}  // namespace

EpisodeMetrics run_episode(const Policy& policy, HighwayEnv& env, std::uint64_t seed,
                           std::vector<int>* actions) {
  auto obs = env.reset(seed);
  EpisodeAccumulator acc;
  while (!env.done()) {
    StepResult res;
    if (policy.is_reference()) {
      res = env.step_reference();
    } else {
      const auto q = policy.network->q_values(obs);
      res = env.step(action_from_slot(argmax_action(q)));
    }
    if (actions) actions->push_back(action_index(res.realized));
    acc.add(res);
    obs = std::move(res.observation);
  }
  return acc.finish(0, env.distance());
}

TrainingResult run_training(const AgentConfig& cfg, const EnvConfig& env_cfg,
                            std::uint64_t master_seed, const TrainingOptions& opts) {
  cfg.validate();
  if (opts.episodes < 0) throw ConfigError("train: episodes must be >= 0");
  HighwayEnv env(env_cfg);
  TrainingResult result;

  auto report = [&](EpisodeMetrics m) {
    result.history.push_back(m);
    if (opts.on_episode) opts.on_episode(m);
  };

  if (cfg.algorithm == Algorithm::kReference) {
    const auto policy = Policy::reference();
    for (int ep = 0; ep < opts.episodes; ++ep) {
      auto m = run_episode(policy, env, derive_seed(master_seed, seed_stream::kTrainEpisode, ep));
      m.episode = ep;
      report(m);
    }
    normalize_returns(result.history);
    return result;
  }
  if (cfg.algorithm == Algorithm::kTabular)
    throw ConfigError("train: the tabular baseline runs on the gridworld only");

  DqnAgent agent(cfg, env_cfg.observation_size(), master_seed);
  std::int64_t total_steps = 0;
  for (int ep = 0; ep < opts.episodes; ++ep) {
    auto obs = env.reset(derive_seed(master_seed, seed_stream::kTrainEpisode, ep));
    EpisodeAccumulator acc;
    double td_sum = 0.0;
    int td_count = 0;
    double eps = epsilon(total_steps, cfg.epsilon);
    while (!env.done()) {
      eps = epsilon(total_steps, cfg.epsilon);
      const int a = agent.act(obs, eps);
      auto res = env.step(action_from_slot(a));
      agent.remember({obs, a, res.reward, res.observation, is_terminal(res)});
      ++total_steps;
      if (agent.ready() && total_steps % cfg.train_every == 0) {
        td_sum += agent.learn().mean_abs_td;
        ++td_count;
      }
      acc.add(res);
      obs = std::move(res.observation);
    }
    auto m = acc.finish(ep, env.distance());
    m.epsilon = eps;
    m.mean_td_error = td_count > 0 ? td_sum / td_count : 0.0;
    report(m);
    if (opts.checkpoint_every > 0 && (ep + 1) % opts.checkpoint_every == 0 && opts.on_checkpoint)
      opts.on_checkpoint(ep + 1, agent.online());
  }
  normalize_returns(result.history);
  result.params = agent.online();
  return result;
}

EvaluationResult evaluate(const Policy& policy, const EnvConfig& env_cfg, int n_episodes,
                          std::uint64_t master_seed, int workers) {
  if (n_episodes < 0) throw ConfigError("evaluate: episode count must be >= 0");
  EvaluationResult out;
  out.episodes.resize(n_episodes);
  workers = std::clamp(workers, 1, std::max(1, n_episodes));

  auto run_slice = [&](int worker) {
    HighwayEnv env(env_cfg);
    for (int ep = worker; ep < n_episodes; ep += workers) {
      auto m = run_episode(policy, env, derive_seed(master_seed, seed_stream::kEvalEpisode, ep));
      m.episode = ep;
      out.episodes[ep] = m;
    }
  };
  if (workers == 1) {
    run_slice(0);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(run_slice, w);
  }
  normalize_returns(out.episodes);
  out.summary = aggregate(out.episodes);
  return out;
}

}  // namespace overtake
