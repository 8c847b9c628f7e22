#include "overtake/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <ostream>
#include <sstream>

#include "overtake/config.hpp"
#include "overtake/error.hpp"
#include "overtake/records.hpp"
#include "overtake/weights_file.hpp"

namespace fs = std::filesystem;

namespace overtake {

namespace {

RunConfig resolve_config(const std::optional<fs::path>& path) {
  return path ? load_config(*path) : RunConfig{};
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw IoError("cannot create output directory '" + dir.string() + "'" +
                  (ec ? ": " + ec.message() : ""));
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string checkpoint_name(int episode) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "ep-%04d.w", episode);
  return buf;
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kExitFormat;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

// Loads a network and checks it against the configured algorithm and shapes.
QNetwork load_policy_network(const fs::path& path, const RunConfig& cfg) {
  auto net = load_weights(path);
  if (net.algorithm() != cfg.agent.algorithm)
    throw FormatError("weights file '" + path.string() + "' holds a " +
                      std::string(to_string(net.algorithm())) + " network but the config selects " +
                      std::string(to_string(cfg.agent.algorithm)));
  if (net.input_dim() != cfg.env.observation_size() || net.action_count() != kActionCount)
    throw FormatError("weights file '" + path.string() + "' has input " +
                      std::to_string(net.input_dim()) + " / actions " +
                      std::to_string(net.action_count()) + ", config expects " +
                      std::to_string(cfg.env.observation_size()) + " / " +
                      std::to_string(kActionCount));
  return net;
}

Policy policy_for(const RunConfig& cfg, const fs::path& weights) {
  if (cfg.agent.algorithm == Algorithm::kReference) return Policy::reference();
  if (cfg.agent.algorithm == Algorithm::kTabular)
    throw ConfigError("the tabular baseline has no highway policy");
  return Policy::greedy(load_policy_network(weights, cfg));
}

void print_summary(std::ostream& log, const AggregateMetrics& s) {
  log << "episodes " << s.episodes << "  mean_return " << format_double(s.mean_return)
      << "  return_normalized " << format_double(s.mean_return_normalized) << "  collision_rate "
      << format_double(s.collision_rate) << "  mean_speed " << format_double(s.mean_speed)
      << "  mean_distance " << format_double(s.mean_distance) << '\n';
}

// Collects per-tick rows for one policy step; reward and done are only known
// once the step completes.
class TraceCollector : public TickObserver {
 public:
  void on_tick(const WorldState& world, MetaAction action) override {
    pending_.push_back(trace_rows(world, action_index(action), 0.0, false));
  }

  void finish_step(double reward, bool done, std::ostream& out) {
    for (std::size_t t = 0; t < pending_.size(); ++t) {
      for (auto& row : pending_[t]) {
        row.reward = reward;
        row.done = done && t + 1 == pending_.size();
        out << trace_line(row) << '\n';
      }
    }
    pending_.clear();
  }

 private:
  std::vector<std::vector<TraceRecord>> pending_;
};

}  // namespace

int cmd_train(const TrainArgs& args, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = resolve_config(args.config);
    if (cfg.agent.algorithm == Algorithm::kTabular)
      throw ConfigError("agent.algorithm = tabular is not trainable on the highway");
    ensure_directory(args.out);
    write_text(args.out / "config.echo", echo_config(cfg));
    const fs::path ckpt_dir = args.out / "checkpoints";
    ensure_directory(ckpt_dir);

    TrainingOptions opts;
    opts.episodes = cfg.train.episodes;
    opts.checkpoint_every = cfg.io.checkpoint_every;
    opts.on_checkpoint = [&](int episode, const QNetwork& net) {
      save_weights(net, ckpt_dir / checkpoint_name(episode));
    };
    opts.on_episode = [&](const EpisodeMetrics& m) {
      if ((m.episode + 1) % 50 == 0)
        log << "episode " << m.episode + 1 << " return " << format_double(m.ret) << " steps "
            << m.steps << (m.collision ? " collision" : "") << '\n';
    };

    const auto result = run_training(cfg.agent, cfg.env, args.seed, opts);
    save_metrics_csv(args.out / "metrics.csv", result.history);
    if (result.params) {
      if (cfg.io.checkpoint_every > 0 && opts.episodes % cfg.io.checkpoint_every != 0)
        save_weights(*result.params, ckpt_dir / checkpoint_name(opts.episodes));
      save_weights(*result.params, args.out / "final.w");
    }
    print_summary(log, aggregate(result.history));
    log << "wrote " << (args.out / "metrics.csv").string() << '\n';
    return kExitOk;
  });
}

int cmd_eval(const EvalArgs& args, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = resolve_config(args.config);
    const Policy policy = policy_for(cfg, args.weights);
    const int episodes = args.episodes.value_or(cfg.train.eval_episodes);
    if (episodes < 0) throw ConfigError("--episodes must be >= 0");
    const auto result = evaluate(policy, cfg.env, episodes, args.seed, cfg.io.workers);
    print_summary(log, result.summary);
    if (args.out) {
      if (args.out->has_parent_path()) ensure_directory(args.out->parent_path());
      std::ostringstream csv;
      const auto& s = result.summary;
      csv << "episodes,return,return_normalized,collision,mean_speed,distance\n"
          << s.episodes << ',' << format_double(s.mean_return) << ','
          << format_double(s.mean_return_normalized) << ',' << format_double(s.collision_rate)
          << ',' << format_double(s.mean_speed) << ',' << format_double(s.mean_distance) << '\n';
      write_text(*args.out, csv.str());
    }
    return kExitOk;
  });
}

int cmd_rollout(const RolloutArgs& args, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    RunConfig cfg = resolve_config(args.config);
    Policy policy = Policy::reference();
    if (args.policy != "reference") {
      if (cfg.agent.algorithm == Algorithm::kReference || cfg.agent.algorithm == Algorithm::kTabular)
        cfg.agent.algorithm = load_weights(args.policy).algorithm();
      policy = Policy::greedy(load_policy_network(args.policy, cfg));
    }

    if (args.trace.has_parent_path()) ensure_directory(args.trace.parent_path());
    std::ofstream trace(args.trace, std::ios::binary | std::ios::trunc);
    if (!trace) throw IoError("cannot write trace file '" + args.trace.string() + "'");

    HighwayEnv env(cfg.env);
    TraceCollector collector;
    env.set_tick_observer(&collector);
    auto obs = env.reset(derive_seed(args.seed, seed_stream::kEvalEpisode, 0));
    std::vector<int> actions;
    double ret = 0.0;
    while (!env.done()) {
      StepResult res;
      if (policy.is_reference()) {
        res = env.step_reference();
      } else {
        res = env.step(action_from_slot(argmax_action(policy.network->q_values(obs))));
      }
      collector.finish_step(res.reward, res.done, trace);
      actions.push_back(action_index(res.realized));
      ret += res.reward;
      obs = std::move(res.observation);
    }
    if (!trace) throw IoError("failed writing trace file '" + args.trace.string() + "'");

    std::ostringstream seq;
    seq << "step,action\n";
    for (std::size_t i = 0; i < actions.size(); ++i) seq << i + 1 << ',' << actions[i] << '\n';
    write_text(args.trace.string() + ".actions.csv", seq.str());

    const auto cause = env.world().terminated;
    log << "rollout: " << actions.size() << " policy steps, " << env.world().tick
        << " ticks, return " << format_double(ret) << ", ended by "
        << (cause ? to_string(*cause) : std::string_view("none")) << '\n';
    return kExitOk;
  });
}

int cmd_compare(const CompareArgs& args, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = resolve_config(args.config);
    if (args.seeds.empty()) throw ConfigError("--seeds needs at least one seed");
    ensure_directory(args.out);
    write_text(args.out / "config.echo", echo_config(cfg));

    struct Job {
      std::uint64_t seed;
      Algorithm algorithm;
    };
    std::vector<Job> jobs;
    for (auto seed : args.seeds)
      for (auto alg : {Algorithm::kReference, Algorithm::kDqn, Algorithm::kDdqn}) jobs.push_back({seed, alg});

    auto run_job = [&cfg](const Job& job) {
      AgentConfig agent = cfg.agent;
      agent.algorithm = job.algorithm;
      TrainingOptions opts;
      opts.episodes = cfg.train.episodes;
      opts.checkpoint_every = 0;
      auto trained = run_training(agent, cfg.env, job.seed, opts);
      const Policy policy = trained.params ? Policy::greedy(*trained.params) : Policy::reference();
      auto eval = evaluate(policy, cfg.env, cfg.train.eval_episodes, job.seed);
      return std::pair{std::move(trained.history), eval.summary};
    };

    std::vector<std::pair<std::vector<EpisodeMetrics>, AggregateMetrics>> results(jobs.size());
    const std::size_t workers = static_cast<std::size_t>(cfg.io.workers);
    for (std::size_t start = 0; start < jobs.size(); start += workers) {
      std::vector<std::future<std::pair<std::vector<EpisodeMetrics>, AggregateMetrics>>> batch;
      const std::size_t stop = std::min(jobs.size(), start + workers);
      for (std::size_t i = start; i < stop; ++i)
        batch.push_back(std::async(workers > 1 ? std::launch::async : std::launch::deferred,
                                   run_job, jobs[i]));
      for (std::size_t i = start; i < stop; ++i) results[i] = batch[i - start].get();
    }

    std::ostringstream csv;
    csv << kCompareHeader << '\n';
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      const auto& [history, eval] = results[i];
      const fs::path run_dir = args.out / (std::string(to_string(jobs[i].algorithm)) + "-seed" +
                                           std::to_string(jobs[i].seed));
      ensure_directory(run_dir);
      save_metrics_csv(run_dir / "metrics.csv", history);

      const std::size_t n = history.size();
      const std::size_t window =
          n == 0 ? 0 : std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(cfg.train.final_window * n)), 1, n);
      const auto tail = aggregate(std::span(history).subspan(n - window));
      csv << jobs[i].seed << ',' << to_string(jobs[i].algorithm) << ',' << format_double(tail.mean_return)
          << ',' << format_double(tail.mean_return_normalized) << ',' << format_double(tail.collision_rate)
          << ',' << format_double(tail.mean_speed) << ',' << format_double(tail.mean_distance) << ','
          << format_double(eval.mean_return) << ',' << format_double(eval.collision_rate) << ','
          << format_double(eval.mean_speed) << ',' << format_double(eval.mean_distance) << '\n';
      log << "seed " << jobs[i].seed << ' ' << to_string(jobs[i].algorithm) << ": final-window return "
          << format_double(tail.mean_return) << ", eval collision rate "
          << format_double(eval.collision_rate) << '\n';
    }
    write_text(args.out / "compare.csv", csv.str());
    return kExitOk;
  });
}

}  // namespace overtake
