#include <benchmark/benchmark.h>

#include "overtake/agents.hpp"
#include "overtake/env.hpp"
#include "overtake/q_network.hpp"
#include "overtake/simulation.hpp"
#include "overtake/world.hpp"

using namespace overtake;

namespace {

Eigen::MatrixXd random_batch(int rows, int cols, Rng& rng) {
  Eigen::MatrixXd x(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) x(r, c) = rng.uniform(-1, 1);
  return x;
}

QNetwork make_net(bool dueling, Rng& rng) {
  const int in = EnvConfig{}.observation_size();
  return dueling ? QNetwork::make_dueling(in, 128, kActionCount, rng)
                 : QNetwork::make_dqn(in, 128, kActionCount, rng);
}

void BM_Forward(benchmark::State& state) {
  Rng rng(1);
  const auto net = make_net(state.range(0) != 0, rng);
  const auto x = random_batch(net.input_dim(), static_cast<int>(state.range(1)), rng);
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(x));
  state.SetItemsProcessed(state.iterations() * state.range(1));
}
BENCHMARK(BM_Forward)->ArgsProduct({{0, 1}, {1, 32}});

void BM_ForwardBackward(benchmark::State& state) {
  Rng rng(2);
  const auto net = make_net(state.range(0) != 0, rng);
  const auto x = random_batch(net.input_dim(), 32, rng);
  const Eigen::MatrixXd up = Eigen::MatrixXd::Ones(kActionCount, 32);
  for (auto _ : state) {
    QCache cache;
    net.forward(x, &cache);
    benchmark::DoNotOptimize(net.backward(cache, up));
  }
}
BENCHMARK(BM_ForwardBackward)->Arg(0)->Arg(1);

void BM_TrainStep(benchmark::State& state) {
  AgentConfig cfg;
  cfg.algorithm = state.range(0) != 0 ? Algorithm::kDdqn : Algorithm::kDqn;
  const int in = EnvConfig{}.observation_size();
  DqnAgent agent(cfg, in, 3);
  Rng rng(4);
  std::vector<Transition> batch(cfg.batch);
  for (auto& t : batch) {
    t.s.resize(in);
    t.s_next.resize(in);
    for (int i = 0; i < in; ++i) {
      t.s[i] = rng.uniform(-1, 1);
      t.s_next[i] = rng.uniform(-1, 1);
    }
    t.a = static_cast<int>(rng.below(kActionCount));
    t.r = -rng.uniform(0, 1);
  }
  for (auto _ : state) benchmark::DoNotOptimize(agent.train_step(batch));
}
BENCHMARK(BM_TrainStep)->Arg(0)->Arg(1);

void BM_AdvanceWorld(benchmark::State& state) {
  EnvConfig env;
  env.scenario.vehicles_per_lane = static_cast<int>(state.range(0));
  const SimParams params{env.driver, env.sim_hz / env.policy_hz};
  WorldState world = spawn_scenario(env.road, env.scenario, env.sim_hz);
  for (auto _ : state) {
    if (world.terminated) {
      state.PauseTiming();
      world = spawn_scenario(env.road, env.scenario, env.sim_hz);
      state.ResumeTiming();
    }
    benchmark::DoNotOptimize(advance_world(world, EgoControls{}, params));
  }
}
BENCHMARK(BM_AdvanceWorld)->Arg(3)->Arg(10);

void BM_EnvStep(benchmark::State& state) {
  HighwayEnv env(EnvConfig{});
  std::uint64_t seed = 0;
  env.reset(seed);
  for (auto _ : state) {
    if (env.done()) {
      state.PauseTiming();
      env.reset(++seed);
      state.ResumeTiming();
    }
    benchmark::DoNotOptimize(env.step(MetaAction::kIdle));
  }
}
BENCHMARK(BM_EnvStep);

}  // namespace

BENCHMARK_MAIN();
