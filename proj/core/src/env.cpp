#include "overtake/env.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "overtake/error.hpp"

namespace overtake {

MetaAction action_from_index(int index) {
  if (index < 1 || index > kActionCount)
    throw InvalidInputError("meta-action index must be in 1..5, got " + std::to_string(index));
  return static_cast<MetaAction>(index);
}

MetaAction action_from_slot(int slot) { return action_from_index(slot + 1); }

void RewardParams::validate() const {
  if (!(w_collision >= 0.0 && w_speed >= 0.0 && w_lane >= 0.0))
    throw ConfigError("reward: weights must be >= 0");
  if (!(v_max > 0.0 && v_max <= kMaxSpeed)) throw ConfigError("reward: v_max must be in (0, 40]");
}

void EnvConfig::validate() const {
  if (policy_hz <= 0 || sim_hz <= 0) throw ConfigError("env: frequencies must be positive");
  if (sim_hz % policy_hz != 0) throw ConfigError("env: sim_hz must be divisible by policy_hz");
  const double steps = horizon_s * policy_hz;
  if (!(horizon_s > 0.0) || std::abs(steps - std::round(steps)) > 1e-9)
    throw ConfigError("env: horizon_s * policy_hz must be a positive integer");
  if (!(speed_step > 0.0)) throw ConfigError("env: speed_step must be positive");
  if (neighbors_k < 0) throw ConfigError("env: neighbors_k must be >= 0");
  if (!(destination_m >= 0.0)) throw ConfigError("env: destination_m must be >= 0");
  if (!(reference_speed > 0.0 && reference_speed <= kMaxSpeed))
    throw ConfigError("env: reference_speed must be in (0, 40]");
  scenario.validate();
  road.validate();
  reward.validate();
  if (reward.preferred_lane < 1 || reward.preferred_lane > road.lane_count)
    throw ConfigError("reward: preferred_lane outside the road");
  driver.idm.validate();
  driver.mobil.validate();
  driver.gains.validate();
}

int EnvConfig::max_steps() const { return static_cast<int>(std::lround(horizon_s * policy_hz)); }

Observation observe(const WorldState& world, const EnvConfig& cfg) {
  const auto& ego = world.ego();
  const auto& road = world.road;
  const double lane_span = road.lane_count - 1;

  Observation obs;
  obs.reserve(cfg.observation_size());
  obs.push_back(ego.v1 / kMaxSpeed);
  obs.push_back((ego.lane - 1) / lane_span);
  obs.push_back((ego.y - road.lane_center(ego.lane)) / road.lane_width);

  std::vector<const VehicleState*> others;
  others.reserve(world.vehicles.size());
  for (const auto& v : world.vehicles)
    if (v.role != Role::kEgo) others.push_back(&v);
  const auto nearer = [&](const VehicleState* a, const VehicleState* b) {
    const double da = std::abs(a->x - ego.x), db = std::abs(b->x - ego.x);
    return da != db ? da < db : a->id < b->id;
  };
  const std::size_t k = std::min<std::size_t>(cfg.neighbors_k, others.size());
  std::partial_sort(others.begin(), others.begin() + k, others.end(), nearer);

  for (int i = 0; i < cfg.neighbors_k; ++i) {
    if (static_cast<std::size_t>(i) >= k) {
      obs.insert(obs.end(), {0.0, 0.0, 0.0, 0.0});
      continue;
    }
    const auto& o = *others[i];
    double dd = o.x - ego.x;
    double dv = o.v1 - ego.v1;
    if (!cfg.obs_signed) {
      dd = std::abs(dd);
      dv = std::abs(dv);
    }
    obs.insert(obs.end(), {1.0, dd / 100.0, dv / kMaxSpeed, (o.lane - ego.lane) / lane_span});
  }
  return obs;
}

double reward(const WorldState& world_after, const StepEvents& events, const RewardParams& p) {
  const auto& ego = world_after.ego();
  const double collision = events.ego_collision ? 1.0 : 0.0;
  const double dv = ego.v1 - p.v_max;
  const double dl = ego.lane - p.preferred_lane;
  return -p.w_collision * collision - p.w_speed * dv * dv - p.w_lane * dl * dl;
}

double discounted_return(std::span<const double> rewards, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw InvalidInputError("discounted_return: gamma outside [0, 1]");
  double total = 0.0, weight = 1.0;
  for (double r : rewards) {
    total += weight * r;
    weight *= gamma;
  }
  return total;
}

HighwayEnv::HighwayEnv(EnvConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  sim_.driver = cfg_.driver;
  sim_.lane_decision_period = cfg_.ticks_per_step();
}

Observation HighwayEnv::reset(std::uint64_t seed) {
  ScenarioConfig sc = cfg_.scenario;
  sc.seed = seed;
  return reset(spawn_scenario(cfg_.road, sc, cfg_.sim_hz));
}

Observation HighwayEnv::reset(WorldState world) {
  if (world.vehicles.empty() || world.vehicles.front().role != Role::kEgo)
    throw StateError("reset: world has no ego vehicle");
  world_ = std::move(world);
  done_ = world_.terminated.has_value();
  steps_ = 0;
  start_x_ = world_.ego().x;
  distance_ = 0.0;
  return observe(world_, cfg_);
}

template <typename ControlFn>
StepResult HighwayEnv::run_ticks(MetaAction realized, ControlFn&& controls) {
  StepEvents step_events;
  const int ticks = cfg_.ticks_per_step();
  for (int t = 0; t < ticks; ++t) {
    const double x_before = world_.ego().x;
    const EgoControls c = controls(t);
    const auto events = advance_world(world_, c, sim_);
    distance_ += world_.ego().x - x_before;
    if (events.ego_collision) step_events.ego_collision = true;
    step_events.collisions.insert(step_events.collisions.end(), events.collisions.begin(),
                                  events.collisions.end());
    if (observer_) observer_->on_tick(world_, realized);
    if (world_.terminated) break;
  }
  ++steps_;

  StepResult res;
  res.realized = realized;
  res.reward = reward(world_, step_events, cfg_.reward);
  res.info.collision = step_events.ego_collision;
  res.info.ego_speed = world_.ego().v1;
  res.info.ego_lane = world_.ego().lane;
  res.info.distance = distance_;
  if (step_events.ego_collision) {
    res.info.cause = Termination::kCollision;
  } else if (cfg_.destination_m > 0.0 && distance_ >= cfg_.destination_m) {
    res.info.cause = Termination::kDestination;
  } else if (steps_ >= cfg_.max_steps()) {
    res.info.cause = Termination::kHorizon;
  }
  if (res.info.cause && !world_.terminated) world_.terminated = res.info.cause;
  done_ = res.info.cause.has_value();
  res.done = done_;
  res.observation = observe(world_, cfg_);
  return res;
}

StepResult HighwayEnv::step(MetaAction action) {
  if (done_) throw StateError("env_step: episode has finished; call reset");
  auto& ego = world_.ego();
  MetaAction realized = action;
  switch (action) {
    case MetaAction::kFaster:
      ego.target_speed = std::min(ego.target_speed + cfg_.speed_step, kMaxSpeed);
      break;
    case MetaAction::kSlower:
      ego.target_speed = std::max(ego.target_speed - cfg_.speed_step, 0.0);
      break;
    case MetaAction::kLaneLeft:
    case MetaAction::kLaneRight: {
      const int lane = ego.target_lane + (action == MetaAction::kLaneLeft ? -1 : 1);
      if (lane < 1 || lane > world_.road.lane_count)
        realized = MetaAction::kIdle;
      else
        ego.target_lane = lane;
      break;
    }
    case MetaAction::kIdle:
      break;
  }

  const auto& gains = cfg_.driver.gains;
  return run_ticks(realized, [&](int) {
    const auto& e = world_.ego();
    return EgoControls{longitudinal_control(e.target_speed, e.v1, gains),
                       lateral_control(e.y, world_.road.lane_center(e.target_lane), e.heading,
                                       e.v1, gains, world_.dt())};
  });
}

StepResult HighwayEnv::step_reference() {
  if (done_) throw StateError("env_step: episode has finished; call reset");
  world_.ego().target_speed = cfg_.reference_speed;

  const auto first = reference_policy(world_, world_.ego().id, cfg_.driver, true);
  MetaAction realized = MetaAction::kIdle;
  if (first.decision == LaneChoice::kLeft)
    realized = MetaAction::kLaneLeft;
  else if (first.decision == LaneChoice::kRight)
    realized = MetaAction::kLaneRight;
  else if (first.a1 > 0.5)
    realized = MetaAction::kFaster;
  else if (first.a1 < -0.5)
    realized = MetaAction::kSlower;

  return run_ticks(realized, [&](int t) {
    const auto cmd = t == 0 ? first : reference_policy(world_, world_.ego().id, cfg_.driver, false);
    world_.ego().target_lane = cmd.target_lane;
    return EgoControls{std::clamp(cmd.a1, -kMaxControlAccel, kMaxControlAccel), cmd.yaw_rate};
  });
}

}  // namespace overtake
