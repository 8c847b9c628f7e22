#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "overtake/simulation.hpp"
#include "overtake/world.hpp"

namespace overtake {

// The five discrete decisions, numbered 1..5.
enum class MetaAction : int {
  kLaneLeft = 1,
  kIdle = 2,
  kLaneRight = 3,
  kFaster = 4,
  kSlower = 5,
};

inline constexpr int kActionCount = 5;

constexpr int action_count() { return kActionCount; }

// 1-based index <-> action. Throws InvalidInputError outside 1..5.
MetaAction action_from_index(int index);
constexpr int action_index(MetaAction a) { return static_cast<int>(a); }
// 0-based network output slot.
constexpr int action_slot(MetaAction a) { return static_cast<int>(a) - 1; }
MetaAction action_from_slot(int slot);

using Observation = std::vector<double>;

struct RewardParams {
  double w_collision = 1.0;
  double w_speed = 0.1;
  double w_lane = 0.4;
  double v_max = 40.0;
  int preferred_lane = 1;

  void validate() const;
  friend bool operator==(const RewardParams&, const RewardParams&) = default;
};

struct EnvConfig {
  int policy_hz = 1;
  int sim_hz = 20;
  double horizon_s = 100.0;
  double speed_step = 5.0;
  int neighbors_k = 5;
  bool obs_signed = true;
  // Distance after which the episode ends as "destination reached"; 0 disables.
  double destination_m = 0.0;
  // Desired speed of the ego when driven by the reference stack.
  double reference_speed = 40.0;
  ScenarioConfig scenario;
  RoadConfig road;
  RewardParams reward;
  DriverParams driver;

  void validate() const;
  int ticks_per_step() const { return sim_hz / policy_hz; }
  int max_steps() const;
  int observation_size() const { return 3 + 4 * neighbors_k; }

  friend bool operator==(const EnvConfig&, const EnvConfig&) = default;
};

Observation observe(const WorldState& world, const EnvConfig& cfg);

double reward(const WorldState& world_after, const StepEvents& events, const RewardParams& p);

// sum_k gamma^k r_k
double discounted_return(std::span<const double> rewards, double gamma);

struct StepInfo {
  std::optional<Termination> cause;
  double ego_speed = 0.0;
  double distance = 0.0;  // ego longitudinal displacement since reset, m
  int ego_lane = 0;
  bool collision = false;
};

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
  // Action actually realized: the requested one, or IDLE for a clamped lane
  // change. For reference steps this is the meta-action that best describes the
  // command (lane change, then speeding up or slowing down, else idle).
  MetaAction realized = MetaAction::kIdle;
};

// Receives the world after every simulation tick of a policy step.
class TickObserver {
 public:
  virtual ~TickObserver() = default;
  virtual void on_tick(const WorldState& world, MetaAction action) = 0;
};

class HighwayEnv {
 public:
  explicit HighwayEnv(EnvConfig cfg);

  Observation reset(std::uint64_t seed);
  // Reset onto an externally built world (tests, scenario replay).
  Observation reset(WorldState world);

  StepResult step(MetaAction action);
  // Ego driven by IDM + MOBIL through the same lower-level controllers.
  StepResult step_reference();

  void set_tick_observer(TickObserver* observer) { observer_ = observer; }

  const WorldState& world() const { return world_; }
  const EnvConfig& config() const { return cfg_; }
  bool done() const { return done_; }
  int steps_taken() const { return steps_; }
  double distance() const { return distance_; }
  double start_x() const { return start_x_; }

 private:
  template <typename ControlFn>
  StepResult run_ticks(MetaAction realized, ControlFn&& controls);

  EnvConfig cfg_;
  SimParams sim_;
  WorldState world_;
  bool done_ = true;
  int steps_ = 0;
  double start_x_ = 0.0;
  double distance_ = 0.0;
  TickObserver* observer_ = nullptr;
};

}  // namespace overtake
