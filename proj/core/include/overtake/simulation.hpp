#pragma once

#include "overtake/driver_models.hpp"
#include "overtake/world.hpp"

namespace overtake {

struct EgoControls {
  double a1 = 0.0;
  double yaw_rate = 0.0;
};

struct SimParams {
  DriverParams driver;
  // Surrounding vehicles re-run MOBIL every this many ticks (sim_hz / policy_hz).
  int lane_decision_period = 20;
};

// One simulation tick of 1/sim_hz seconds. Surrounding vehicles follow the
// reference stack; the ego applies `ego`. Every overlapping pair is reported;
// an ego collision marks the world terminated. Throws StateError when the world
// has already terminated.
StepEvents advance_world(WorldState& world, const EgoControls& ego, const SimParams& params);

// Every overlapping vehicle pair in the current state.
StepEvents detect_all_collisions(const WorldState& world);

}  // namespace overtake
