#include "overtake/simulation.hpp"

#include <algorithm>
#include <vector>

#include "overtake/error.hpp"

namespace overtake {

StepEvents detect_all_collisions(const WorldState& world) {
  StepEvents events;
  const auto& vs = world.vehicles;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    for (std::size_t j = i + 1; j < vs.size(); ++j) {
      if (!detect_collision(vs[i], vs[j])) continue;
      events.collisions.emplace_back(std::min(vs[i].id, vs[j].id), std::max(vs[i].id, vs[j].id));
      if (vs[i].role == Role::kEgo || vs[j].role == Role::kEgo) events.ego_collision = true;
    }
  }
  return events;
}

StepEvents advance_world(WorldState& world, const EgoControls& ego, const SimParams& params) {
  if (world.terminated) throw StateError("advance_world: world has terminated");
  if (world.vehicles.empty() || world.vehicles.front().role != Role::kEgo)
    throw StateError("advance_world: world has no ego vehicle");

  const double dt = world.dt();
  const bool decide = params.lane_decision_period > 0 &&
                      world.tick % params.lane_decision_period == 0;

  // All commands come from the same pre-tick snapshot.
  std::vector<EgoControls> controls(world.vehicles.size());
  std::vector<int> target_lanes(world.vehicles.size());
  controls[0] = ego;
  target_lanes[0] = world.vehicles[0].target_lane;
  for (std::size_t i = 1; i < world.vehicles.size(); ++i) {
    const auto cmd = reference_policy(world, world.vehicles[i].id, params.driver, decide);
    controls[i] = {cmd.a1, cmd.yaw_rate};
    target_lanes[i] = cmd.target_lane;
  }

  for (std::size_t i = 0; i < world.vehicles.size(); ++i) {
    auto next = step_kinematics(world.vehicles[i], controls[i].a1, controls[i].yaw_rate, dt);
    next.y = std::clamp(next.y, world.road.y_min(), world.road.y_max());
    next.lane = world.road.nearest_lane(next.y);
    next.target_lane = target_lanes[i];
    world.vehicles[i] = next;
  }

  ++world.tick;
  world.time = static_cast<double>(world.tick) / world.sim_hz;

  auto events = detect_all_collisions(world);
  if (events.ego_collision) world.terminated = Termination::kCollision;
  return events;
}

}  // namespace overtake
