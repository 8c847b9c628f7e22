#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "overtake/rng.hpp"

namespace overtake {

inline constexpr double kMaxSpeed = 40.0;      // m/s, all vehicles
inline constexpr double kMaxHeading = 0.78539816339744830962;  // pi/4 rad
inline constexpr double kVehicleLength = 5.0;  // m
inline constexpr double kVehicleWidth = 2.0;   // m

enum class Role { kEgo, kSurrounding };

std::string_view to_string(Role role);

struct VehicleState {
  int id = 0;
  Role role = Role::kSurrounding;
  double x = 0.0;        // longitudinal position, m
  double y = 0.0;        // lateral position, m; 0 is the center of lane 1
  double v1 = 0.0;       // longitudinal speed, m/s
  double v2 = 0.0;       // lateral speed, m/s
  double heading = 0.0;  // rad
  int lane = 1;
  double length = kVehicleLength;
  double width = kVehicleWidth;
  // Upper-level targets tracked by the lower-level controllers.
  int target_lane = 1;
  double target_speed = 0.0;

  friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

struct RoadConfig {
  int lane_count = 3;
  double lane_width = 4.0;

  void validate() const;

  double lane_center(int lane) const { return (lane - 1) * lane_width; }
  // Nearest lane index to a lateral position, clamped to the road.
  int nearest_lane(double y) const;
  double y_min() const { return -0.5 * lane_width; }
  double y_max() const { return lane_center(lane_count) + 0.5 * lane_width; }

  friend bool operator==(const RoadConfig&, const RoadConfig&) = default;
};

struct ScenarioConfig {
  int vehicles_per_lane = 10;
  double ego_speed_min = 23.0;
  double ego_speed_max = 25.0;
  double surrounding_speed_min = 20.0;
  double surrounding_speed_max = 23.0;
  // Center-to-center spacing between consecutive vehicles in a lane.
  double spacing_min = 25.0;
  double spacing_max = 60.0;
  std::uint64_t seed = 0;

  void validate() const;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

enum class Termination { kCollision, kHorizon, kDestination };

std::string_view to_string(Termination cause);

struct WorldState {
  RoadConfig road;
  int sim_hz = 20;
  std::int64_t tick = 0;
  double time = 0.0;
  std::uint64_t seed = 0;
  // vehicles[0] is always the ego vehicle.
  std::vector<VehicleState> vehicles;
  Rng rng;
  std::optional<Termination> terminated;

  double dt() const { return 1.0 / sim_hz; }
  const VehicleState& ego() const { return vehicles.front(); }
  VehicleState& ego() { return vehicles.front(); }
  // Index into vehicles, or -1.
  int index_of(int vehicle_id) const;
};

struct StepEvents {
  bool ego_collision = false;
  std::vector<std::pair<int, int>> collisions;  // vehicle id pairs, first < second
};

// Exact constant-acceleration update over one interval. `yaw_rate` drives the
// heading; the lateral speed follows v2 = v1 * sin(heading).
VehicleState step_kinematics(const VehicleState& state, double a1, double yaw_rate,
                             double dt);

// Separating-axis test on the two oriented rectangles.
bool detect_collision(const VehicleState& a, const VehicleState& b);

WorldState spawn_scenario(const RoadConfig& road, const ScenarioConfig& cfg,
                          int sim_hz = 20);

// Compact JSON snapshot (all vehicle fields, tick, time, seed, rng state).
std::string world_to_json(const WorldState& world);

}  // namespace overtake
