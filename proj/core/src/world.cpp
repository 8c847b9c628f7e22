#include "overtake/world.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include <json.hpp>

#include "overtake/error.hpp"

namespace overtake {

std::string_view to_string(Role role) {
  return role == Role::kEgo ? "ego" : "surrounding";
}

std::string_view to_string(Termination cause) {
  switch (cause) {
    case Termination::kCollision: return "collision";
    case Termination::kHorizon: return "horizon";
    case Termination::kDestination: return "destination";
  }
  return "unknown";
}

void RoadConfig::validate() const {
  if (lane_count < 2) throw ConfigError("road: lane_count must be >= 2");
  if (!(lane_width > kVehicleWidth))
    throw ConfigError("road: lane_width must exceed the vehicle width");
}

int RoadConfig::nearest_lane(double y) const {
  const int lane = static_cast<int>(std::lround(y / lane_width)) + 1;
  return std::clamp(lane, 1, lane_count);
}

void ScenarioConfig::validate() const {
  if (vehicles_per_lane < 0) throw ConfigError("scenario: vehicles_per_lane must be >= 0");
  auto check_range = [](double lo, double hi, const char* what) {
    if (!(lo >= 0.0 && hi <= kMaxSpeed && lo <= hi))
      throw ConfigError(std::string("scenario: ") + what + " must satisfy 0 <= min <= max <= 40");
  };
  check_range(ego_speed_min, ego_speed_max, "ego speed range");
  check_range(surrounding_speed_min, surrounding_speed_max, "surrounding speed range");
  if (!(spacing_min > kVehicleLength))
    throw ConfigError("scenario: spacing_min must exceed the vehicle length");
  if (!(spacing_max >= spacing_min)) throw ConfigError("scenario: spacing_max < spacing_min");
}

int WorldState::index_of(int vehicle_id) const {
  for (std::size_t i = 0; i < vehicles.size(); ++i)
    if (vehicles[i].id == vehicle_id) return static_cast<int>(i);
  return -1;
}

VehicleState step_kinematics(const VehicleState& s, double a1, double yaw_rate, double dt) {
  if (!std::isfinite(a1) || !std::isfinite(yaw_rate) || !std::isfinite(dt))
    throw InvalidInputError("step_kinematics: non-finite input");
  if (!(dt > 0.0)) throw InvalidInputError("step_kinematics: dt must be positive");

  VehicleState n = s;
  n.v1 = std::clamp(s.v1 + a1 * dt, 0.0, kMaxSpeed);
  // When the speed saturates, the realized acceleration is what moves the car.
  const double a_long = (n.v1 - s.v1) / dt;
  n.x = s.x + s.v1 * dt + 0.5 * a_long * dt * dt;

  n.heading = std::clamp(s.heading + yaw_rate * dt, -kMaxHeading, kMaxHeading);
  n.v2 = n.v1 * std::sin(n.heading);
  const double a_lat = (n.v2 - s.v2) / dt;
  n.y = s.y + s.v2 * dt + 0.5 * a_lat * dt * dt;
  return n;
}

namespace {

using Vec2 = std::array<double, 2>;

std::array<Vec2, 4> corners(const VehicleState& v) {
  const double c = std::cos(v.heading), s = std::sin(v.heading);
  const double hl = 0.5 * v.length, hw = 0.5 * v.width;
  std::array<Vec2, 4> out;
  const double sx[4] = {hl, hl, -hl, -hl};
  const double sy[4] = {hw, -hw, -hw, hw};
  for (int i = 0; i < 4; ++i)
    out[i] = {v.x + c * sx[i] - s * sy[i], v.y + s * sx[i] + c * sy[i]};
  return out;
}

bool separated_on(const Vec2& axis, const std::array<Vec2, 4>& a, const std::array<Vec2, 4>& b) {
  auto project = [&](const std::array<Vec2, 4>& pts) {
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& p : pts) {
      const double d = p[0] * axis[0] + p[1] * axis[1];
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    return std::pair{lo, hi};
  };
  const auto [alo, ahi] = project(a);
  const auto [blo, bhi] = project(b);
  return ahi < blo || bhi < alo;
}

}  // namespace

bool detect_collision(const VehicleState& a, const VehicleState& b) {
  // Bounding circles rule out distant pairs cheaply.
  const double dx = a.x - b.x, dy = a.y - b.y;
  const double ra = 0.5 * std::hypot(a.length, a.width);
  const double rb = 0.5 * std::hypot(b.length, b.width);
  if (dx * dx + dy * dy > (ra + rb) * (ra + rb)) return false;

  const auto ca = corners(a);
  const auto cb = corners(b);
  const Vec2 axes[4] = {{std::cos(a.heading), std::sin(a.heading)},
                        {-std::sin(a.heading), std::cos(a.heading)},
                        {std::cos(b.heading), std::sin(b.heading)},
                        {-std::sin(b.heading), std::cos(b.heading)}};
  for (const auto& axis : axes)
    if (separated_on(axis, ca, cb)) return false;
  return true;
}

WorldState spawn_scenario(const RoadConfig& road, const ScenarioConfig& cfg, int sim_hz) {
  road.validate();
  cfg.validate();
  if (sim_hz <= 0) throw ConfigError("spawn_scenario: sim_hz must be positive");

  WorldState w;
  w.road = road;
  w.sim_hz = sim_hz;
  w.seed = cfg.seed;
  w.rng = Rng(cfg.seed);

  const int ego_lane = (road.lane_count + 1) / 2;
  VehicleState ego;
  ego.id = 0;
  ego.role = Role::kEgo;
  ego.x = 0.0;
  ego.lane = ego.target_lane = ego_lane;
  ego.y = road.lane_center(ego_lane);
  ego.v1 = w.rng.uniform(cfg.ego_speed_min, cfg.ego_speed_max);
  ego.target_speed = ego.v1;
  w.vehicles.push_back(ego);

  int next_id = 1;
  for (int lane = 1; lane <= road.lane_count; ++lane) {
    double x = ego.x;
    for (int k = 0; k < cfg.vehicles_per_lane; ++k) {
      x += w.rng.uniform(cfg.spacing_min, cfg.spacing_max);
      VehicleState v;
      v.id = next_id++;
      v.role = Role::kSurrounding;
      v.x = x;
      v.lane = v.target_lane = lane;
      v.y = road.lane_center(lane);
      v.v1 = w.rng.uniform(cfg.surrounding_speed_min, cfg.surrounding_speed_max);
      v.target_speed = v.v1;
      w.vehicles.push_back(v);
    }
  }
  return w;
}

std::string world_to_json(const WorldState& world) {
  nlohmann::ordered_json j;
  j["tick"] = world.tick;
  j["time"] = world.time;
  j["seed"] = world.seed;
  j["sim_hz"] = world.sim_hz;
  j["lane_count"] = world.road.lane_count;
  j["lane_width"] = world.road.lane_width;
  j["terminated"] = world.terminated ? nlohmann::ordered_json(to_string(*world.terminated))
                                     : nlohmann::ordered_json(nullptr);
  auto& arr = j["vehicles"] = nlohmann::ordered_json::array();
  for (const auto& v : world.vehicles) {
    arr.push_back({{"id", v.id},
                   {"role", to_string(v.role)},
                   {"x", v.x},
                   {"y", v.y},
                   {"v1", v.v1},
                   {"v2", v.v2},
                   {"heading", v.heading},
                   {"lane", v.lane},
                   {"length", v.length},
                   {"width", v.width},
                   {"target_lane", v.target_lane},
                   {"target_speed", v.target_speed}});
  }
  j["rng_state"] = world.rng.state();
  return j.dump();
}

}  // namespace overtake
