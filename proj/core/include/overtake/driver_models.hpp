#pragma once

#include <optional>

#include "overtake/world.hpp"

namespace overtake {

enum class GapFormula {
  kStandard,  // d0 + max(0, v*T + v*dv / (2 sqrt(a b)))
  kRelative,  // d0 + T*dv + v*dv / (2 sqrt(a b))
};

struct IdmParams {
  double a_max = 6.0;
  double delta = 4.0;
  double time_gap = 1.5;
  double b = 5.0;  // comfortable deceleration, positive magnitude
  double d0 = 10.0;
  double v_tar = 30.0;
  GapFormula formula = GapFormula::kStandard;

  void validate() const;
  friend bool operator==(const IdmParams&, const IdmParams&) = default;
};

struct MobilParams {
  double politeness = 0.001;
  double b_safe = 2.0;
  double a_th = 0.2;

  void validate() const;
  friend bool operator==(const MobilParams&, const MobilParams&) = default;
};

struct ControlGains {
  double k_p = 5.0 / 3.0;
  double k_p_lat = 1.0;
  double k_p_heading = 2.0;
  double v_floor = 1.0;  // m/s, keeps the heading target finite at standstill

  void validate() const;
  friend bool operator==(const ControlGains&, const ControlGains&) = default;
};

// Longitudinal command bound of the lower-level controller, m/s^2.
inline constexpr double kMaxControlAccel = 5.0;

enum class LaneChoice { kKeep, kLeft, kRight };

struct LaneChangeDecision {
  LaneChoice choice = LaneChoice::kKeep;
  double incentive_gain = 0.0;
};

// Lane offset for a choice: left moves toward lane 1.
constexpr int lane_offset(LaneChoice c) {
  return c == LaneChoice::kLeft ? -1 : (c == LaneChoice::kRight ? 1 : 0);
}

// dv is the approach rate v - v_leader.
double desired_gap(double v, double dv, const IdmParams& p);

// gap is the bumper-to-bumper distance to the leader, or nullopt on a free road.
// Throws InvalidInputError if a leader exists with gap <= 0.
double idm_acceleration(double v, double dv, std::optional<double> gap, const IdmParams& p);

bool mobil_safety(double a_new_follower, const MobilParams& p);

struct MobilIncentive {
  bool accepted = false;
  double gain = 0.0;
};

// Follower accelerations are nullopt when the follower does not exist.
MobilIncentive mobil_incentive(double ego_new, double ego_old, std::optional<double> i_new,
                               std::optional<double> i_old, std::optional<double> j_new,
                               std::optional<double> j_old, const MobilParams& p);

double longitudinal_control(double v_tar, double v, const ControlGains& g);

// Returns the yaw-rate command; the result keeps heading + yaw_rate * dt within
// +-pi/4 for the given dt.
double lateral_control(double y, double target_lane_center, double heading, double v,
                       const ControlGains& g, double dt = 0.05);

// --- World-level queries ---------------------------------------------------

// Lateral distance below which a vehicle counts as settled on its target lane.
inline constexpr double kLaneSettledTolerance = 0.5;

struct Neighbor {
  int index = -1;  // into WorldState::vehicles
  double gap = 0.0;  // bumper-to-bumper, may be <= 0 for overlapping vehicles
};

// Nearest vehicle ahead of / behind vehicles[self] occupying `lane`. A vehicle
// occupies both its current lane and its target lane. `skip` is excluded too.
std::optional<Neighbor> find_leader(const WorldState& world, int self, int lane, int skip = -1);
std::optional<Neighbor> find_follower(const WorldState& world, int self, int lane,
                                      int skip = -1);

// IDM acceleration of vehicles[self] following vehicles[leader] (or free road).
// Overlap (gap <= 0) yields nullopt.
std::optional<double> idm_following(const WorldState& world, int self,
                                    std::optional<Neighbor> leader, const IdmParams& p);

LaneChangeDecision mobil_decision(const WorldState& world, int vehicle_id, const IdmParams& idm,
                                  const MobilParams& mobil);

struct DriverParams {
  IdmParams idm;
  MobilParams mobil;
  ControlGains gains;

  friend bool operator==(const DriverParams&, const DriverParams&) = default;
};

struct ReferenceCommand {
  double a1 = 0.0;
  double yaw_rate = 0.0;
  int target_lane = 1;
  LaneChoice decision = LaneChoice::kKeep;
};

// IDM + MOBIL upper level feeding the lateral controller. The IDM desired speed
// is the vehicle's target_speed. MOBIL runs only when `decide_lane` is set;
// otherwise the vehicle keeps its current target lane.
ReferenceCommand reference_policy(const WorldState& world, int vehicle_id,
                                  const DriverParams& params, bool decide_lane = true);

}  // namespace overtake
