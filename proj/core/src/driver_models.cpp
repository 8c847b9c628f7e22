#include "overtake/driver_models.hpp"

#include <algorithm>
#include <cmath>

#include "overtake/error.hpp"

namespace overtake {

void IdmParams::validate() const {
  if (!(a_max > 0.0)) throw ConfigError("idm: a_max must be positive");
  if (!(b > 0.0)) throw ConfigError("idm: b must be a positive magnitude");
  if (!(d0 > 0.0)) throw ConfigError("idm: d0 must be positive");
  if (!(time_gap >= 0.0)) throw ConfigError("idm: time_gap must be >= 0");
  if (!(delta > 0.0)) throw ConfigError("idm: delta must be positive");
  if (!(v_tar > 0.0 && v_tar <= kMaxSpeed)) throw ConfigError("idm: v_tar must be in (0, 40]");
}

void MobilParams::validate() const {
  if (!(politeness >= 0.0)) throw ConfigError("mobil: politeness must be >= 0");
  if (!(b_safe > 0.0)) throw ConfigError("mobil: b_safe must be positive");
  if (!(a_th >= 0.0)) throw ConfigError("mobil: a_th must be >= 0");
}

void ControlGains::validate() const {
  if (!(k_p > 0.0 && k_p_lat > 0.0 && k_p_heading > 0.0))
    throw ConfigError("gains: all gains must be positive");
  if (!(v_floor > 0.0)) throw ConfigError("gains: v_floor must be positive");
}

double desired_gap(double v, double dv, const IdmParams& p) {
  const double braking = v * dv / (2.0 * std::sqrt(p.a_max * p.b));
  if (p.formula == GapFormula::kRelative) return p.d0 + p.time_gap * dv + braking;
  return p.d0 + std::max(0.0, v * p.time_gap + braking);
}

double idm_acceleration(double v, double dv, std::optional<double> gap, const IdmParams& p) {
  double a = 1.0 - std::pow(v / p.v_tar, p.delta);
  if (gap) {
    if (!(*gap > 0.0)) throw InvalidInputError("idm_acceleration: gap must be positive");
    const double ratio = desired_gap(v, dv, p) / *gap;
    a -= ratio * ratio;
  }
  return std::clamp(p.a_max * a, -p.a_max, p.a_max);
}

bool mobil_safety(double a_new_follower, const MobilParams& p) {
  return a_new_follower >= -p.b_safe;
}

MobilIncentive mobil_incentive(double ego_new, double ego_old, std::optional<double> i_new,
                               std::optional<double> i_old, std::optional<double> j_new,
                               std::optional<double> j_old, const MobilParams& p) {
  const double di = (i_new && i_old) ? *i_new - *i_old : 0.0;
  const double dj = (j_new && j_old) ? *j_new - *j_old : 0.0;
  const double gain = (ego_new - ego_old) + p.politeness * (di + dj);
  return {gain > p.a_th, gain};
}

double longitudinal_control(double v_tar, double v, const ControlGains& g) {
  return std::clamp(g.k_p * (v_tar - v), -kMaxControlAccel, kMaxControlAccel);
}

double lateral_control(double y, double target_lane_center, double heading, double v,
                       const ControlGains& g, double dt) {
  const double v_lat = -g.k_p_lat * (y - target_lane_center);
  const double heading_target =
      std::asin(std::clamp(v_lat / std::max(v, g.v_floor), -1.0, 1.0));
  const double yaw_rate = g.k_p_heading * (heading_target - heading);
  return std::clamp(yaw_rate, (-kMaxHeading - heading) / dt, (kMaxHeading - heading) / dt);
}

namespace {

bool occupies(const VehicleState& v, int lane) { return v.lane == lane || v.target_lane == lane; }

double bumper_gap(const VehicleState& rear, const VehicleState& front) {
  return front.x - rear.x - 0.5 * (rear.length + front.length);
}

}  // namespace

std::optional<Neighbor> find_leader(const WorldState& world, int self, int lane, int skip) {
  const auto& me = world.vehicles[self];
  std::optional<Neighbor> best;
  for (int k = 0; k < static_cast<int>(world.vehicles.size()); ++k) {
    if (k == self || k == skip) continue;
    const auto& o = world.vehicles[k];
    if (!occupies(o, lane) || o.x < me.x || (o.x == me.x && k < self)) continue;
    const double gap = bumper_gap(me, o);
    if (!best || o.x < world.vehicles[best->index].x) best = Neighbor{k, gap};
  }
  return best;
}

std::optional<Neighbor> find_follower(const WorldState& world, int self, int lane, int skip) {
  const auto& me = world.vehicles[self];
  std::optional<Neighbor> best;
  for (int k = 0; k < static_cast<int>(world.vehicles.size()); ++k) {
    if (k == self || k == skip) continue;
    const auto& o = world.vehicles[k];
    if (!occupies(o, lane) || o.x > me.x || (o.x == me.x && k > self)) continue;
    const double gap = bumper_gap(o, me);
    if (!best || o.x > world.vehicles[best->index].x) best = Neighbor{k, gap};
  }
  return best;
}

namespace {

IdmParams with_target(const IdmParams& p, const VehicleState& v) {
  IdmParams q = p;
  q.v_tar = std::clamp(v.target_speed, 1e-3, kMaxSpeed);
  return q;
}

// IDM acceleration of `rear` behind `front` with an explicit gap.
std::optional<double> idm_pair(const VehicleState& rear, const VehicleState* front, double gap,
                               const IdmParams& p) {
  const IdmParams q = with_target(p, rear);
  if (!front) return idm_acceleration(rear.v1, 0.0, std::nullopt, q);
  if (!(gap > 0.0)) return std::nullopt;
  return idm_acceleration(rear.v1, rear.v1 - front->v1, gap, q);
}

}  // namespace

std::optional<double> idm_following(const WorldState& world, int self,
                                    std::optional<Neighbor> leader, const IdmParams& p) {
  const auto& me = world.vehicles[self];
  if (!leader) return idm_pair(me, nullptr, 0.0, p);
  return idm_pair(me, &world.vehicles[leader->index], leader->gap, p);
}

LaneChangeDecision mobil_decision(const WorldState& world, int vehicle_id, const IdmParams& idm,
                                  const MobilParams& mobil) {
  const int self = world.index_of(vehicle_id);
  if (self < 0) throw InvalidInputError("mobil_decision: unknown vehicle");
  const auto& me = world.vehicles[self];
  if (std::abs(me.y - world.road.lane_center(me.target_lane)) > kLaneSettledTolerance ||
      me.lane != me.target_lane)
    return {};

  const auto old_leader = find_leader(world, self, me.lane);
  const auto old_follower = find_follower(world, self, me.lane);
  const auto ego_old = idm_following(world, self, old_leader, idm);
  // An overlapping leader means the vehicle is already in a collision; stay put.
  if (!ego_old) return {};

  // Current-lane follower before (behind me) and after (behind my old leader).
  std::optional<double> i_old, i_new;
  if (old_follower) {
    const auto& f = world.vehicles[old_follower->index];
    i_old = idm_pair(f, &me, old_follower->gap, idm);
    if (old_leader) {
      const auto& l = world.vehicles[old_leader->index];
      i_new = idm_pair(f, &l, bumper_gap(f, l), idm);
    } else {
      i_new = idm_pair(f, nullptr, 0.0, idm);
    }
  }

  LaneChangeDecision best;
  for (LaneChoice choice : {LaneChoice::kLeft, LaneChoice::kRight}) {
    const int lane = me.lane + lane_offset(choice);
    if (lane < 1 || lane > world.road.lane_count) continue;

    const auto new_leader = find_leader(world, self, lane);
    const auto new_follower = find_follower(world, self, lane);
    const auto ego_new = idm_following(world, self, new_leader, idm);
    if (!ego_new) continue;

    std::optional<double> j_old, j_new;
    if (new_follower) {
      const auto& f = world.vehicles[new_follower->index];
      j_new = idm_pair(f, &me, new_follower->gap, idm);
      // Overlapping with the new follower is never safe.
      if (!j_new || !mobil_safety(*j_new, mobil)) continue;
      if (new_leader) {
        const auto& l = world.vehicles[new_leader->index];
        j_old = idm_pair(f, &l, bumper_gap(f, l), idm);
      } else {
        j_old = idm_pair(f, nullptr, 0.0, idm);
      }
    }

    const auto incentive = mobil_incentive(*ego_new, *ego_old, i_new, i_old, j_new, j_old, mobil);
    if (!incentive.accepted) continue;
    // Left is evaluated first, so an equal right gain does not displace it.
    if (best.choice == LaneChoice::kKeep || incentive.gain > best.incentive_gain)
      best = {choice, incentive.gain};
  }
  return best;
}

ReferenceCommand reference_policy(const WorldState& world, int vehicle_id,
                                  const DriverParams& params, bool decide_lane) {
  const int self = world.index_of(vehicle_id);
  if (self < 0) throw InvalidInputError("reference_policy: unknown vehicle");
  const auto& me = world.vehicles[self];

  ReferenceCommand cmd;
  cmd.target_lane = me.target_lane;
  if (decide_lane) {
    const auto decision = mobil_decision(world, vehicle_id, params.idm, params.mobil);
    cmd.decision = decision.choice;
    if (decision.choice != LaneChoice::kKeep) cmd.target_lane = me.lane + lane_offset(decision.choice);
  }

  // Follow the more constraining leader of the current and target lanes.
  double a1 = params.idm.a_max;
  for (int lane : {me.lane, cmd.target_lane}) {
    const auto leader = find_leader(world, self, lane);
    const auto a = idm_following(world, self, leader, params.idm);
    a1 = std::min(a1, a ? *a : -params.idm.a_max);
  }
  cmd.a1 = a1;
  cmd.yaw_rate = lateral_control(me.y, world.road.lane_center(cmd.target_lane), me.heading, me.v1,
                                 params.gains, world.dt());
  return cmd;
}

}  // namespace overtake
