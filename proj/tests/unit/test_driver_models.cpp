#include <cmath>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "oracles.hpp"
#include "overtake/driver_models.hpp"
#include "overtake/error.hpp"

using namespace overtake;
using testing_support::car;
using testing_support::world_of;

namespace {

oracle::Idm to_oracle(const IdmParams& p) {
  return {p.a_max, p.delta, p.time_gap, p.b, p.d0, p.v_tar, p.formula == GapFormula::kRelative};
}

}  // namespace

TEST(DesiredGap, Examples) {
  IdmParams p;
  EXPECT_DOUBLE_EQ(desired_gap(20.0, 0.0, p), 40.0);
  EXPECT_DOUBLE_EQ(desired_gap(0.0, 0.0, p), 10.0);
  p.formula = GapFormula::kRelative;
  EXPECT_DOUBLE_EQ(desired_gap(20.0, 0.0, p), 10.0);
  EXPECT_DOUBLE_EQ(desired_gap(33.0, 0.0, p), 10.0);
}

TEST(DesiredGap, StandardFormulaNeverBelowStandstillGap) {
  IdmParams p;
  Rng rng(4);
  for (int i = 0; i < 1000; ++i)
    EXPECT_GE(desired_gap(rng.uniform(0, 40), rng.uniform(-40, 40), p), p.d0);
}

TEST(Idm, FreeRoadExamples) {
  IdmParams p;
  EXPECT_EQ(idm_acceleration(0.0, 0.0, std::nullopt, p), 6.0);
  EXPECT_EQ(idm_acceleration(p.v_tar, 0.0, std::nullopt, p), 0.0);
}

TEST(Idm, FollowingExampleMatchesHandEvaluation) {
  IdmParams p;
  p.v_tar = 25.0;
  const double expected = 6.0 * (1.0 - std::pow(0.8, 4) - std::pow(40.0 / 60.0, 2));
  EXPECT_NEAR(idm_acceleration(20.0, 0.0, 60.0, p), expected, 1e-12);
  EXPECT_NEAR(expected, 0.876, 5e-4);
}

TEST(Idm, RejectsNonPositiveGap) {
  IdmParams p;
  EXPECT_THROW(idm_acceleration(10.0, 0.0, 0.0, p), InvalidInputError);
  EXPECT_THROW(idm_acceleration(10.0, 0.0, -1.0, p), InvalidInputError);
}

TEST(Idm, OutputIsClampedToMaximumAcceleration) {
  IdmParams p;
  EXPECT_EQ(idm_acceleration(30.0, 20.0, 0.5, p), -p.a_max);
  Rng rng(8);
  for (int i = 0; i < 1000; ++i) {
    const double a = idm_acceleration(rng.uniform(0, 40), rng.uniform(-40, 40),
                                      rng.uniform(0.01, 200), p);
    EXPECT_LE(std::abs(a), p.a_max);
  }
}

TEST(Idm, MatchesDirectEvaluationInBothGapModes) {
  Rng rng(21);
  for (int i = 0; i < 2000; ++i) {
    IdmParams p;
    p.a_max = rng.uniform(0.5, 8);
    p.delta = rng.uniform(1, 6);
    p.time_gap = rng.uniform(0.5, 3);
    p.b = rng.uniform(0.5, 8);
    p.d0 = rng.uniform(1, 15);
    p.v_tar = rng.uniform(5, 40);
    p.formula = i % 2 ? GapFormula::kRelative : GapFormula::kStandard;
    const double v = rng.uniform(0, 40), dv = rng.uniform(-20, 20);
    const std::optional<double> gap =
        i % 5 == 0 ? std::nullopt : std::optional<double>(rng.uniform(0.5, 150));
    const double want = oracle::idm(to_oracle(p), v, dv, gap);
    EXPECT_NEAR(idm_acceleration(v, dv, gap, p), want, 1e-12 * std::max(1.0, std::abs(want)));
  }
}

TEST(Idm, FreeRoadFixedPointAndMonotoneInSpeed) {
  IdmParams p;
  double prev = INFINITY;
  for (double v = 0.0; v <= 40.0; v += 0.25) {
    const double a = idm_acceleration(v, 0.0, std::nullopt, p);
    EXPECT_LE(a, prev);
    if (v < p.v_tar) EXPECT_GT(a, 0.0);
    if (v > p.v_tar) EXPECT_LT(a, 0.0);
    prev = a;
  }
}

TEST(Idm, NonIncreasingAsGapShrinks) {
  IdmParams p;
  for (double v : {0.0, 10.0, 25.0, 40.0})
    for (double dv : {-10.0, 0.0, 10.0}) {
      double prev = INFINITY;
      for (double gap = 200.0; gap > 0.1; gap *= 0.9) {
        const double a = idm_acceleration(v, dv, gap, p);
        EXPECT_LE(a, prev + 1e-15);
        prev = a;
      }
    }
}

TEST(Mobil, SafetyExamples) {
  MobilParams p;
  EXPECT_TRUE(mobil_safety(-1.5, p));
  EXPECT_FALSE(mobil_safety(-2.5, p));
  EXPECT_TRUE(mobil_safety(0.0, p));
  EXPECT_TRUE(mobil_safety(-2.0, p));
}

TEST(Mobil, SafetyIsTheThresholdInequality) {
  MobilParams p;
  Rng rng(31);
  for (int i = 0; i < 1000; ++i) {
    const double a = rng.uniform(-6, 6);
    EXPECT_EQ(mobil_safety(a, p), oracle::mobil_safe(a, p.b_safe));
  }
}

TEST(Mobil, IncentiveExamples) {
  MobilParams p;
  auto r = mobil_incentive(0.876, -2.0, std::nullopt, std::nullopt, std::nullopt, std::nullopt, p);
  EXPECT_TRUE(r.accepted);
  EXPECT_NEAR(r.gain, 2.876, 1e-12);

  r = mobil_incentive(1.0, 1.0, 0.5, 0.5, -1.0, -1.0, p);
  EXPECT_FALSE(r.accepted);
  EXPECT_EQ(r.gain, 0.0);

  // Strict inequality at the threshold.
  r = mobil_incentive(p.a_th, 0.0, std::nullopt, std::nullopt, std::nullopt, std::nullopt, p);
  EXPECT_EQ(r.gain, p.a_th);
  EXPECT_FALSE(r.accepted);
}

TEST(Mobil, FollowerTermsWeightedByPoliteness) {
  MobilParams p;
  p.politeness = 0.5;
  const auto r = mobil_incentive(1.0, 0.0, 2.0, 1.0, -3.0, 0.0, p);
  EXPECT_DOUBLE_EQ(r.gain, 1.0 + 0.5 * (1.0 - 3.0));
}

TEST(Mobil, ZeroPolitenessIgnoresFollowers) {
  MobilParams p;
  p.politeness = 0.0;
  Rng rng(32);
  for (int i = 0; i < 1000; ++i) {
    const double en = rng.uniform(-6, 6), eo = rng.uniform(-6, 6);
    const auto r = mobil_incentive(en, eo, rng.uniform(-6, 6), rng.uniform(-6, 6),
                                   rng.uniform(-6, 6), rng.uniform(-6, 6), p);
    EXPECT_EQ(r.accepted, en - eo > p.a_th);
  }
}

TEST(Mobil, IncentiveMatchesDirectEvaluation) {
  MobilParams p;
  Rng rng(33);
  for (int i = 0; i < 1000; ++i) {
    const double en = rng.uniform(-6, 6), eo = rng.uniform(-6, 6);
    double in = rng.uniform(-6, 6), io = rng.uniform(-6, 6);
    double jn = rng.uniform(-6, 6), jo = rng.uniform(-6, 6);
    const bool has_i = i % 3 != 0, has_j = i % 4 != 0;
    const double gain = oracle::mobil_gain(en, eo, has_i ? &in : nullptr, has_i ? &io : nullptr,
                                           has_j ? &jn : nullptr, has_j ? &jo : nullptr,
                                           p.politeness);
    const auto r = mobil_incentive(en, eo, has_i ? std::optional(in) : std::nullopt,
                                   has_i ? std::optional(io) : std::nullopt,
                                   has_j ? std::optional(jn) : std::nullopt,
                                   has_j ? std::optional(jo) : std::nullopt, p);
    EXPECT_NEAR(r.gain, gain, 1e-12);
    EXPECT_EQ(r.accepted, gain > p.a_th);
  }
}

TEST(LongitudinalControl, ExamplesAndBounds) {
  ControlGains g;
  EXPECT_EQ(longitudinal_control(20.0, 20.0, g), 0.0);
  EXPECT_EQ(longitudinal_control(25.0, 20.0, g), kMaxControlAccel);
  g.k_p = 0.5;
  EXPECT_DOUBLE_EQ(longitudinal_control(20.0, 25.0, g), -2.5);
  Rng rng(40);
  for (int i = 0; i < 1000; ++i)
    EXPECT_LE(std::abs(longitudinal_control(rng.uniform(0, 40), rng.uniform(0, 40), ControlGains{})),
              kMaxControlAccel);
}

TEST(LateralControl, Examples) {
  ControlGains g;
  EXPECT_EQ(lateral_control(4.0, 4.0, 0.0, 20.0, g), 0.0);
  EXPECT_NEAR(lateral_control(2.0, 0.0, 0.0, 20.0, g), 2.0 * std::asin(-0.1), 1e-15);
  EXPECT_NEAR(2.0 * std::asin(-0.1), -0.2003, 5e-5);
  EXPECT_EQ(lateral_control(2.0, 0.0, std::asin(-0.1), 20.0, g), 0.0);
}

TEST(LateralControl, KeepsHeadingWithinBound) {
  Rng rng(41);
  ControlGains g;
  g.k_p_heading = 500.0;
  for (int i = 0; i < 1000; ++i) {
    const double heading = rng.uniform(-kMaxHeading, kMaxHeading);
    const double dt = 0.05;
    const double yaw = lateral_control(rng.uniform(-2, 10), rng.uniform(0, 8), heading,
                                       rng.uniform(0, 40), g, dt);
    EXPECT_LE(std::abs(heading + yaw * dt), kMaxHeading + 1e-12);
  }
}

TEST(LateralControl, ClosedLoopSettlesFourMetreOffset) {
  auto s = car(0, 2, 0.0, 25.0);
  const double target = 0.0;
  const double dt = 0.05;
  for (int t = 0; t < 100; ++t)
    s = step_kinematics(s, 0.0, lateral_control(s.y, target, s.heading, s.v1, ControlGains{}, dt),
                        dt);
  EXPECT_LT(std::abs(s.y - target), 0.1);
}

TEST(Neighbors, LeaderAndFollowerWithBumperGaps) {
  const auto w = world_of({car(0, 2, 0.0, 20.0), car(1, 2, 30.0, 20.0), car(2, 2, 60.0, 20.0),
                           car(3, 2, -20.0, 20.0), car(4, 1, 10.0, 20.0)});
  const auto lead = find_leader(w, 0, 2);
  ASSERT_TRUE(lead);
  EXPECT_EQ(lead->index, 1);
  EXPECT_DOUBLE_EQ(lead->gap, 25.0);
  const auto follow = find_follower(w, 0, 2);
  ASSERT_TRUE(follow);
  EXPECT_EQ(follow->index, 3);
  EXPECT_DOUBLE_EQ(follow->gap, 15.0);
  EXPECT_EQ(find_leader(w, 0, 1)->index, 4);
  EXPECT_FALSE(find_follower(w, 0, 1));
  EXPECT_FALSE(find_leader(w, 0, 3));
}

TEST(Neighbors, ChangingVehicleOccupiesBothLanes) {
  auto other = car(1, 1, 30.0, 20.0);
  other.target_lane = 2;
  const auto w = world_of({car(0, 2, 0.0, 20.0), other});
  ASSERT_TRUE(find_leader(w, 0, 2));
  EXPECT_EQ(find_leader(w, 0, 2)->index, 1);
}

TEST(MobilDecision, EmptyRoadKeepsLane) {
  const auto w = world_of({car(0, 2, 0.0, 25.0)});
  EXPECT_EQ(mobil_decision(w, 0, IdmParams{}, MobilParams{}).choice, LaneChoice::kKeep);
}

TEST(MobilDecision, SlowLeaderTriggersChangeToFreeLane) {
  // Lane 3 is blocked like lane 2, lane 1 is free.
  const auto w = world_of({car(0, 2, 0.0, 25.0), car(1, 2, 20.0, 15.0), car(2, 3, 20.0, 15.0)});
  IdmParams p;
  p.v_tar = 25.0;
  const double ego_old = oracle::idm(to_oracle(p), 25.0, 10.0, 15.0);
  const double ego_new = oracle::idm(to_oracle(p), 25.0, 0.0, std::nullopt);
  const double gain = oracle::mobil_gain(ego_new, ego_old, nullptr, nullptr, nullptr, nullptr, 0.001);
  ASSERT_GT(gain, 0.2);
  const auto d = mobil_decision(w, 0, IdmParams{}, MobilParams{});
  EXPECT_EQ(d.choice, LaneChoice::kLeft);
  EXPECT_NEAR(d.incentive_gain, gain, 1e-12);
}

TEST(MobilDecision, UnsafeNewFollowerVetoesChange) {
  // The follower in lane 1 would brake at -3 m/s^2 behind the ego.
  IdmParams p;
  p.v_tar = 25.0;
  const double gap = 47.5 * std::sqrt(2.0);
  const double j_new = oracle::idm(to_oracle(p), 25.0, 0.0, gap);
  ASSERT_NEAR(j_new, -3.0, 1e-9);
  const auto w = world_of({car(0, 2, 0.0, 25.0), car(1, 2, 20.0, 15.0), car(2, 3, 20.0, 15.0),
                           car(3, 1, -(gap + 5.0), 25.0)});
  EXPECT_EQ(mobil_decision(w, 0, IdmParams{}, MobilParams{}).choice, LaneChoice::kKeep);
}

TEST(MobilDecision, VehicleMidChangeKeeps) {
  auto ego = car(0, 2, 0.0, 25.0);
  ego.y = 2.5;
  const auto w = world_of({ego, car(1, 2, 20.0, 15.0), car(2, 3, 20.0, 15.0)});
  EXPECT_EQ(mobil_decision(w, 0, IdmParams{}, MobilParams{}).choice, LaneChoice::kKeep);
}

TEST(ReferencePolicy, EmptyRoadUsesFreeRoadIdm) {
  auto ego = car(0, 2, 0.0, 20.0);
  ego.target_speed = 30.0;
  const auto w = world_of({ego});
  const auto cmd = reference_policy(w, 0, DriverParams{});
  IdmParams p;
  p.v_tar = 30.0;
  EXPECT_DOUBLE_EQ(cmd.a1, oracle::idm(to_oracle(p), 20.0, 0.0, std::nullopt));
  EXPECT_EQ(cmd.yaw_rate, 0.0);
  EXPECT_EQ(cmd.decision, LaneChoice::kKeep);
}

TEST(ReferencePolicy, EquilibriumOnCenterline) {
  const auto w = world_of({car(0, 2, 0.0, 25.0)});
  const auto cmd = reference_policy(w, 0, DriverParams{});
  EXPECT_EQ(cmd.a1, 0.0);
  EXPECT_EQ(cmd.yaw_rate, 0.0);
}

TEST(ReferencePolicy, BlockedLaneSteersLeft) {
  const auto w = world_of({car(0, 2, 0.0, 25.0), car(1, 2, 20.0, 15.0), car(2, 3, 20.0, 15.0)});
  const auto cmd = reference_policy(w, 0, DriverParams{});
  EXPECT_EQ(cmd.decision, LaneChoice::kLeft);
  EXPECT_EQ(cmd.target_lane, 1);
  EXPECT_LT(cmd.yaw_rate, 0.0);
}

TEST(DriverParams, ValidationRejectsNonsense) {
  IdmParams idm;
  idm.a_max = 0.0;
  EXPECT_THROW(idm.validate(), ConfigError);
  MobilParams mobil;
  mobil.b_safe = -1.0;
  EXPECT_THROW(mobil.validate(), ConfigError);
  ControlGains g;
  g.v_floor = 0.0;
  EXPECT_THROW(g.validate(), ConfigError);
}
