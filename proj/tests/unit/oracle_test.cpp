#include "automt/error.hpp"
#include "automt/oracle.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using automt::oracle::Bands;
using automt::oracle::Behavior;
using automt::oracle::SignConvention;
using automt::oracle::Summary;

namespace
{

Bands bands(double s_lo, double s_hi, double st_lo, double st_hi)
{
  Bands b;
  b.speed = {automt::oracle::Channel::Speed, (s_lo + s_hi) / 2, (s_hi - s_lo) / 2, s_lo, s_hi};
  b.steering = {automt::oracle::Channel::Steering, (st_lo + st_hi) / 2, (st_hi - st_lo) / 2, st_lo, st_hi};
  return b;
}

constexpr Behavior kBehaviors[] = {Behavior::SlowDown, Behavior::TurnLeft, Behavior::TurnRight, Behavior::KeepCurrent};

}  // namespace

TEST(OracleSummary, ChannelMedians)
{
  automt::oracle::PredictionSeries s{"ads", "c", {1, 9, 3, 100}, {0.1, -0.2, 0.3}};
  EXPECT_THROW(automt::oracle::summarize(s), automt::PreconditionError);
  s.steering_rad.push_back(0.0);
  auto sum = automt::oracle::summarize(s);
  EXPECT_DOUBLE_EQ(sum.speed, 6.0);
  EXPECT_DOUBLE_EQ(sum.steering, 0.05);
  EXPECT_THROW(automt::oracle::summarize({"a", "c", {}, {}}), automt::EmptySeries);
}

TEST(OracleBands, PopulationStd)
{
  std::vector<Summary> source{{8.0, -0.1}, {12.0, 0.1}};
  auto b = automt::oracle::bands_from_source(source);
  EXPECT_DOUBLE_EQ(b.speed.mean, 10.0);
  EXPECT_DOUBLE_EQ(b.speed.std, 2.0);
  EXPECT_DOUBLE_EQ(b.speed.lower, 8.0);
  EXPECT_DOUBLE_EQ(b.speed.upper, 12.0);
  EXPECT_DOUBLE_EQ(b.steering.lower, -0.1);
  EXPECT_DOUBLE_EQ(b.steering.upper, 0.1);
  auto wide = automt::oracle::bands_from_source(source, 2.0);
  EXPECT_DOUBLE_EQ(wide.speed.lower, 6.0);
  auto flat = automt::oracle::bands_from_source(source, 0.0);
  EXPECT_DOUBLE_EQ(flat.speed.lower, flat.speed.upper);
}

TEST(OracleBands, NeedsTwoPredictors)
{
  std::vector<Summary> one{{8.0, 0.0}};
  EXPECT_THROW(automt::oracle::bands_from_source(one), automt::TooFewPredictors);
  std::vector<Summary> two{{8.0, 0.0}, {9.0, 0.0}};
  EXPECT_THROW(automt::oracle::bands_from_source(two, -1.0), automt::PreconditionError);
  EXPECT_THROW(automt::oracle::bands_from_source(two, NAN), automt::PreconditionError);
}

TEST(OracleJudge, WorkedExamples)
{
  auto b = bands(8.0, 12.0, -0.1, 0.1);
  EXPECT_FALSE(automt::oracle::judge("slow down", {7.9, 0.0}, b).violated);
  EXPECT_TRUE(automt::oracle::judge("slow down", {8.0, 0.0}, b).violated);
  EXPECT_TRUE(automt::oracle::judge("slow down", {10.0, 0.0}, b).violated);
  EXPECT_FALSE(automt::oracle::judge("keep current", {12.0, 0.1}, b).violated);
  EXPECT_TRUE(automt::oracle::judge("keep current", {12.01, 0.0}, b).violated);
  EXPECT_TRUE(automt::oracle::judge("keep current", {10.0, -0.11}, b).violated);
  EXPECT_FALSE(automt::oracle::judge("turn left", {10.0, 0.2}, b).violated);
  EXPECT_TRUE(automt::oracle::judge("turn left", {10.0, 0.1}, b).violated);
  EXPECT_FALSE(automt::oracle::judge("turn right", {10.0, -0.2}, b).violated);
  EXPECT_TRUE(automt::oracle::judge("turn right", {10.0, 0.2}, b).violated);
  // A band entirely on one side still requires turning past straight ahead.
  auto right_biased = bands(8.0, 12.0, -0.4, -0.2);
  EXPECT_TRUE(automt::oracle::judge("turn left", {10.0, -0.1}, right_biased).violated);
  EXPECT_FALSE(automt::oracle::judge("turn left", {10.0, 0.01}, right_biased).violated);
  EXPECT_FALSE(automt::oracle::judge("turn right", {10.0, -0.5}, right_biased).violated);
  EXPECT_TRUE(automt::oracle::judge("turn right", {10.0, -0.3}, right_biased).violated);
}

TEST(OracleJudge, SignConventionMirrors)
{
  auto b = bands(8.0, 12.0, -0.1, 0.1);
  EXPECT_TRUE(automt::oracle::judge("turn left", {10.0, 0.2}, b, SignConvention::LeftNegative).violated);
  EXPECT_FALSE(automt::oracle::judge("turn left", {10.0, -0.2}, b, SignConvention::LeftNegative).violated);
  EXPECT_FALSE(automt::oracle::judge("turn right", {10.0, 0.2}, b, SignConvention::LeftNegative).violated);
}

TEST(OracleJudge, UnknownBehavior)
{
  EXPECT_THROW(automt::oracle::judge("accelerate", {1, 0}, bands(0, 1, 0, 1)), automt::UnknownBehavior);
  EXPECT_EQ(automt::oracle::behavior_from_string(" Turn  Left "), Behavior::TurnLeft);
  for (auto b : kBehaviors) EXPECT_EQ(automt::oracle::behavior_from_string(automt::oracle::to_string(b)), b);
}

TEST(OracleProperty, MatchesBruteForce)
{
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> speed(0.0, 20.0), steer(-0.6, 0.6), width(0.0, 3.0);
  for (int i = 0; i < 20000; ++i) {
    double s_lo = speed(rng), st_lo = steer(rng);
    double s_hi = s_lo + width(rng), st_hi = st_lo + width(rng) / 5;
    Summary obs{speed(rng), steer(rng)};
    if (i % 7 == 0) obs.speed = s_lo;
    if (i % 11 == 0) obs.steering = st_hi;
    auto b = bands(s_lo, s_hi, st_lo, st_hi);
    for (auto behavior : kBehaviors) {
      for (auto conv : {SignConvention::LeftPositive, SignConvention::LeftNegative}) {
        auto expected = automt::testing::brute_force_satisfied(behavior, obs.speed, obs.steering, s_lo, s_hi, st_lo,
                                                               st_hi, conv);
        ASSERT_EQ(automt::oracle::judge(behavior, obs, b, conv).violated, !expected);
      }
    }
  }
}

TEST(OracleProperty, SlowDownIsMonotoneInSpeed)
{
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> d(0.0, 20.0);
  for (int i = 0; i < 5000; ++i) {
    auto b = bands(d(rng), 25.0, -0.1, 0.1);
    double v1 = d(rng), v2 = d(rng);
    if (v1 > v2) std::swap(v1, v2);
    bool violated_fast = automt::oracle::judge(Behavior::SlowDown, {v2, 0.0}, b).violated;
    bool violated_slow = automt::oracle::judge(Behavior::SlowDown, {v1, 0.0}, b).violated;
    if (!violated_fast) EXPECT_FALSE(violated_slow);
  }
}

TEST(OracleProperty, TranslationEquivariance)
{
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> d(0.0, 10.0), shift(-3.0, 3.0), st(-0.05, 0.05);
  for (int i = 0; i < 5000; ++i) {
    double s_lo = d(rng), s_hi = s_lo + d(rng) / 5;
    double st_lo = -0.1 + st(rng), st_hi = 0.1 + st(rng);
    Summary obs{d(rng), st(rng) * 6};
    double c = shift(rng);
    for (auto behavior : kBehaviors) {
      bool base = automt::oracle::judge(behavior, obs, bands(s_lo, s_hi, st_lo, st_hi)).violated;
      bool moved = automt::oracle::judge(behavior, {obs.speed + c, obs.steering},
                                         bands(s_lo + c, s_hi + c, st_lo, st_hi)).violated;
      EXPECT_EQ(base, moved);
    }
  }
}

TEST(OracleRate, CountsViolations)
{
  std::vector<automt::oracle::ViolationVerdict> verdicts(4);
  verdicts[1].violated = true;
  EXPECT_DOUBLE_EQ(automt::oracle::violation_rate(verdicts), 0.25);
  EXPECT_THROW(automt::oracle::violation_rate(std::vector<automt::oracle::ViolationVerdict>{}), automt::EmptyBatch);
  auto j = automt::oracle::to_json(verdicts[1]);
  EXPECT_EQ(j.at("behavior"), "slow down");
  EXPECT_TRUE(j.at("violated").get<bool>());
}
