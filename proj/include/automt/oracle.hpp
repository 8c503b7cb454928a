#pragma once

#include <nlohmann/json.hpp>

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace automt::oracle
{

struct PredictionSeries
{
  std::string ads_id;
  std::string case_id;
  std::vector<double> speed_mps;
  std::vector<double> steering_rad;
};

struct Summary
{
  double speed = 0.0;
  double steering = 0.0;
};

/// Per-channel medians. Throws EmptySeries / PreconditionError on bad input.
Summary summarize(const PredictionSeries & series);

enum class Channel { Speed, Steering };

struct VarianceBand
{
  Channel channel = Channel::Speed;
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  double lower = 0.0;
  double upper = 0.0;
};

struct Bands
{
  VarianceBand speed;
  VarianceBand steering;
};

inline constexpr double kDefaultBandFactor = 1.0;

/// mean +- k * std over the per-ADS source summaries. Needs at least two ADSs.
Bands bands_from_source(std::span<const Summary> source, double k = kDefaultBandFactor);

enum class Behavior { SlowDown, TurnLeft, TurnRight, KeepCurrent };

Behavior behavior_from_string(std::string_view value);
std::string to_string(Behavior behavior);

/// Positive steering means a left turn unless flipped for a dataset.
enum class SignConvention { LeftPositive, LeftNegative };

struct ViolationVerdict
{
  std::string ads_id;
  std::string case_id;
  Behavior behavior = Behavior::SlowDown;
  bool violated = false;
  Bands bands;
  Summary observed;
};

/// SlowDown: speed < lower (strict). KeepCurrent: both channels inside their
/// closed bands. TurnLeft/TurnRight: steering beyond max(upper, 0) /
/// min(lower, 0) in the left-positive frame. Violated = rule not satisfied.
bool satisfied(Behavior behavior, const Summary & followup, const Bands & bands, SignConvention convention);

ViolationVerdict judge(
  Behavior behavior, const Summary & followup, const Bands & bands,
  SignConvention convention = SignConvention::LeftPositive);
ViolationVerdict judge(
  std::string_view behavior, const Summary & followup, const Bands & bands,
  SignConvention convention = SignConvention::LeftPositive);

double violation_rate(std::span<const ViolationVerdict> verdicts);

nlohmann::json to_json(const ViolationVerdict & verdict);
nlohmann::json to_json(const VarianceBand & band);

}  // namespace automt::oracle
