#include "automt/oracle.hpp"

#include "automt/error.hpp"
#include "automt/numeric.hpp"
#include "automt/text.hpp"

#include <algorithm>
#include <cmath>

namespace automt::oracle
{

using nlohmann::json;

Summary summarize(const PredictionSeries & series)
{
  if (series.speed_mps.size() != series.steering_rad.size()) {
    throw PreconditionError("prediction series channels differ in length");
  }
  return Summary{median(series.speed_mps), median(series.steering_rad)};
}

namespace
{

VarianceBand band(Channel channel, std::span<const Summary> source, double k)
{
  auto value = [&](const Summary & s) { return channel == Channel::Speed ? s.speed : s.steering; };
  double mean = 0.0;
  for (const auto & s : source) mean += value(s);
  mean /= static_cast<double>(source.size());
  double var = 0.0;
  for (const auto & s : source) var += (value(s) - mean) * (value(s) - mean);
  var /= static_cast<double>(source.size());
  double sd = std::sqrt(var);
  return VarianceBand{channel, mean, sd, mean - k * sd, mean + k * sd};
}

}  // namespace

Bands bands_from_source(std::span<const Summary> source, double k)
{
  if (source.size() < 2) throw TooFewPredictors("variance bands need at least two ADSs");
  if (!(k >= 0.0) || !std::isfinite(k)) throw PreconditionError("band factor must be finite and >= 0");
  return Bands{band(Channel::Speed, source, k), band(Channel::Steering, source, k)};
}

Behavior behavior_from_string(std::string_view value)
{
  auto v = text::canonicalize(value);
  if (v == "slow down") return Behavior::SlowDown;
  if (v == "turn left") return Behavior::TurnLeft;
  if (v == "turn right") return Behavior::TurnRight;
  if (v == "keep current") return Behavior::KeepCurrent;
  throw UnknownBehavior("no oracle rule for behavior '" + std::string(value) + "'");
}

std::string to_string(Behavior behavior)
{
  switch (behavior) {
    case Behavior::SlowDown: return "slow down";
    case Behavior::TurnLeft: return "turn left";
    case Behavior::TurnRight: return "turn right";
    case Behavior::KeepCurrent: return "keep current";
  }
  return "slow down";
}

bool satisfied(Behavior behavior, const Summary & followup, const Bands & bands, SignConvention convention)
{
  switch (behavior) {
    case Behavior::SlowDown: return followup.speed < bands.speed.lower;
    case Behavior::KeepCurrent:
      return followup.speed >= bands.speed.lower && followup.speed <= bands.speed.upper &&
             followup.steering >= bands.steering.lower && followup.steering <= bands.steering.upper;
    case Behavior::TurnLeft:
    case Behavior::TurnRight: {
      // Map into the left-positive frame; negating also swaps the band ends.
      double s = followup.steering;
      double lo = bands.steering.lower;
      double hi = bands.steering.upper;
      if (convention == SignConvention::LeftNegative) {
        s = -s;
        std::swap(lo, hi);
        lo = -lo;
        hi = -hi;
      }
      return behavior == Behavior::TurnLeft ? s > std::max(hi, 0.0) : s < std::min(lo, 0.0);
    }
  }
  return false;
}

ViolationVerdict judge(Behavior behavior, const Summary & followup, const Bands & bands, SignConvention convention)
{
  ViolationVerdict v;
  v.behavior = behavior;
  v.bands = bands;
  v.observed = followup;
  v.violated = !satisfied(behavior, followup, bands, convention);
  return v;
}

ViolationVerdict judge(std::string_view behavior, const Summary & followup, const Bands & bands, SignConvention convention)
{
  return judge(behavior_from_string(behavior), followup, bands, convention);
}

double violation_rate(std::span<const ViolationVerdict> verdicts)
{
  if (verdicts.empty()) throw EmptyBatch("violation rate of an empty batch");
  auto violated = std::count_if(verdicts.begin(), verdicts.end(), [](const auto & v) { return v.violated; });
  return static_cast<double>(violated) / static_cast<double>(verdicts.size());
}

json to_json(const VarianceBand & b)
{
  return json{{"mean", b.mean}, {"std", b.std}, {"lower", b.lower}, {"upper", b.upper}};
}

json to_json(const ViolationVerdict & v)
{
  return json{
    {"ads_id", v.ads_id},
    {"case_id", v.case_id},
    {"behavior", to_string(v.behavior)},
    {"violated", v.violated},
    {"bands", {{"speed", to_json(v.bands.speed)}, {"steering", to_json(v.bands.steering)}}},
    {"observed", {{"speed_mps", v.observed.speed}, {"steering_rad", v.observed.steering}}}};
}

}  // namespace automt::oracle
