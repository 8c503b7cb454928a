#pragma once

#include "automt/backends/client.hpp"
#include "automt/image.hpp"
#include "automt/metamorphic_relation.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <span>
#include <string>
#include <vector>

namespace automt::validation
{

struct JudgeTranscript
{
  std::string metric;
  std::string reply;
};

struct ValidityVerdict
{
  std::string case_id;
  std::size_t mr_index = 0;
  int scenario_alignment = 0;
  int logical_alignment = 0;
  int manipulation_verification = 0;
  bool valid = false;
  std::vector<JudgeTranscript> transcripts;
};

/// Builds a verdict whose validity is the conjunction of the three bits.
ValidityVerdict make_verdict(
  std::string case_id, std::size_t mr_index, int scenario, int logical, int manipulation);

/// Road-type agreement between the middle frames of the two cases.
int scenario_alignment(
  std::span<const Image> source_frames, std::span<const Image> followup_frames,
  backends::BackendClient & vision, std::string * reply_out = nullptr);

/// 1 iff the three-question protocol answers yes to all three.
int logical_alignment(
  const mr::MetamorphicRelation & mr, backends::BackendClient & chat,
  std::string_view system_name = mr::kDefaultSystemName, std::string * reply_out = nullptr);

/// Binary judge of whether the change between the keyframes matches the
/// manipulation text. Identical images score 0 without a backend call.
int manipulation_verification(
  const Image & source_keyframe, const Image & followup_keyframe, std::string_view manipulation,
  backends::BackendClient & vision, std::string * reply_out = nullptr);

double validation_rate(std::span<const ValidityVerdict> verdicts);

struct ValidationSummary
{
  std::size_t total = 0;
  std::size_t valid = 0;
  double validation_rate = 0.0;
  double scenario_alignment_rate = 0.0;
  double logical_alignment_rate = 0.0;
  double manipulation_verification_rate = 0.0;
};

ValidationSummary summarize(std::span<const ValidityVerdict> verdicts);

struct Diversity
{
  std::size_t count = 0;
  std::map<std::string, std::size_t> histogram;  // canonical phrase -> uses
};

/// Distinct canonicalized manipulation phrases.
Diversity distinct_manipulations(std::span<const std::string> phrases);

nlohmann::json to_json(const ValidityVerdict & verdict);
nlohmann::json transcripts_json(const ValidityVerdict & verdict);
ValidityVerdict verdict_from_json(const nlohmann::json & value);
nlohmann::json to_json(const ValidationSummary & summary);
nlohmann::json to_json(const Diversity & diversity);

}  // namespace automt::validation
