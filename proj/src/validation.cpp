#include "automt/validation.hpp"

#include "automt/error.hpp"
#include "automt/judgement.hpp"
#include "automt/prompts.hpp"
#include "automt/text.hpp"

namespace automt::validation
{

using nlohmann::json;

namespace
{

void check_bit(int bit, const char * name)
{
  if (bit != 0 && bit != 1) throw PreconditionError(std::string(name) + " must be 0 or 1");
}

std::string ask(backends::BackendClient & backend, const std::string & prompt, std::span<const Image> images)
{
  try {
    return backend.chat(prompt, images);
  } catch (const Timeout & e) {
    throw BackendUnavailable(e.what());
  }
}

}  // namespace

ValidityVerdict make_verdict(std::string case_id, std::size_t mr_index, int scenario, int logical, int manipulation)
{
  check_bit(scenario, "scenario_alignment");
  check_bit(logical, "logical_alignment");
  check_bit(manipulation, "manipulation_verification");
  ValidityVerdict v;
  v.case_id = std::move(case_id);
  v.mr_index = mr_index;
  v.scenario_alignment = scenario;
  v.logical_alignment = logical;
  v.manipulation_verification = manipulation;
  v.valid = scenario == 1 && logical == 1 && manipulation == 1;
  return v;
}

int scenario_alignment(
  std::span<const Image> source_frames, std::span<const Image> followup_frames,
  backends::BackendClient & vision, std::string * reply_out)
{
  if (source_frames.empty() || followup_frames.empty()) {
    throw PreconditionError("scenario alignment needs frames from both cases");
  }
  std::vector<Image> pair{source_frames[source_frames.size() / 2], followup_frames[followup_frames.size() / 2]};
  auto reply = ask(vision, prompts::scenario_alignment_prompt(), pair);
  if (reply_out) *reply_out = reply;
  return judgement::parse_single_answer(reply) == mr::Answer::Yes ? 1 : 0;
}

int logical_alignment(
  const mr::MetamorphicRelation & mr, backends::BackendClient & chat, std::string_view system_name,
  std::string * reply_out)
{
  auto prompt = prompts::mr_validation_prompt(mr.source_rule, mr::render_gherkin(mr, system_name), system_name);
  auto reply = ask(chat, prompt, {});
  if (reply_out) *reply_out = reply;
  auto answers = judgement::parse_answer_array(reply);
  if (answers.size() != 3) {
    throw MalformedJudgement("logical alignment judge returned " + std::to_string(answers.size()) + " answers");
  }
  return mr::answers_to_score(answers) == 0.0 ? 1 : 0;
}

int manipulation_verification(
  const Image & source_keyframe, const Image & followup_keyframe, std::string_view manipulation,
  backends::BackendClient & vision, std::string * reply_out)
{
  if (source_keyframe.empty() || followup_keyframe.empty()) {
    throw PreconditionError("manipulation verification needs both keyframes");
  }
  if (source_keyframe == followup_keyframe) {
    if (reply_out) *reply_out = "";
    return 0;
  }
  std::vector<Image> pair{source_keyframe, followup_keyframe};
  auto reply = ask(vision, prompts::manipulation_verification_prompt(manipulation), pair);
  if (reply_out) *reply_out = reply;
  return judgement::parse_single_answer(reply) == mr::Answer::Yes ? 1 : 0;
}

double validation_rate(std::span<const ValidityVerdict> verdicts)
{
  if (verdicts.empty()) throw EmptyBatch("validation rate of an empty batch");
  std::size_t valid = 0;
  for (const auto & v : verdicts) valid += v.valid ? 1 : 0;
  return static_cast<double>(valid) / static_cast<double>(verdicts.size());
}

ValidationSummary summarize(std::span<const ValidityVerdict> verdicts)
{
  if (verdicts.empty()) throw EmptyBatch("validation summary of an empty batch");
  ValidationSummary s;
  s.total = verdicts.size();
  std::size_t scenario = 0, logical = 0, manipulation = 0;
  for (const auto & v : verdicts) {
    s.valid += v.valid ? 1 : 0;
    scenario += static_cast<std::size_t>(v.scenario_alignment);
    logical += static_cast<std::size_t>(v.logical_alignment);
    manipulation += static_cast<std::size_t>(v.manipulation_verification);
  }
  auto n = static_cast<double>(s.total);
  s.validation_rate = static_cast<double>(s.valid) / n;
  s.scenario_alignment_rate = static_cast<double>(scenario) / n;
  s.logical_alignment_rate = static_cast<double>(logical) / n;
  s.manipulation_verification_rate = static_cast<double>(manipulation) / n;
  return s;
}

Diversity distinct_manipulations(std::span<const std::string> phrases)
{
  Diversity d;
  for (const auto & phrase : phrases) {
    auto key = text::canonicalize(phrase);
    if (key.empty()) continue;
    ++d.histogram[key];
  }
  d.count = d.histogram.size();
  return d;
}

json to_json(const ValidityVerdict & v)
{
  return json{
    {"case_id", v.case_id},
    {"mr_index", v.mr_index},
    {"scenario", v.scenario_alignment},
    {"logical", v.logical_alignment},
    {"manipulation", v.manipulation_verification},
    {"valid", v.valid}};
}

json transcripts_json(const ValidityVerdict & v)
{
  json replies = json::object();
  for (const auto & t : v.transcripts) replies[t.metric] = t.reply;
  return json{{"case_id", v.case_id}, {"mr_index", v.mr_index}, {"replies", replies}};
}

ValidityVerdict verdict_from_json(const json & value)
{
  try {
    auto v = make_verdict(
      value.at("case_id").get<std::string>(), value.at("mr_index").get<std::size_t>(),
      value.at("scenario").get<int>(), value.at("logical").get<int>(), value.at("manipulation").get<int>());
    if (value.contains("valid") && value.at("valid").get<bool>() != v.valid) {
      throw ParseError("verdict for '" + v.case_id + "' has an inconsistent valid flag");
    }
    return v;
  } catch (const json::exception & e) {
    throw ParseError(std::string("malformed validity verdict: ") + e.what());
  }
}

json to_json(const ValidationSummary & s)
{
  return json{
    {"total", s.total},
    {"valid", s.valid},
    {"validation_rate", s.validation_rate},
    {"scenario_alignment_rate", s.scenario_alignment_rate},
    {"logical_alignment_rate", s.logical_alignment_rate},
    {"manipulation_verification_rate", s.manipulation_verification_rate}};
}

json to_json(const Diversity & d)
{
  return json{{"count", d.count}, {"histogram", d.histogram}};
}

}  // namespace automt::validation
