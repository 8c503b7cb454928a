#include "automt/followup.hpp"

#include "automt/error.hpp"
#include "automt/io.hpp"
#include "automt/prompts.hpp"
#include "automt/text.hpp"

#include <algorithm>
#include <cmath>
#include <regex>

namespace automt::followup
{

using nlohmann::json;

bool applicability_filter(
  const scene::TestCaseRepresentation & rep, const mr::MetamorphicRelation & mr,
  const ApplicabilityThresholds & thresholds)
{
  auto behavior = text::canonicalize(mr.expected_behavior);
  if (behavior == "slow down" && rep.ego_speed_mps < thresholds.v_min) return false;
  if (behavior == "keep current" && std::abs(rep.ego_speed_mps) <= thresholds.epsilon) return false;
  auto road = text::canonicalize(mr.road_type);
  if (road != ontology::kAnyRoads && road != text::canonicalize(rep.road_type)) return false;
  return true;
}

std::string to_string(Placement placement)
{
  switch (placement) {
    case Placement::OnRoad: return "on_road";
    case Placement::Roadside: return "roadside";
    case Placement::Global: return "global";
  }
  return "on_road";
}

std::string to_string(MaskPolicy policy)
{
  return policy == MaskPolicy::SegmentationFree ? "segmentation_free" : "none";
}

const std::vector<std::string> & default_mask_classes()
{
  static const std::vector<std::string> classes{
    "person", "rider", "car", "truck", "bus", "train", "motorcycle", "bicycle"};
  return classes;
}

ManipulationPlan plan_manipulation(const mr::MetamorphicRelation & mr)
{
  ManipulationPlan plan;
  plan.verb = mr.verb;
  plan.instruction = mr.manipulation;
  if (mr.verb == ontology::Verb::Replaces) {
    plan.placement = Placement::Global;
    plan.mask_policy = MaskPolicy::None;
    return plan;
  }
  plan.placement = mr::split_placement(mr.manipulation).placement == mr::Placement::Roadside
                     ? Placement::Roadside
                     : Placement::OnRoad;
  plan.mask_policy = MaskPolicy::SegmentationFree;
  plan.mask_classes = default_mask_classes();
  return plan;
}

json to_json(const ManipulationPlan & plan)
{
  return json{
    {"verb", ontology::to_string(plan.verb)},
    {"instruction", plan.instruction},
    {"placement", to_string(plan.placement)},
    {"mask_policy", to_string(plan.mask_policy)},
    {"mask_classes", plan.mask_classes}};
}

ManipulationPlan plan_from_json(const json & value)
{
  try {
    ManipulationPlan plan;
    plan.verb = ontology::verb_from_string(value.at("verb").get<std::string>());
    plan.instruction = value.at("instruction").get<std::string>();
    auto placement = value.at("placement").get<std::string>();
    if (placement == "on_road") {
      plan.placement = Placement::OnRoad;
    } else if (placement == "roadside") {
      plan.placement = Placement::Roadside;
    } else if (placement == "global") {
      plan.placement = Placement::Global;
    } else {
      throw ParseError("unknown placement '" + placement + "'");
    }
    plan.mask_policy = value.at("mask_policy").get<std::string>() == "none" ? MaskPolicy::None
                                                                           : MaskPolicy::SegmentationFree;
    plan.mask_classes = value.at("mask_classes").get<std::vector<std::string>>();
    return plan;
  } catch (const json::exception & e) {
    throw ParseError(std::string("malformed manipulation plan: ") + e.what());
  }
}

std::optional<std::size_t> parse_match_index(std::string_view reply)
{
  static const std::regex pattern(R"(index\s*[:=]\s*(\d+))", std::regex::icase);
  std::string s(reply);
  std::smatch m;
  if (!std::regex_search(s, m, pattern)) return std::nullopt;
  try {
    return static_cast<std::size_t>(std::stoull(m[1].str()));
  } catch (const std::exception &) {
    return std::nullopt;
  }
}

MatchResult match_mr(
  const scene::TestCaseRepresentation & rep, store::MrStore & store, backends::BackendClient & chat,
  backends::BackendClient & embedder, const MatchOptions & options)
{
  MatchResult result;
  auto description = scene::describe(rep);
  result.retrieved = store.retrieve(description, options.top_k, embedder);

  std::vector<prompts::MatchCandidate> candidates;
  for (const auto & ranked : result.retrieved) {
    auto entry = store.entry(ranked.index);
    if (!applicability_filter(rep, entry.mr, options.thresholds)) continue;
    result.survivors.push_back(ranked.index);
    candidates.push_back(prompts::MatchCandidate{
      entry.index, mr::render_gherkin(entry.mr), entry.mr.road_type, store::manipulation_column(entry.mr),
      entry.mr.expected_behavior, ranked.execution_count});
  }
  if (result.survivors.empty()) {
    throw NoApplicableMr("no retrieved MR applies to case '" + rep.case_id + "'");
  }

  try {
    result.raw_reply = chat.chat(prompts::mr_match_prompt(description, candidates));
  } catch (const Timeout & e) {
    throw BackendUnavailable(e.what());
  }
  auto choice = parse_match_index(result.raw_reply);
  if (choice && std::find(result.survivors.begin(), result.survivors.end(), *choice) != result.survivors.end()) {
    result.mr_index = *choice;
    auto pos = text::to_lower(result.raw_reply).find("rationale:");
    if (pos != std::string::npos) result.rationale = text::trim(result.raw_reply.substr(pos + 10));
  } else {
    result.mr_index = result.survivors.front();
    result.fallback = true;
    result.rationale = "deterministic fallback: highest-ranked applicable MR";
  }
  result.execution_count = store.record_execution(result.mr_index);
  return result;
}

FollowUpArtifact generate_followup(
  const scene::SourceTestCase & test_case, const ManipulationPlan & plan, std::size_t mr_index,
  backends::BackendClient & editor, backends::BackendClient & video)
{
  scene::validate(test_case);
  FollowUpArtifact artifact;
  artifact.source_case_id = test_case.id;
  artifact.mr_index = mr_index;
  artifact.plan = plan;
  artifact.keyframe = test_case.frames.front();

  std::optional<backends::MaskRequest> mask;
  auto mode = backends::EditMode::Replace;
  if (plan.verb == ontology::Verb::Adds) {
    mask = backends::MaskRequest{plan.mask_classes, to_string(plan.placement)};
    mode = backends::EditMode::Add;
  }
  try {
    artifact.edited_keyframe = editor.edit(artifact.keyframe, mask, plan.instruction, mode);
    artifact.frames = video.video(
      artifact.edited_keyframe, test_case.speed_mps, test_case.steering_rad,
      static_cast<int>(test_case.frames.size()));
  } catch (const Timeout & e) {
    throw BackendUnavailable(e.what());
  }
  artifact.lineage = json{
    {"source_case_id", test_case.id},
    {"mr_index", mr_index},
    {"edit_backend", editor.endpoint().id},
    {"video_backend", video.endpoint().id},
    {"frame_count", artifact.frames.size()}};
  return artifact;
}

void write_artifact(const std::filesystem::path & directory, const FollowUpArtifact & artifact)
{
  std::filesystem::create_directories(directory);
  io::write_file_atomic(directory / "plan.json", io::dump_pretty(to_json(artifact.plan)));
  write_png(directory / "keyframe_edited.png", artifact.edited_keyframe);
  for (std::size_t i = 0; i < artifact.frames.size(); ++i) {
    write_png(scene::frame_path(directory, i), artifact.frames[i]);
  }
  io::write_file_atomic(directory / "lineage.json", io::dump_pretty(artifact.lineage));
}

FollowUpArtifact read_artifact(const std::filesystem::path & directory)
{
  FollowUpArtifact artifact;
  artifact.plan = plan_from_json(json::parse(io::read_file(directory / "plan.json")));
  artifact.lineage = json::parse(io::read_file(directory / "lineage.json"));
  artifact.source_case_id = artifact.lineage.value("source_case_id", "");
  artifact.mr_index = artifact.lineage.value("mr_index", std::size_t{0});
  artifact.edited_keyframe = read_png(directory / "keyframe_edited.png");
  for (std::size_t i = 0; std::filesystem::exists(scene::frame_path(directory, i)); ++i) {
    artifact.frames.push_back(read_png(scene::frame_path(directory, i)));
  }
  return artifact;
}

}  // namespace automt::followup
