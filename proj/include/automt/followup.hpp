#pragma once

#include "automt/backends/client.hpp"
#include "automt/image.hpp"
#include "automt/metamorphic_relation.hpp"
#include "automt/mr_store.hpp"
#include "automt/scene.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace automt::followup
{

struct ApplicabilityThresholds
{
  double v_min = 1.0;     // m/s; slow-down MRs need a moving ego vehicle
  double epsilon = 0.05;  // m/s; keep-current MRs need a non-stationary ego vehicle
};

/// False when a slow-down MR meets a (near) stationary ego vehicle, a
/// keep-current MR meets a stationary one, or the road types differ.
bool applicability_filter(
  const scene::TestCaseRepresentation & rep, const mr::MetamorphicRelation & mr,
  const ApplicabilityThresholds & thresholds = {});

enum class Placement { OnRoad, Roadside, Global };
enum class MaskPolicy { SegmentationFree, None };

std::string to_string(Placement placement);
std::string to_string(MaskPolicy policy);

struct ManipulationPlan
{
  ontology::Verb verb = ontology::Verb::Adds;
  std::string instruction;
  Placement placement = Placement::OnRoad;
  MaskPolicy mask_policy = MaskPolicy::SegmentationFree;
  std::vector<std::string> mask_classes;

  bool operator==(const ManipulationPlan &) const = default;
};

/// person, rider, car, truck, bus, train, motorcycle, bicycle.
const std::vector<std::string> & default_mask_classes();

ManipulationPlan plan_manipulation(const mr::MetamorphicRelation & mr);

nlohmann::json to_json(const ManipulationPlan & plan);
ManipulationPlan plan_from_json(const nlohmann::json & value);

struct MatchOptions
{
  std::size_t top_k = 5;
  ApplicabilityThresholds thresholds;
};

struct MatchResult
{
  std::size_t mr_index = 0;
  std::string rationale;
  bool fallback = false;  // the chat backend's choice was unusable
  std::vector<store::Ranked> retrieved;
  std::vector<std::size_t> survivors;
  std::string raw_reply;
  std::uint64_t execution_count = 0;  // after this match
};

/// "Index: <n>" from a match reply.
std::optional<std::size_t> parse_match_index(std::string_view reply);

/// Retrieve, filter, let the chat backend choose among survivors (falling
/// back to the top survivor), then record the execution.
MatchResult match_mr(
  const scene::TestCaseRepresentation & rep, store::MrStore & store, backends::BackendClient & chat,
  backends::BackendClient & embedder, const MatchOptions & options = {});

struct FollowUpArtifact
{
  std::string source_case_id;
  std::size_t mr_index = 0;
  ManipulationPlan plan;
  Image keyframe;
  Image edited_keyframe;
  std::vector<Image> frames;
  nlohmann::json lineage = nlohmann::json::object();
};

/// Edits the first frame once, then asks the video backend for a sequence
/// driven by the case's own speed and steering series.
FollowUpArtifact generate_followup(
  const scene::SourceTestCase & test_case, const ManipulationPlan & plan, std::size_t mr_index,
  backends::BackendClient & editor, backends::BackendClient & video);

/// plan.json, keyframe_edited.png, frame_%03d.png and lineage.json.
void write_artifact(const std::filesystem::path & directory, const FollowUpArtifact & artifact);
FollowUpArtifact read_artifact(const std::filesystem::path & directory);

}  // namespace automt::followup
