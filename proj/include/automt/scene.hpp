#pragma once

#include "automt/backends/client.hpp"
#include "automt/image.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace automt::scene
{

inline constexpr double kKmhPerMps = 3.6;
inline constexpr std::size_t kDefaultFrameCap = 10;

struct SourceTestCase
{
  std::string id;
  std::vector<Image> frames;
  std::vector<double> speed_mps;
  std::vector<double> steering_rad;
  std::string region;
};

/// Throws PreconditionError unless frames and both series are non-empty and equally long.
void validate(const SourceTestCase & test_case);

struct SceneFields
{
  std::string time;
  std::string weather;
  std::string road_type;
  std::string objects;

  bool operator==(const SceneFields &) const = default;
};

/// Parses "time: .., weather: .., road type: .., objects: ..". Each value runs
/// to the next key; the last one keeps everything to the end of the reply.
SceneFields parse_scene_reply(std::string_view reply);

/// Sends the scene prompt with up to `frame_cap` frames (the middle frame only
/// for single-image endpoints) and parses the reply.
SceneFields analyze_scene(
  const SourceTestCase & test_case, backends::BackendClient & vision,
  std::size_t frame_cap = kDefaultFrameCap);

struct TestCaseRepresentation
{
  std::string case_id;
  std::string time;
  std::string weather;
  std::string road_type;  // canonical
  std::string objects;
  double ego_speed_mps = 0.0;
  double ego_steering_rad = 0.0;

  double ego_speed_kmh() const { return kKmhPerMps * ego_speed_mps; }
  bool operator==(const TestCaseRepresentation &) const = default;
};

/// Ego summaries are per-frame medians of the case telemetry.
TestCaseRepresentation build_representation(const SourceTestCase & test_case, const SceneFields & fields);

nlohmann::json to_json(const TestCaseRepresentation & rep);
TestCaseRepresentation from_json(const nlohmann::json & value);

/// Serialized representation used as retrieval query and match-prompt subject.
std::string describe(const TestCaseRepresentation & rep);

/// A corpus is one directory per case holding frame_%03d.png and
/// telemetry.json {speed_mps: [...], steering_rad: [...]}. Cases load in
/// directory-name order.
SourceTestCase load_case(const std::filesystem::path & directory, std::string_view region = "");
std::vector<std::string> list_cases(const std::filesystem::path & corpus);
std::filesystem::path frame_path(const std::filesystem::path & directory, std::size_t index);

}  // namespace automt::scene
