#include "automt/scene.hpp"

#include "automt/error.hpp"
#include "automt/io.hpp"
#include "automt/numeric.hpp"
#include "automt/prompts.hpp"
#include "automt/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <optional>

namespace automt::scene
{

using nlohmann::json;

void validate(const SourceTestCase & test_case)
{
  if (test_case.frames.empty()) throw PreconditionError("case '" + test_case.id + "' has no frames");
  if (test_case.speed_mps.size() != test_case.frames.size() ||
      test_case.steering_rad.size() != test_case.frames.size()) {
    throw PreconditionError("case '" + test_case.id + "': telemetry length differs from frame count");
  }
}

namespace
{

struct Key
{
  std::string_view label;
  std::string SceneFields::*field;
};

const std::array<Key, 4> kKeys{{
  {"time:", &SceneFields::time},
  {"weather:", &SceneFields::weather},
  {"road type:", &SceneFields::road_type},
  {"objects:", &SceneFields::objects},
}};

std::optional<std::size_t> find_key(const std::string & lowered, std::string_view key)
{
  for (auto pos = lowered.find(key); pos != std::string::npos; pos = lowered.find(key, pos + 1)) {
    if (pos == 0 || !std::isalpha(static_cast<unsigned char>(lowered[pos - 1]))) return pos;
  }
  return std::nullopt;
}

std::string clean_value(std::string_view raw)
{
  auto value = text::trim(raw);
  while (!value.empty() && (value.back() == ',' || value.back() == ';')) {
    value.pop_back();
    value = text::trim(value);
  }
  return value;
}

std::string display(double value, std::string_view unit)
{
  return text::format_fixed(value, 3) + " " + std::string(unit);
}

}  // namespace

SceneFields parse_scene_reply(std::string_view reply)
{
  std::string original(reply);
  auto lowered = text::to_lower(original);
  std::vector<std::pair<std::size_t, const Key *>> found;
  for (const auto & key : kKeys) {
    auto pos = find_key(lowered, key.label);
    if (!pos) throw MalformedSceneReply("scene reply lacks the '" + std::string(key.label) + "' key");
    found.emplace_back(*pos, &key);
  }
  std::sort(found.begin(), found.end());
  SceneFields fields;
  for (std::size_t i = 0; i < found.size(); ++i) {
    auto start = found[i].first + found[i].second->label.size();
    auto end = i + 1 < found.size() ? found[i + 1].first : original.size();
    fields.*(found[i].second->field) = clean_value(std::string_view(original).substr(start, end - start));
  }
  if (fields.time.empty() || fields.weather.empty() || fields.road_type.empty()) {
    throw MalformedSceneReply("scene reply has an empty time, weather or road type value");
  }
  return fields;
}

SceneFields analyze_scene(
  const SourceTestCase & test_case, backends::BackendClient & vision, std::size_t frame_cap)
{
  validate(test_case);
  std::vector<Image> images;
  auto limit = std::min<std::size_t>(frame_cap, static_cast<std::size_t>(std::max(1, vision.endpoint().max_images)));
  if (limit <= 1) {
    images.push_back(test_case.frames[test_case.frames.size() / 2]);
  } else {
    auto n = std::min(limit, test_case.frames.size());
    images.assign(test_case.frames.begin(), test_case.frames.begin() + static_cast<std::ptrdiff_t>(n));
  }
  std::string reply;
  try {
    reply = vision.chat(prompts::scene_analysis_prompt(), images);
  } catch (const Timeout & e) {
    throw BackendUnavailable(e.what());
  }
  return parse_scene_reply(reply);
}

TestCaseRepresentation build_representation(const SourceTestCase & test_case, const SceneFields & fields)
{
  validate(test_case);
  TestCaseRepresentation rep;
  rep.case_id = test_case.id;
  rep.time = fields.time;
  rep.weather = fields.weather;
  rep.road_type = text::canonicalize(fields.road_type);
  rep.objects = fields.objects;
  rep.ego_speed_mps = median(test_case.speed_mps);
  rep.ego_steering_rad = median(test_case.steering_rad);
  return rep;
}

json to_json(const TestCaseRepresentation & rep)
{
  return json{
    {"case_id", rep.case_id},
    {"Test Case Representation",
     {{"Time", rep.time},
      {"Weather", rep.weather},
      {"RoadType", rep.road_type},
      {"Objects", rep.objects},
      {"EgoVehicle",
       {{"Speed", display(rep.ego_speed_kmh(), "km/h")},
        {"Steering Angle", display(rep.ego_steering_rad, "rad")},
        {"speed_mps", rep.ego_speed_mps},
        {"steering_rad", rep.ego_steering_rad}}}}}};
}

TestCaseRepresentation from_json(const json & value)
{
  try {
    const auto & body = value.at("Test Case Representation");
    const auto & ego = body.at("EgoVehicle");
    TestCaseRepresentation rep;
    rep.case_id = value.at("case_id").get<std::string>();
    rep.time = body.at("Time").get<std::string>();
    rep.weather = body.at("Weather").get<std::string>();
    rep.road_type = text::canonicalize(body.at("RoadType").get<std::string>());
    rep.objects = body.at("Objects").get<std::string>();
    rep.ego_speed_mps = ego.at("speed_mps").get<double>();
    rep.ego_steering_rad = ego.at("steering_rad").get<double>();
    return rep;
  } catch (const json::exception & e) {
    throw ParseError(std::string("malformed test case representation: ") + e.what());
  }
}

std::string describe(const TestCaseRepresentation & rep) { return io::dump(to_json(rep)); }

std::filesystem::path frame_path(const std::filesystem::path & directory, std::size_t index)
{
  char name[32];
  std::snprintf(name, sizeof name, "frame_%03zu.png", index);
  return directory / name;
}

SourceTestCase load_case(const std::filesystem::path & directory, std::string_view region)
{
  SourceTestCase test_case;
  test_case.id = directory.filename().string();
  test_case.region = std::string(region);
  json telemetry;
  try {
    telemetry = json::parse(io::read_file(directory / "telemetry.json"));
    test_case.speed_mps = telemetry.at("speed_mps").get<std::vector<double>>();
    test_case.steering_rad = telemetry.at("steering_rad").get<std::vector<double>>();
    if (telemetry.contains("region")) test_case.region = telemetry.at("region").get<std::string>();
  } catch (const json::exception & e) {
    throw ParseError("telemetry of case '" + test_case.id + "': " + e.what());
  }
  for (std::size_t i = 0; std::filesystem::exists(frame_path(directory, i)); ++i) {
    test_case.frames.push_back(read_png(frame_path(directory, i)));
  }
  validate(test_case);
  return test_case;
}

std::vector<std::string> list_cases(const std::filesystem::path & corpus)
{
  if (!std::filesystem::is_directory(corpus)) throw IoError("corpus directory not found: " + corpus.string());
  std::vector<std::string> ids;
  for (const auto & entry : std::filesystem::directory_iterator(corpus)) {
    if (entry.is_directory() && std::filesystem::exists(entry.path() / "telemetry.json")) {
      ids.push_back(entry.path().filename().string());
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace automt::scene
