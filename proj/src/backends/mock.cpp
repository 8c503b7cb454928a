#include "automt/backends/mock.hpp"

#include "automt/backends/scene_tag.hpp"
#include "automt/error.hpp"
#include "automt/io.hpp"
#include "automt/metamorphic_relation.hpp"
#include "automt/prompts.hpp"
#include "automt/text.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace automt::backends
{

using nlohmann::json;

namespace
{

std::uint64_t mix(std::uint64_t seed, std::string_view salt, std::initializer_list<std::string_view> parts)
{
  std::string key = text::hex64(seed);
  key += '|';
  key += salt;
  for (auto part : parts) {
    key += '|';
    key += part;
  }
  auto state = text::fnv1a64(key);
  return text::splitmix64(state);
}

double unit(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

template <typename Seq>
const auto & pick(const Seq & items, std::uint64_t h)
{
  return items[static_cast<std::size_t>(h % items.size())];
}

std::string capitalize(std::string_view value)
{
  std::string out(value);
  if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out;
}

bool mentions(std::string_view haystack, std::string_view name)
{
  return text::contains_word(haystack, name) ||
         text::contains_word(haystack, std::string(name) + "s") ||
         text::contains_word(haystack, std::string(name) + "es");
}

std::string behavior_heuristic(std::string_view rule)
{
  auto r = text::canonicalize(rule);
  auto any = [&](std::initializer_list<std::string_view> words) {
    return std::any_of(words.begin(), words.end(), [&](auto w) { return mentions(r, w); });
  };
  if (r.find("right of way") != std::string::npos || r.find("right-of-way") != std::string::npos) {
    return "slow down";
  }
  if (any({"left"})) return "turn left";
  if (any({"right"})) return "turn right";
  if (any({"stop", "slow", "yield", "reduce", "limit", "caution", "careful", "prepare", "brake"})) {
    return "slow down";
  }
  if (any({"go", "proceed", "continue", "maintain", "keep", "green"})) return "keep current";
  return "slow down";
}

// Text between the first quote after `key` and the matching closing quote.
std::string quoted_after(std::string_view text_in, std::string_view key, std::string_view closing)
{
  auto pos = text_in.find(key);
  if (pos == std::string_view::npos) return {};
  auto start = pos + key.size();
  auto end = text_in.rfind(closing);
  if (end == std::string_view::npos || end < start) return std::string(text_in.substr(start));
  return std::string(text_in.substr(start, end - start));
}

struct Listing
{
  std::string name;
  std::string tag;
};

std::vector<Listing> parse_listing(std::string_view prompt, std::string_view prefix)
{
  std::vector<Listing> out;
  for (const auto & line : text::split_lines(prompt)) {
    if (line.rfind(prefix, 0) != 0) continue;
    auto rest = line.substr(prefix.size());
    std::size_t start = 0;
    while (start <= rest.size()) {
      auto end = rest.find("; ", start);
      auto entry = text::trim(rest.substr(start, end == std::string::npos ? std::string::npos : end - start));
      if (!entry.empty()) {
        Listing item;
        auto bracket = entry.rfind(" [");
        if (bracket != std::string::npos && entry.back() == ']') {
          item.name = entry.substr(0, bracket);
          item.tag = entry.substr(bracket + 2, entry.size() - bracket - 3);
        } else {
          item.name = entry;
        }
        out.push_back(std::move(item));
      }
      if (end == std::string::npos) break;
      start = end + 2;
    }
  }
  return out;
}

const Listing * longest_mentioned(std::string_view rule, const std::vector<Listing> & items)
{
  const Listing * best = nullptr;
  for (const auto & item : items) {
    if (item.name == ontology::kAnyRoads) continue;
    if (mentions(rule, item.name) && (!best || item.name.size() > best->name.size())) best = &item;
  }
  return best;
}

std::string system_token(std::string_view prompt)
{
  for (const auto & line : text::split_lines(prompt)) {
    if (line.rfind("When ", 0) == 0 && line.find("<Manipulation>") != std::string::npos) {
      auto words = text::split(line, ' ');
      if (words.size() >= 2) return words[1];
    }
  }
  return std::string(mr::kDefaultSystemName);
}

const std::vector<std::string_view> kLightingWords{
  "night", "dusk", "dawn", "darkness", "sunset", "sunrise", "glare", "twilight"};

std::string phrase_for(const Listing & target, bool replaces)
{
  if (replaces) {
    bool lighting = std::find(kLightingWords.begin(), kLightingWords.end(), target.name) !=
                    kLightingWords.end();
    auto article = target.name.size() > 5 && target.name.ends_with("storm") ? "a " : "";
    return std::string(lighting ? "the lighting with " : "the weather with ") + article + target.name;
  }
  auto suffix = target.tag.rfind("traffic infrastructure", 0) == 0 ? " on the roadside" : " on the road";
  return mr::article_for(target.name) + " " + target.name + suffix;
}

std::string gherkin_text(
  std::string_view token, std::string_view road, bool replaces, std::string_view phrase,
  std::string_view behavior)
{
  auto article = mr::article_for(road);
  return "Given the ego-vehicle approaches to " + (article.empty() ? "" : article + " ") +
         std::string(road) + "\nWhen " + std::string(token) + (replaces ? " replaces " : " adds ") +
         std::string(phrase) + "\nThen ego-vehicle should " + std::string(behavior);
}

const std::string kCannedScene =
  "time: Afternoon, weather: Clear, road type: Intersection, objects: Cars, buildings, pedestrians, "
  "bicycles, trees";

const std::vector<std::string_view> kSceneObjects{
  "cars", "pedestrians", "bicycles", "trees", "buildings", "trucks", "traffic signs", "parked cars"};

std::string yes_no(bool yes) { return yes ? "Yes" : "No"; }

std::string image_bytes(const Image & image)
{
  return std::string(reinterpret_cast<const char *>(image.rgb.data()), image.rgb.size());
}

std::vector<Image> decode_images(const json & body)
{
  std::vector<Image> out;
  if (!body.contains("images")) return out;
  for (const auto & item : body.at("images")) out.push_back(image_from_b64(item.get<std::string>()));
  return out;
}

[[noreturn]] void reject(const std::string & code, const std::string & message)
{
  raise_error_reply(code == "edit_rejected" || code == "video_rejected" ? 422 : 400,
                    json{{"code", code}, {"message", message}});
}

}  // namespace

double MockScenario::number(const std::string & key, double fallback) const
{
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  try {
    std::size_t used = 0;
    double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception &) {
    throw ConfigError("mock parameter '" + key + "' is not a number: " + it->second);
  }
}

std::string MockScenario::string(const std::string & key, const std::string & fallback) const
{
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

MockScenario parse_mock_url(std::string_view url, std::uint64_t default_seed)
{
  if (url.rfind("mock:", 0) != 0) throw ConfigError("not a mock url: " + std::string(url));
  auto rest = url.substr(5);
  MockScenario scenario;
  scenario.seed = default_seed;
  auto q = rest.find('?');
  scenario.name = text::canonicalize(rest.substr(0, q));
  if (scenario.name.empty()) scenario.name = "default";
  if (q != std::string_view::npos) {
    for (const auto & pair : text::split(rest.substr(q + 1), '&')) {
      if (pair.empty()) continue;
      auto eq = pair.find('=');
      if (eq == std::string::npos) throw ConfigError("mock parameter without value: " + pair);
      scenario.params[pair.substr(0, eq)] = pair.substr(eq + 1);
    }
  }
  if (auto it = scenario.params.find("seed"); it != scenario.params.end()) {
    try {
      scenario.seed = std::stoull(it->second);
    } catch (const std::exception &) {
      throw ConfigError("mock seed is not an unsigned integer: " + it->second);
    }
  }
  if (auto it = scenario.params.find("script"); it != scenario.params.end()) {
    try {
      scenario.script = json::parse(io::read_file(it->second));
    } catch (const json::exception & e) {
      throw ConfigError("mock script " + it->second + " is not valid JSON: " + e.what());
    }
  }
  static const std::vector<std::string> known{"default", "strict", "canned"};
  if (std::find(known.begin(), known.end(), scenario.name) == known.end()) {
    throw ConfigError("unknown mock scenario '" + scenario.name + "'");
  }
  return scenario;
}

std::vector<float> mock_embedding(std::string_view text_in, std::uint64_t seed, std::size_t dimension)
{
  if (dimension == 0) throw ConfigError("mock embedding dimension must be positive");
  std::uint64_t state = text::fnv1a64(text_in) ^ (seed * 0x9E3779B97F4A7C15ULL);
  std::vector<double> raw(dimension);
  double norm = 0.0;
  for (auto & v : raw) {
    v = unit(text::splitmix64(state)) * 2.0 - 1.0;
    norm += v * v;
  }
  norm = std::sqrt(norm);
  if (norm == 0.0) {
    raw.assign(dimension, 0.0);
    raw[0] = 1.0;
    norm = 1.0;
  }
  std::vector<float> out(dimension);
  for (std::size_t i = 0; i < dimension; ++i) out[i] = static_cast<float>(raw[i] / norm);
  return out;
}

Image mock_edit(const Image & source, std::string_view instruction, EditMode mode, std::string_view placement)
{
  if (source.empty()) throw PreconditionError("mock edit needs a non-empty image");
  auto h = text::fnv1a64(text::canonicalize(instruction));
  Rgb color{
    static_cast<std::uint8_t>(h), static_cast<std::uint8_t>(h >> 8), static_cast<std::uint8_t>(h >> 16)};
  Image out = source;
  const int w = source.width;
  const int ht = source.height;
  const int last_row = ht - 1;  // scene-tag row stays untouched
  if (mode == EditMode::Add) {
    int x0 = w * 3 / 8, x1 = w * 5 / 8, y0 = ht / 2, y1 = ht * 7 / 8;
    if (placement == "roadside") {
      x0 = w * 3 / 4;
      x1 = w * 15 / 16;
      y0 = ht / 3;
      y1 = ht * 2 / 3;
    }
    x1 = std::max(x1, x0 + 1);
    y1 = std::min(std::max(y1, y0 + 1), last_row);
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < std::min(x1, w); ++x) {
        auto px = color;
        if (source.at(x, y) == px) px.r ^= 0x80;
        out.set(x, y, px);
      }
    }
  } else {
    for (int y = 0; y < std::max(last_row, 1); ++y) {
      for (int x = 0; x < w; ++x) {
        auto src = source.at(x, y);
        Rgb px{
          static_cast<std::uint8_t>((3 * src.r + color.r) / 4),
          static_cast<std::uint8_t>((3 * src.g + color.g) / 4),
          static_cast<std::uint8_t>((3 * src.b + color.b) / 4)};
        if (px == src) px.r ^= 1;
        out.set(x, y, px);
      }
    }
  }
  return out;
}

double apply_mode_speed(std::string_view mode, double speed)
{
  if (mode == "slow") return speed * 0.5;
  if (mode == "fast") return speed * 1.5;
  if (mode == "stop") return 0.0;
  return speed;
}

double apply_mode_steering(std::string_view mode, double steering)
{
  if (mode == "left") return steering + 0.3;
  if (mode == "right") return steering - 0.3;
  return steering;
}

MockTransport::MockTransport(BackendKind kind, MockScenario scenario)
: kind_(kind), scenario_(std::move(scenario))
{
  if (scenario_.script.contains("predict")) {
    for (const auto & [case_id, mode] : scenario_.script.at("predict").items()) {
      predict_modes_[text::fnv1a32(case_id)] = mode.get<std::string>();
    }
  }
}

json MockTransport::post(std::string_view route, const json & body, const std::string &)
{
  if (scenario_.number("down", 0) != 0) throw TransportFailure("mock endpoint is down");
  if (route != route_for(kind_)) {
    reject("unsupported_route", std::string(route) + " is not served by a " + to_string(kind_) + " mock");
  }
  validate_request(route, body);
  if (route == routes::kChat) return chat(body);
  if (route == routes::kEmbed) return embed(body);
  if (route == routes::kEdit) return edit(body);
  if (route == routes::kVideo) return video(body);
  return predict(body);
}

json MockTransport::chat(const json & body) const
{
  const auto prompt = body.at("prompt").get<std::string>();
  const auto subject = prompts::subject_of(prompt);
  const auto kind = prompts::classify(prompt);
  const auto salt = scenario_.string("salt", "");

  if (scenario_.script.contains("chat")) {
    for (const auto & rule : scenario_.script.at("chat")) {
      if (rule.contains("kind") && rule.at("kind").get<std::string>() != prompts::to_string(kind)) continue;
      auto pattern = rule.value("pattern", std::string{});
      if (text::to_lower(subject).find(text::to_lower(pattern)) == std::string::npos) continue;
      return json{{"text", rule.at("response").get<std::string>()}};
    }
  }
  if (scenario_.name == "strict" || kind == prompts::PromptKind::Unknown) {
    return json{{"text", std::string(kRefusalMarker)}};
  }

  switch (kind) {
    case prompts::PromptKind::RuleParser: {
      auto rule = quoted_after(subject, "Traffic rule: \"", "\"");
      auto token = system_token(prompt);
      if (scenario_.name == "canned") {
        return json{{"text", gherkin_text(token, "intersection", false, "a red light on the roadside", "slow down")}};
      }
      auto roads = parse_listing(prompt, prompts::kRoadTypeListing);
      auto adds = parse_listing(prompt, prompts::kAddsListing);
      auto replaces = parse_listing(prompt, prompts::kReplacesListing);
      auto behaviors = parse_listing(prompt, prompts::kBehaviorListing);
      if (roads.empty() || behaviors.empty() || (adds.empty() && replaces.empty())) {
        return json{{"text", "I cannot find the ontology elements in this request."}};
      }
      auto canonical_rule = text::canonicalize(rule);

      std::string road(ontology::kAnyRoads);
      if (const auto * hit = longest_mentioned(canonical_rule, roads)) road = hit->name;

      std::vector<std::pair<Listing, bool>> targets;
      for (const auto & t : adds) targets.emplace_back(t, false);
      for (const auto & t : replaces) targets.emplace_back(t, true);
      const std::pair<Listing, bool> * target = nullptr;
      for (const auto & t : targets) {
        if (mentions(canonical_rule, t.first.name) &&
            (!target || t.first.name.size() > target->first.name.size())) {
          target = &t;
        }
      }
      if (!target) target = &pick(targets, mix(scenario_.seed, salt, {"target", canonical_rule}));

      std::string behavior = behavior_heuristic(rule);
      if (std::none_of(behaviors.begin(), behaviors.end(), [&](const Listing & b) { return b.name == behavior; })) {
        behavior = behaviors.front().name;
      }

      Listing chosen_road{road, {}};
      auto chosen_target = *target;
      double noise = scenario_.number("noise", 0.0);
      if (unit(mix(scenario_.seed, salt, {"noise", canonical_rule})) < noise) {
        auto h = mix(scenario_.seed, salt, {"noise-slot", canonical_rule});
        switch (h % 3) {
          case 0: behavior = pick(behaviors, h >> 8).name; break;
          case 1: chosen_road = pick(roads, h >> 8); break;
          default: chosen_target = pick(targets, h >> 8); break;
        }
      }
      bool repl = chosen_target.second;
      std::string reply;
      reply += "Step 1: the Road Type element is " + chosen_road.name + ".\n";
      reply += "Step 2: the Manipulation element is " + chosen_target.first.name + ".\n";
      reply += std::string("Step 3: the verb is ") + (repl ? "replaces" : "adds") + ".\n";
      reply += "Step 4: the Ego-Vehicle Expected Behavior element is " + behavior + ".\n\n";
      reply += gherkin_text(token, chosen_road.name, repl, phrase_for(chosen_target.first, repl), behavior);
      return json{{"text", reply}};
    }

    case prompts::PromptKind::MrValidation: {
      if (scenario_.name == "canned") return json{{"text", "[\"yes\", \"yes\", \"yes\"]"}};
      auto rule = quoted_after(subject, "Traffic rule: \"", "\",\nMR:");
      auto gherkin = quoted_after(subject, "MR: \"", "\"");
      auto canonical_rule = text::canonicalize(rule);
      bool q1 = false, q2 = false;
      try {
        auto slots = mr::parse_gherkin_slots(gherkin);
        auto road = text::canonicalize(slots.road_type);
        auto split = mr::split_placement(text::canonicalize(slots.manipulation));
        auto core = split.core;
        if (auto with = core.find(" with "); with != std::string::npos) core = core.substr(with + 6);
        for (auto article : {"a ", "an ", "the "}) {
          if (core.rfind(article, 0) == 0) core = core.substr(std::string_view(article).size());
        }
        bool road_ok = road == ontology::kAnyRoads || mentions(canonical_rule, road);
        q1 = road_ok && mentions(canonical_rule, core);
        q2 = text::canonicalize(slots.expected_behavior) == behavior_heuristic(rule);
      } catch (const GrammarError &) {
      }
      bool q3 = unit(mix(scenario_.seed, salt, {"consistency", canonical_rule, gherkin})) >=
                scenario_.number("inconsistency", 0.05);
      auto a = [](bool yes) { return yes ? std::string("\"yes\"") : std::string("\"no\""); };
      return json{{"text", "[" + a(q1) + ", " + a(q2) + ", " + a(q3) + "]"}};
    }

    case prompts::PromptKind::SceneAnalysis: {
      if (scenario_.name == "canned") return json{{"text", kCannedScene}};
      auto images = decode_images(body);
      if (images.empty()) return json{{"text", std::string(kRefusalMarker)}};
      const auto & frame = images[images.size() / 2];
      std::uint64_t h = 0;
      std::string time, weather, road;
      if (auto tag = read_scene_tag(frame)) {
        time = kTimesOfDay[tag->time % kTimesOfDay.size()];
        weather = kWeathers[tag->weather % kWeathers.size()];
        road = kRoadKinds[tag->road % kRoadKinds.size()];
        h = mix(scenario_.seed, salt, {"objects", std::to_string(tag->case_key)});
      } else {
        h = mix(scenario_.seed, salt, {"scene", image_bytes(frame)});
        time = pick(kTimesOfDay, h);
        weather = pick(kWeathers, h >> 8);
        road = pick(kRoadKinds, h >> 16);
      }
      std::vector<std::string> objects;
      for (int i = 0; i < 3; ++i) {
        std::string object(pick(kSceneObjects, h >> (24 + 8 * i)));
        if (std::find(objects.begin(), objects.end(), object) == objects.end()) objects.push_back(object);
      }
      std::string object_list;
      for (std::size_t i = 0; i < objects.size(); ++i) object_list += (i ? ", " : "") + objects[i];
      return json{{"text", "time: " + capitalize(time) + ", weather: " + capitalize(weather) +
                             ", road type: " + capitalize(road) + ", objects: " + capitalize(object_list)}};
    }

    case prompts::PromptKind::MrMatch: {
      if (scenario_.number("match_out_of_set", 0) != 0) {
        return json{{"text", "Index: 999999\nRationale: out-of-set choice"}};
      }
      std::string road;
      auto rep = json::parse(subject, nullptr, false);
      if (!rep.is_discarded() && rep.is_object() && rep.contains("Test Case Representation")) {
        road = text::canonicalize(rep["Test Case Representation"].value("RoadType", ""));
      }
      struct Row { long long index; std::string road; long long count; };
      std::vector<Row> rows;
      for (const auto & line : text::split_lines(prompt)) {
        if (line.rfind(prompts::kCandidatePrefix, 0) != 0) continue;
        Row row{-1, {}, 0};
        for (const auto & field : text::split(line.substr(2), ';')) {
          auto f = text::trim(field);
          if (f.rfind("Index: ", 0) == 0) row.index = std::stoll(f.substr(7));
          if (f.rfind("Road Type: ", 0) == 0) row.road = text::canonicalize(f.substr(11));
          if (f.rfind("Execution Count: ", 0) == 0) row.count = std::stoll(f.substr(17));
        }
        rows.push_back(std::move(row));
      }
      if (rows.empty()) return json{{"text", std::string(kRefusalMarker)}};
      const Row * best = nullptr;
      auto fits = [&](const Row & r) { return r.road == road || r.road == ontology::kAnyRoads; };
      bool any_fit = std::any_of(rows.begin(), rows.end(), fits);
      for (const auto & r : rows) {
        if (any_fit && !fits(r)) continue;
        if (!best || r.count < best->count) best = &r;
      }
      return json{{"text", "Index: " + std::to_string(best->index) +
                             "\nRationale: road type matches and it has the lowest execution count."}};
    }

    case prompts::PromptKind::ScenarioAlignment: {
      auto images = decode_images(body);
      if (images.size() < 2) return json{{"text", std::string(kRefusalMarker)}};
      auto a = read_scene_tag(images[0]);
      auto b = read_scene_tag(images[1]);
      return json{{"text", yes_no(!a || !b || a->road == b->road)}};
    }

    case prompts::PromptKind::ManipulationVerification: {
      auto images = decode_images(body);
      if (images.size() < 2) return json{{"text", std::string(kRefusalMarker)}};
      const auto & original = images[0];
      const auto & edited = images[1];
      if (original == edited) return json{{"text", "No"}};
      auto e = quoted_after(prompt, prompts::kManipulationQuote, "\"");
      bool aligned = mock_edit(original, e, EditMode::Add, "on_road") == edited ||
                     mock_edit(original, e, EditMode::Add, "roadside") == edited ||
                     mock_edit(original, e, EditMode::Replace, "global") == edited;
      return json{{"text", yes_no(aligned)}};
    }

    case prompts::PromptKind::Unknown: break;
  }
  return json{{"text", std::string(kRefusalMarker)}};
}

json MockTransport::embed(const json & body) const
{
  auto dim = static_cast<std::size_t>(scenario_.number("dim", 64));
  json vectors = json::array();
  for (const auto & item : body.at("texts")) {
    auto t = item.get<std::string>();
    json scripted;
    if (scenario_.script.contains("embed")) {
      for (const auto & rule : scenario_.script.at("embed")) {
        if (t.find(rule.at("pattern").get<std::string>()) != std::string::npos) {
          scripted = rule.at("vector");
          break;
        }
      }
    }
    vectors.push_back(scripted.is_null() ? json(mock_embedding(t, scenario_.seed, dim)) : scripted);
  }
  return json{{"vectors", vectors}};
}

json MockTransport::edit(const json & body) const
{
  auto mode = body.at("mode").get<std::string>() == "add" ? EditMode::Add : EditMode::Replace;
  if (mode == EditMode::Add && !body.contains("mask_classes")) {
    reject("edit_rejected", "add mode requires mask_classes for the segmentation step");
  }
  auto encoded = body.at("image_b64").get<std::string>();
  Image source;
  try {
    source = image_from_b64(encoded);
  } catch (const Error & e) {
    reject("bad_image", std::string("image does not decode: ") + e.what());
  }
  auto instruction = body.at("instruction").get<std::string>();
  if (text::trim(instruction).empty()) reject("edit_rejected", "empty instruction");
  double weak = scenario_.number("weak", 0.0);
  if (unit(mix(scenario_.seed, scenario_.string("salt", ""), {"weak", instruction, encoded})) < weak) {
    return json{{"image_b64", encoded}};
  }
  auto placement = body.value("placement", std::string(mode == EditMode::Add ? "on_road" : "global"));
  return json{{"image_b64", image_to_b64(mock_edit(source, instruction, mode, placement))}};
}

json MockTransport::video(const json & body) const
{
  auto keyframe = image_from_b64(body.at("image_b64").get<std::string>());
  auto speeds = body.at("speed_mps").get<std::vector<double>>();
  auto steering = body.at("steering_rad").get<std::vector<double>>();
  auto count = body.at("frame_count").get<int>();
  if (speeds.size() != static_cast<std::size_t>(count) || steering.size() != static_cast<std::size_t>(count)) {
    reject("video_rejected", "dynamics series length differs from frame_count");
  }
  if (keyframe.width < kWatermarkWidth || keyframe.height < kWatermarkHeight + 1) {
    reject("video_rejected", "keyframe too small");
  }
  int produced = scenario_.number("short", 0) != 0 ? count - 1 : count;
  auto tag = read_scene_tag(keyframe);
  json frames = json::array();
  for (int i = 0; i < produced; ++i) {
    Image frame = keyframe;
    if (tag) {
      auto t = *tag;
      t.frame_index = static_cast<std::uint16_t>(i);
      t.speed_mps = static_cast<float>(speeds[static_cast<std::size_t>(i)]);
      t.steering_rad = static_cast<float>(steering[static_cast<std::size_t>(i)]);
      write_scene_tag(frame, t);
    }
    write_watermark(frame, static_cast<std::uint16_t>(i));
    frames.push_back(image_to_b64(frame));
  }
  return json{{"frames", frames}};
}

json MockTransport::predict(const json & body) const
{
  const auto salt = scenario_.string("salt", "");
  const double gain = scenario_.number("gain", 1.0);
  const double offset = scenario_.number("offset", 0.0);
  const double steer_gain = scenario_.number("steer_gain", 1.0);
  const double steer_offset = scenario_.number("steer_offset", 0.0);
  const double jitter = scenario_.number("jitter", 0.0);
  const auto default_mode = scenario_.string("default", "keep");

  json speeds = json::array();
  json steering = json::array();
  std::size_t index = 0;
  for (const auto & item : body.at("frames")) {
    auto frame = image_from_b64(item.get<std::string>());
    double base_speed = 0.0;
    double base_steer = 0.0;
    std::string noise_key;
    std::optional<std::uint32_t> case_key;
    if (auto tag = read_scene_tag(frame)) {
      base_speed = tag->speed_mps;
      base_steer = tag->steering_rad;
      case_key = tag->case_key;
      noise_key = std::to_string(tag->case_key) + "/" + std::to_string(tag->frame_index);
    } else {
      auto h = mix(scenario_.seed, salt, {"predict", image_bytes(frame)});
      base_speed = 2.0 + 18.0 * unit(h);
      base_steer = unit(text::splitmix64(h)) - 0.5;
      noise_key = std::to_string(index);
    }
    double speed = gain * base_speed + offset;
    double steer = steer_gain * base_steer + steer_offset;
    if (jitter != 0.0) {
      speed += jitter * (2.0 * unit(mix(scenario_.seed, salt, {"jitter-speed", noise_key})) - 1.0);
      steer += jitter * (2.0 * unit(mix(scenario_.seed, salt, {"jitter-steer", noise_key})) - 1.0);
    }
    if (read_watermark(frame)) {
      std::string mode = default_mode;
      if (case_key) {
        if (auto it = predict_modes_.find(*case_key); it != predict_modes_.end()) mode = it->second;
      }
      if (mode == "mixed") {
        static const std::vector<std::string> modes{"slow", "keep", "left", "right", "fast"};
        mode = pick(modes, mix(scenario_.seed, salt, {"mode", std::to_string(case_key.value_or(0))}));
      }
      speed = apply_mode_speed(mode, speed);
      steer = apply_mode_steering(mode, steer);
    }
    speeds.push_back(speed);
    steering.push_back(steer);
    ++index;
  }
  return json{{"speed_mps", speeds}, {"steering_rad", steering}};
}

}  // namespace automt::backends
