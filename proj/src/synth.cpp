#include "automt/synth.hpp"

#include "automt/io.hpp"
#include "automt/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>

namespace automt::synth
{

namespace
{

Rgb sky_color(std::uint8_t weather, std::uint8_t time)
{
  Rgb c{110, 160, 225};
  if (weather == 1) c = {150, 155, 165};
  if (weather == 2) c = {95, 100, 115};
  if (weather == 3) c = {190, 190, 190};
  if (time == 2) c = {static_cast<std::uint8_t>(c.r * 3 / 4 + 40), static_cast<std::uint8_t>(c.g * 3 / 5), static_cast<std::uint8_t>(c.b / 2)};
  if (time == 3) c = {static_cast<std::uint8_t>(c.r / 5), static_cast<std::uint8_t>(c.g / 5), static_cast<std::uint8_t>(c.b / 4)};
  return c;
}

std::string case_name(std::size_t number)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "case_%03zu", number);
  return buf;
}

}  // namespace

Image render_frame(const FrameSpec & spec, std::size_t frame_index, float speed_mps, float steering_rad,
                   int width, int height, std::uint64_t seed)
{
  Image img(width, height, sky_color(spec.weather, spec.time));
  const int horizon = height * 2 / 5;
  const Rgb ground = spec.road == 2 ? Rgb{120, 100, 70} : Rgb{70, 120, 60};
  img.fill_rect(0, horizon, width, height, ground);

  // Road trapezoid narrowing towards the horizon; the centre drifts with steering.
  const int shift = static_cast<int>(steering_rad * static_cast<float>(width) / 2.0F);
  for (int y = horizon; y < height; ++y) {
    int depth = y - horizon;
    int half = width / 12 + depth * width / (2 * (height - horizon));
    int centre = width / 2 - shift * (height - y) / (height - horizon);
    img.fill_rect(std::max(0, centre - half), y, std::min(width, centre + half + 1), y + 1, Rgb{85, 85, 90});
    if (spec.road != 2 && (y + static_cast<int>(frame_index)) % 6 < 3) img.set(std::clamp(centre, 0, width - 1), y, Rgb{235, 235, 235});
  }
  if (spec.road == 1) {
    for (int x = width / 4; x < 3 * width / 4; x += 4) img.fill_rect(x, height * 3 / 4, x + 2, height * 3 / 4 + 3, Rgb{240, 240, 240});
  }

  // A few roadside objects placed from the case hash.
  std::uint64_t state = text::fnv1a64(spec.case_id) ^ seed;
  for (int i = 0; i < 3; ++i) {
    auto h = text::splitmix64(state);
    int w = 4 + static_cast<int>(h % 6);
    int x = static_cast<int>((h >> 8) % static_cast<std::uint64_t>(std::max(1, width - w)));
    int y = horizon - 2 + static_cast<int>((h >> 16) % static_cast<std::uint64_t>(std::max(1, height / 3)));
    Rgb color{static_cast<std::uint8_t>(h >> 24), static_cast<std::uint8_t>(h >> 32), static_cast<std::uint8_t>(h >> 40)};
    img.fill_rect(x, y, std::min(width, x + w), std::min(height - 1, y + w / 2 + 2), color);
  }

  backends::SceneTag tag;
  tag.case_key = text::fnv1a32(spec.case_id);
  tag.frame_index = static_cast<std::uint16_t>(frame_index);
  tag.road = spec.road;
  tag.weather = spec.weather;
  tag.time = spec.time;
  tag.speed_mps = speed_mps;
  tag.steering_rad = steering_rad;
  backends::write_scene_tag(img, tag);
  return img;
}

scene::SourceTestCase make_case(std::size_t number, const CorpusOptions & options)
{
  scene::SourceTestCase test_case;
  test_case.id = case_name(number);
  std::uint64_t state = text::fnv1a64(test_case.id) ^ (options.seed * 0x9E3779B97F4A7C15ULL);
  FrameSpec spec;
  spec.case_id = test_case.id;
  spec.road = static_cast<std::uint8_t>(number % backends::kRoadKinds.size());
  spec.weather = static_cast<std::uint8_t>(text::splitmix64(state) % backends::kWeathers.size());
  spec.time = static_cast<std::uint8_t>(text::splitmix64(state) % backends::kTimesOfDay.size());

  // Base speed 4..14 m/s in 1/2 steps, per-frame wobble in 1/16 steps.
  double base_speed = 4.0 + 0.5 * static_cast<double>(text::splitmix64(state) % 21);
  double base_steer = static_cast<double>(static_cast<int>(text::splitmix64(state) % 17) - 8) / 64.0;
  for (std::size_t f = 0; f < options.frames; ++f) {
    double speed = base_speed + static_cast<double>(static_cast<int>(text::splitmix64(state) % 9) - 4) / 16.0;
    double steer = base_steer + static_cast<double>(static_cast<int>(text::splitmix64(state) % 5) - 2) / 64.0;
    test_case.speed_mps.push_back(speed);
    test_case.steering_rad.push_back(steer);
    test_case.frames.push_back(render_frame(
      spec, f, static_cast<float>(speed), static_cast<float>(steer), options.width, options.height, options.seed));
  }
  return test_case;
}

void write_case(const std::filesystem::path & directory, const scene::SourceTestCase & test_case)
{
  std::filesystem::create_directories(directory);
  for (std::size_t i = 0; i < test_case.frames.size(); ++i) {
    write_png(scene::frame_path(directory, i), test_case.frames[i]);
  }
  nlohmann::json telemetry{{"speed_mps", test_case.speed_mps}, {"steering_rad", test_case.steering_rad}};
  if (!test_case.region.empty()) telemetry["region"] = test_case.region;
  io::write_file_atomic(directory / "telemetry.json", io::dump_pretty(telemetry));
}

std::vector<std::string> write_corpus(const std::filesystem::path & directory, const CorpusOptions & options)
{
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < options.cases; ++i) {
    auto test_case = make_case(i, options);
    write_case(directory / test_case.id, test_case);
    ids.push_back(test_case.id);
  }
  return ids;
}

}  // namespace automt::synth
