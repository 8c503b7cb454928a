#pragma once

#include "automt/image.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace automt::backends
{

// Scene metadata stamped into the bottom pixel row of synthetic frames so the
// mock vision, alignment and predictor endpoints can answer deterministically.
// Byte b of the payload is stored as pixel (R = b, G = 255 - b, B = 0x5A).
struct SceneTag
{
  std::uint32_t case_key = 0;  // fnv1a32 of the case id
  std::uint16_t frame_index = 0;
  std::uint8_t road = 0;
  std::uint8_t weather = 0;
  std::uint8_t time = 0;
  float speed_mps = 0.0F;
  float steering_rad = 0.0F;

  bool operator==(const SceneTag &) const = default;
};

inline constexpr int kSceneTagPixels = 22;

void write_scene_tag(Image & image, const SceneTag & tag);
std::optional<SceneTag> read_scene_tag(const Image & image);

// Frame-index watermark drawn by the mock video endpoint into a 16x2 block at
// the top-left corner.
inline constexpr int kWatermarkWidth = 16;
inline constexpr int kWatermarkHeight = 2;

void write_watermark(Image & image, std::uint16_t frame_index);
std::optional<std::uint16_t> read_watermark(const Image & image);

// Lookup tables shared by the synthetic corpus and the mock scene analyzer.
inline constexpr std::array<std::string_view, 4> kTimesOfDay{"morning", "afternoon", "evening", "night"};
inline constexpr std::array<std::string_view, 4> kWeathers{"clear", "cloudy", "rain", "fog"};
inline constexpr std::array<std::string_view, 6> kRoadKinds{
  "intersection", "crosswalk", "field path", "highway", "roundabout", "residential street"};

std::uint8_t road_id(std::string_view road_type);

}  // namespace automt::backends
