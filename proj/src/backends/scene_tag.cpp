#include "automt/backends/scene_tag.hpp"

#include "automt/error.hpp"
#include "automt/text.hpp"

#include <bit>
#include <cstring>
#include <vector>

namespace automt::backends
{

namespace
{

constexpr std::uint8_t kTagBlue = 0x5A;
constexpr std::uint8_t kMarkBlue = 0xA5;
constexpr std::array<std::uint8_t, 4> kTagMagic{'A', 'M', 'T', '1'};
constexpr std::array<std::uint8_t, 4> kMarkMagic{'A', 'M', 'T', 'V'};

void put_u32(std::vector<std::uint8_t> & out, std::uint32_t v)
{
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::vector<std::uint8_t> & in, std::size_t at)
{
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[at + i]) << (8 * i);
  return v;
}

void encode_row(Image & image, int y, int x0, const std::vector<std::uint8_t> & bytes, std::uint8_t blue)
{
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    image.set(x0 + static_cast<int>(i), y, Rgb{bytes[i], static_cast<std::uint8_t>(255 - bytes[i]), blue});
  }
}

std::optional<std::vector<std::uint8_t>> decode_row(
  const Image & image, int y, int x0, int count, std::uint8_t blue)
{
  if (image.width < x0 + count || y < 0 || y >= image.height) return std::nullopt;
  std::vector<std::uint8_t> bytes;
  bytes.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    auto px = image.at(x0 + i, y);
    if (px.b != blue || static_cast<int>(px.r) + static_cast<int>(px.g) != 255) return std::nullopt;
    bytes.push_back(px.r);
  }
  return bytes;
}

}  // namespace

void write_scene_tag(Image & image, const SceneTag & tag)
{
  if (image.width < kSceneTagPixels || image.height < 1) {
    throw PreconditionError("image too small for a scene tag");
  }
  std::vector<std::uint8_t> bytes(kTagMagic.begin(), kTagMagic.end());
  put_u32(bytes, tag.case_key);
  bytes.push_back(static_cast<std::uint8_t>(tag.frame_index & 0xFF));
  bytes.push_back(static_cast<std::uint8_t>(tag.frame_index >> 8));
  bytes.push_back(tag.road);
  bytes.push_back(tag.weather);
  bytes.push_back(tag.time);
  bytes.push_back(0);
  put_u32(bytes, std::bit_cast<std::uint32_t>(tag.speed_mps));
  put_u32(bytes, std::bit_cast<std::uint32_t>(tag.steering_rad));
  encode_row(image, image.height - 1, 0, bytes, kTagBlue);
}

std::optional<SceneTag> read_scene_tag(const Image & image)
{
  auto bytes = decode_row(image, image.height - 1, 0, kSceneTagPixels, kTagBlue);
  if (!bytes || !std::equal(kTagMagic.begin(), kTagMagic.end(), bytes->begin())) return std::nullopt;
  SceneTag tag;
  tag.case_key = get_u32(*bytes, 4);
  tag.frame_index = static_cast<std::uint16_t>((*bytes)[8] | ((*bytes)[9] << 8));
  tag.road = (*bytes)[10];
  tag.weather = (*bytes)[11];
  tag.time = (*bytes)[12];
  tag.speed_mps = std::bit_cast<float>(get_u32(*bytes, 14));
  tag.steering_rad = std::bit_cast<float>(get_u32(*bytes, 18));
  return tag;
}

void write_watermark(Image & image, std::uint16_t frame_index)
{
  if (image.width < kWatermarkWidth || image.height < kWatermarkHeight + 1) {
    throw PreconditionError("image too small for a watermark");
  }
  std::vector<std::uint8_t> bytes(kMarkMagic.begin(), kMarkMagic.end());
  bytes.push_back(static_cast<std::uint8_t>(frame_index & 0xFF));
  bytes.push_back(static_cast<std::uint8_t>(frame_index >> 8));
  bytes.resize(kWatermarkWidth, 0);
  for (int y = 0; y < kWatermarkHeight; ++y) encode_row(image, y, 0, bytes, kMarkBlue);
}

std::optional<std::uint16_t> read_watermark(const Image & image)
{
  auto bytes = decode_row(image, 0, 0, kWatermarkWidth, kMarkBlue);
  if (!bytes || !std::equal(kMarkMagic.begin(), kMarkMagic.end(), bytes->begin())) return std::nullopt;
  return static_cast<std::uint16_t>((*bytes)[4] | ((*bytes)[5] << 8));
}

std::uint8_t road_id(std::string_view road_type)
{
  auto canonical = text::canonicalize(road_type);
  for (std::size_t i = 0; i < kRoadKinds.size(); ++i) {
    if (kRoadKinds[i] == canonical) return static_cast<std::uint8_t>(i);
  }
  throw PreconditionError("no synthetic road id for '" + canonical + "'");
}

}  // namespace automt::backends
