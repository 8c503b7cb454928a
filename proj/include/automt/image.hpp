#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace automt
{

struct Rgb
{
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  bool operator==(const Rgb &) const = default;
};

// Packed 8-bit RGB, row-major.
struct Image
{
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  Image() = default;
  Image(int w, int h, Rgb fill = {});

  bool empty() const noexcept { return width <= 0 || height <= 0; }
  Rgb at(int x, int y) const;
  void set(int x, int y, Rgb value);
  void fill_rect(int x0, int y0, int x1, int y1, Rgb value);

  bool operator==(const Image &) const = default;
};

std::string encode_png(const Image & image);
Image decode_png(std::string_view bytes);

Image read_png(const std::filesystem::path & path);
void write_png(const std::filesystem::path & path, const Image & image);

}  // namespace automt
