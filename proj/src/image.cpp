#include "automt/image.hpp"

#include "automt/error.hpp"
#include "automt/io.hpp"

#include <png.h>

#include <algorithm>
#include <cstring>

namespace automt
{

Image::Image(int w, int h, Rgb fill) : width(w), height(h)
{
  if (w <= 0 || h <= 0) throw PreconditionError("image dimensions must be positive");
  rgb.resize(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3);
  for (std::size_t i = 0; i < rgb.size(); i += 3) {
    rgb[i] = fill.r;
    rgb[i + 1] = fill.g;
    rgb[i + 2] = fill.b;
  }
}

Rgb Image::at(int x, int y) const
{
  auto i = (static_cast<std::size_t>(y) * width + x) * 3;
  return {rgb[i], rgb[i + 1], rgb[i + 2]};
}

void Image::set(int x, int y, Rgb value)
{
  auto i = (static_cast<std::size_t>(y) * width + x) * 3;
  rgb[i] = value.r;
  rgb[i + 1] = value.g;
  rgb[i + 2] = value.b;
}

void Image::fill_rect(int x0, int y0, int x1, int y1, Rgb value)
{
  x0 = std::clamp(x0, 0, width);
  x1 = std::clamp(x1, 0, width);
  y0 = std::clamp(y0, 0, height);
  y1 = std::clamp(y1, 0, height);
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) set(x, y, value);
  }
}

namespace
{

struct ReadCursor
{
  const unsigned char * data;
  std::size_t size;
  std::size_t offset;
};

void read_from_memory(png_structp png, png_bytep out, png_size_t length)
{
  auto * cursor = static_cast<ReadCursor *>(png_get_io_ptr(png));
  if (cursor->offset + length > cursor->size) png_error(png, "truncated PNG stream");
  std::memcpy(out, cursor->data + cursor->offset, length);
  cursor->offset += length;
}

void write_to_memory(png_structp png, png_bytep data, png_size_t length)
{
  auto * out = static_cast<std::string *>(png_get_io_ptr(png));
  out->append(reinterpret_cast<const char *>(data), length);
}

void flush_noop(png_structp) {}

void error_handler(png_structp png, png_const_charp message)
{
  auto * buffer = static_cast<std::string *>(png_get_error_ptr(png));
  if (buffer != nullptr) *buffer = message;
  png_longjmp(png, 1);
}

void warning_handler(png_structp, png_const_charp) {}

}  // namespace

std::string encode_png(const Image & image)
{
  if (image.empty()) throw PreconditionError("cannot encode an empty image");
  std::string error_message;
  std::string out;
  png_structp png =
    png_create_write_struct(PNG_LIBPNG_VER_STRING, &error_message, error_handler, warning_handler);
  if (png == nullptr) throw Error("png_error", "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    throw Error("png_error", "png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("png_error", "PNG encode failed: " + error_message);
  }
  png_set_write_fn(png, &out, write_to_memory, flush_noop);
  png_set_IHDR(
    png, info, static_cast<png_uint_32>(image.width), static_cast<png_uint_32>(image.height), 8,
    PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  for (int y = 0; y < image.height; ++y) {
    auto * row = const_cast<png_bytep>(image.rgb.data() + static_cast<std::size_t>(y) * image.width * 3);
    png_write_row(png, row);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

Image decode_png(std::string_view bytes)
{
  if (bytes.size() < 8 ||
      png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8) != 0) {
    throw ParseError("data is not a PNG image");
  }
  std::string error_message;
  png_structp png =
    png_create_read_struct(PNG_LIBPNG_VER_STRING, &error_message, error_handler, warning_handler);
  if (png == nullptr) throw Error("png_error", "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error("png_error", "png_create_info_struct failed");
  }
  ReadCursor cursor{reinterpret_cast<const unsigned char *>(bytes.data()), bytes.size(), 0};
  Image image;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ParseError("PNG decode failed: " + error_message);
  }
  png_set_read_fn(png, &cursor, read_from_memory);
  png_read_info(png, info);
  png_set_expand(png);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_gray_to_rgb(png);
  png_read_update_info(png, info);
  image.width = static_cast<int>(png_get_image_width(png, info));
  image.height = static_cast<int>(png_get_image_height(png, info));
  if (png_get_rowbytes(png, info) != static_cast<png_size_t>(image.width) * 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ParseError("unsupported PNG pixel layout");
  }
  image.rgb.resize(static_cast<std::size_t>(image.width) * image.height * 3);
  std::vector<png_bytep> rows(static_cast<std::size_t>(image.height));
  for (int y = 0; y < image.height; ++y) {
    rows[static_cast<std::size_t>(y)] = image.rgb.data() + static_cast<std::size_t>(y) * image.width * 3;
  }
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return image;
}

Image read_png(const std::filesystem::path & path) { return decode_png(io::read_file(path)); }

void write_png(const std::filesystem::path & path, const Image & image)
{
  io::write_file_atomic(path, encode_png(image));
}

}  // namespace automt
