#include "fga/imageio/png.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "fga/imageio/frame.hpp"

namespace fga::io {

void write_png(const std::string& path, const Frame& rgb) {
  if (rgb.color_space() != ColorSpace::kRgb) throw std::invalid_argument("write_png expects an RGB frame");
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(rgb.width());
  img.height = static_cast<png_uint_32>(rgb.height());
  img.format = PNG_FORMAT_RGB;
  std::vector<png_byte> buf(static_cast<std::size_t>(rgb.width()) * rgb.height() * 3);
  for (std::size_t i = 0; i < buf.size() / 3; ++i)
    for (int c = 0; c < 3; ++c)
      buf[i * 3 + c] = static_cast<png_byte>(std::clamp(std::round(rgb.plane(c).data[i]), 0.0f, 255.0f));
  if (!png_image_write_to_file(&img, path.c_str(), 0, buf.data(), 0, nullptr))
    throw DataError(std::string("png write failed: ") + img.message);
}

Frame read_png(const std::string& path) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str()))
    throw DataError(path + ": " + img.message);
  img.format = PNG_FORMAT_RGB;
  std::vector<png_byte> buf(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr)) {
    png_image_free(&img);
    throw DataError(path + ": " + img.message);
  }
  Frame f(static_cast<int>(img.width), static_cast<int>(img.height), ColorSpace::kRgb);
  for (std::size_t i = 0; i < buf.size() / 3; ++i)
    for (int c = 0; c < 3; ++c) f.plane(c).data[i] = buf[i * 3 + c];
  return f;
}

}  // namespace fga::io
