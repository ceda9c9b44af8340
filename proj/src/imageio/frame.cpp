#include "fga/imageio/frame.hpp"

#include <fmt/format.h>

namespace fga::io {

const char* to_string(ColorSpace cs) {
  switch (cs) {
    case ColorSpace::kRgb: return "RGB";
    case ColorSpace::kYuv420: return "YUV420";
    case ColorSpace::kYuv444: return "YUV444";
  }
  return "?";
}

Plane::Plane(int w, int h, float fill)
    : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {
  if (w <= 0 || h <= 0) throw std::invalid_argument(fmt::format("plane size {}x{} must be positive", w, h));
}

Frame::Frame(int width, int height, ColorSpace cs, float fill)
    : width_(width), height_(height), color_space_(cs) {
  if (width <= 0 || height <= 0)
    throw std::invalid_argument(fmt::format("frame size {}x{} must be positive", width, height));
  if (cs == ColorSpace::kYuv420) {
    if (width % 2 || height % 2)
      throw DataError(fmt::format("YUV420 needs even dimensions, got {}x{}", width, height));
    planes_ = {Plane(width, height, fill), Plane(width / 2, height / 2, fill),
               Plane(width / 2, height / 2, fill)};
  } else {
    planes_ = {Plane(width, height, fill), Plane(width, height, fill), Plane(width, height, fill)};
  }
}

void Frame::validate() const {
  if (planes_.size() != 3) throw DataError("frame must hold 3 planes");
  for (int i = 0; i < 3; ++i) {
    const Plane& p = planes_[i];
    const bool sub = color_space_ == ColorSpace::kYuv420 && i > 0;
    const int ew = sub ? width_ / 2 : width_;
    const int eh = sub ? height_ / 2 : height_;
    if (p.width != ew || p.height != eh || p.data.size() != static_cast<std::size_t>(ew) * eh)
      throw DataError(fmt::format("plane {} is {}x{}, expected {}x{}", i, p.width, p.height, ew, eh));
    for (float v : p.data)
      if (!(v >= 0.0f && v <= 255.0f)) throw DataError(fmt::format("plane {} holds out-of-range sample {}", i, v));
  }
}

Plane luma_plane(const Frame& rgb) {
  if (rgb.color_space() != ColorSpace::kRgb) throw std::invalid_argument("luma_plane expects RGB");
  Plane out(rgb.width(), rgb.height());
  const auto& r = rgb.plane(0).data;
  const auto& g = rgb.plane(1).data;
  const auto& b = rgb.plane(2).data;
  for (std::size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = 0.2126f * r[i] + 0.7152f * g[i] + 0.0722f * b[i];
  return out;
}

}  // namespace fga::io
