#include "fga/imageio/geometry.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace fga::io {

PaddedFrame pad_to_multiple(const Frame& f, int m) {
  if (m < 1) throw std::invalid_argument(fmt::format("pad multiple must be >= 1, got {}", m));
  if (f.color_space() == ColorSpace::kYuv420 && m % 2)
    throw std::invalid_argument("YUV420 padding needs an even multiple");
  const int w = (f.width() + m - 1) / m * m;
  const int h = (f.height() + m - 1) / m * m;
  PaddedFrame out{Frame(w, h, f.color_space()), f.width(), f.height()};
  for (int p = 0; p < 3; ++p) {
    const Plane& src = f.plane(p);
    Plane& dst = out.frame.plane(p);
    for (int y = 0; y < dst.height; ++y)
      for (int x = 0; x < dst.width; ++x)
        dst.at(x, y) = src.at(std::min(x, src.width - 1), std::min(y, src.height - 1));
  }
  return out;
}

Frame crop(const Frame& f, int width, int height) {
  if (width > f.width() || height > f.height())
    throw std::invalid_argument(
        fmt::format("crop {}x{} exceeds frame {}x{}", width, height, f.width(), f.height()));
  Frame out(width, height, f.color_space());
  for (int p = 0; p < 3; ++p) {
    Plane& dst = out.plane(p);
    for (int y = 0; y < dst.height; ++y)
      for (int x = 0; x < dst.width; ++x) dst.at(x, y) = f.plane(p).at(x, y);
  }
  return out;
}

Plane resize_bilinear(const Plane& p, int width, int height) {
  if (width == p.width && height == p.height) return p;
  Plane out(width, height);
  const double sx = static_cast<double>(p.width) / width;
  const double sy = static_cast<double>(p.height) / height;
  std::vector<int> x0(width), x1(width);
  std::vector<float> fx(width);
  for (int x = 0; x < width; ++x) {
    const double s = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(p.width - 1));
    x0[x] = static_cast<int>(s);
    x1[x] = std::min(x0[x] + 1, p.width - 1);
    fx[x] = static_cast<float>(s - x0[x]);
  }
  for (int y = 0; y < height; ++y) {
    const double s = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(p.height - 1));
    const int y0 = static_cast<int>(s);
    const int y1 = std::min(y0 + 1, p.height - 1);
    const float fy = static_cast<float>(s - y0);
    for (int x = 0; x < width; ++x) {
      const float v00 = p.at(x0[x], y0), v01 = p.at(x1[x], y0);
      const float v10 = p.at(x0[x], y1), v11 = p.at(x1[x], y1);
      const float top = v00 + fx[x] * (v01 - v00);
      const float bot = v10 + fx[x] * (v11 - v10);
      out.at(x, y) = top + fy * (bot - top);
    }
  }
  return out;
}

Frame resize_bilinear(const Frame& f, int width, int height) {
  if (f.color_space() == ColorSpace::kYuv420) throw std::invalid_argument("resize_bilinear expects a 4:4:4 frame");
  Frame out(width, height, f.color_space());
  for (int p = 0; p < 3; ++p) out.plane(p) = resize_bilinear(f.plane(p), width, height);
  return out;
}

int scaled_extent(int extent, double factor) {
  if (!(factor > 0)) throw std::invalid_argument("scale factor must be positive");
  return std::max(1, static_cast<int>(std::floor(extent / factor + 0.5)));
}

}  // namespace fga::io
