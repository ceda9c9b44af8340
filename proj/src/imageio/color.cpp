#include "fga/imageio/color.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fga::io {
namespace {

using namespace bt709;

// YUV -> RGB
constexpr double kRv = kChromaScale * 2.0 * (1.0 - kKr);
constexpr double kBu = kChromaScale * 2.0 * (1.0 - kKb);
constexpr double kGu = -kChromaScale * 2.0 * (1.0 - kKb) * kKb / kKg;
constexpr double kGv = -kChromaScale * 2.0 * (1.0 - kKr) * kKr / kKg;

float quantize(double v) { return static_cast<float>(std::clamp(std::round(v), 0.0, 255.0)); }

void yuv_to_rgb(double y, double u, double v, float& r, float& g, float& b) {
  const double yy = kLumaScale * (y - 16.0);
  const double uu = u - 128.0;
  const double vv = v - 128.0;
  r = quantize(yy + kRv * vv);
  g = quantize(yy + kGu * uu + kGv * vv);
  b = quantize(yy + kBu * uu);
}

void rgb_to_yuv(double r, double g, double b, double& y, double& u, double& v) {
  const double luma = kKr * r + kKg * g + kKb * b;
  y = 16.0 + luma / kLumaScale;
  u = 128.0 + (b - luma) / (2.0 * (1.0 - kKb)) / kChromaScale;
  v = 128.0 + (r - luma) / (2.0 * (1.0 - kKr)) / kChromaScale;
}

// co-sited: chroma sample (i, j) sits on luma (2i, 2j)
double upsample(const Plane& c, int x, int y) {
  const int x0 = x / 2, y0 = y / 2;
  const int x1 = std::min(x0 + 1, c.width - 1);
  const int y1 = std::min(y0 + 1, c.height - 1);
  const double fx = (x & 1) ? 0.5 : 0.0;
  const double fy = (y & 1) ? 0.5 : 0.0;
  const double v00 = c.at(x0, y0), v01 = c.at(x1, y0), v10 = c.at(x0, y1), v11 = c.at(x1, y1);
  const double top = v00 + fx * (v01 - v00);
  const double bot = v10 + fx * (v11 - v10);
  return top + fy * (bot - top);
}

void require(const Frame& f, ColorSpace cs, const char* fn) {
  if (f.color_space() != cs)
    throw std::invalid_argument(std::string(fn) + ": expected " + to_string(cs) + " input, got " +
                                to_string(f.color_space()));
}

}  // namespace

Frame yuv420_to_rgb_bt709(const Frame& yuv) {
  require(yuv, ColorSpace::kYuv420, "yuv420_to_rgb_bt709");
  Frame out(yuv.width(), yuv.height(), ColorSpace::kRgb);
  for (int y = 0; y < yuv.height(); ++y)
    for (int x = 0; x < yuv.width(); ++x)
      yuv_to_rgb(yuv.plane(0).at(x, y), upsample(yuv.plane(1), x, y), upsample(yuv.plane(2), x, y),
                 out.plane(0).at(x, y), out.plane(1).at(x, y), out.plane(2).at(x, y));
  return out;
}

Frame yuv444_to_rgb_bt709(const Frame& yuv) {
  require(yuv, ColorSpace::kYuv444, "yuv444_to_rgb_bt709");
  Frame out(yuv.width(), yuv.height(), ColorSpace::kRgb);
  for (std::size_t i = 0; i < out.plane(0).data.size(); ++i)
    yuv_to_rgb(yuv.plane(0).data[i], yuv.plane(1).data[i], yuv.plane(2).data[i], out.plane(0).data[i],
               out.plane(1).data[i], out.plane(2).data[i]);
  return out;
}

Frame rgb_to_yuv444_bt709(const Frame& rgb) {
  require(rgb, ColorSpace::kRgb, "rgb_to_yuv444_bt709");
  Frame out(rgb.width(), rgb.height(), ColorSpace::kYuv444);
  for (std::size_t i = 0; i < out.plane(0).data.size(); ++i) {
    double y, u, v;
    rgb_to_yuv(rgb.plane(0).data[i], rgb.plane(1).data[i], rgb.plane(2).data[i], y, u, v);
    out.plane(0).data[i] = quantize(y);
    out.plane(1).data[i] = quantize(u);
    out.plane(2).data[i] = quantize(v);
  }
  return out;
}

Frame rgb_to_yuv420_bt709(const Frame& rgb) {
  require(rgb, ColorSpace::kRgb, "rgb_to_yuv420_bt709");
  Frame out(rgb.width(), rgb.height(), ColorSpace::kYuv420);
  const int w = rgb.width();
  std::vector<double> us(static_cast<std::size_t>(w) * rgb.height()), vs(us.size());
  for (std::size_t i = 0; i < us.size(); ++i) {
    double y;
    rgb_to_yuv(rgb.plane(0).data[i], rgb.plane(1).data[i], rgb.plane(2).data[i], y, us[i], vs[i]);
    out.plane(0).data[i] = quantize(y);
  }
  for (int j = 0; j < rgb.height() / 2; ++j)
    for (int i = 0; i < w / 2; ++i) {
      const std::size_t a = static_cast<std::size_t>(2 * j) * w + 2 * i;
      out.plane(1).at(i, j) = quantize((us[a] + us[a + 1] + us[a + w] + us[a + w + 1]) / 4.0);
      out.plane(2).at(i, j) = quantize((vs[a] + vs[a + 1] + vs[a + w] + vs[a + w + 1]) / 4.0);
    }
  return out;
}

}  // namespace fga::io
