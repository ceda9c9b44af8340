#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fga::io {

/// Raised for malformed or inconsistent input data (truncated files, bad
/// dimensions, malformed CSV rows). The CLI maps it to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ColorSpace { kRgb, kYuv420, kYuv444 };

const char* to_string(ColorSpace cs);

/// One sample grid. Samples are 8-bit code values held as float so that
/// warps and metrics operate without conversions; file writers round.
struct Plane {
  int width = 0;
  int height = 0;
  std::vector<float> data;

  Plane() = default;
  Plane(int w, int h, float fill = 0.0f);

  float& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  float at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }

  bool operator==(const Plane&) const = default;
};

/// Three-plane 8-bit picture. For YUV420 the chroma planes are half size in
/// both directions and the luma dimensions must be even.
class Frame {
 public:
  Frame() = default;
  Frame(int width, int height, ColorSpace cs, float fill = 0.0f);

  int width() const { return width_; }
  int height() const { return height_; }
  ColorSpace color_space() const { return color_space_; }
  static constexpr int bit_depth() { return 8; }

  Plane& plane(int i) { return planes_.at(i); }
  const Plane& plane(int i) const { return planes_.at(i); }

  /// Checks plane geometry and that every sample lies in [0, 255].
  void validate() const;

  bool operator==(const Frame&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  ColorSpace color_space_ = ColorSpace::kRgb;
  std::vector<Plane> planes_;
};

/// Rec.709 luma (0.2126 R + 0.7152 G + 0.0722 B) of an RGB frame.
Plane luma_plane(const Frame& rgb);

}  // namespace fga::io
