#pragma once

#include "fga/imageio/frame.hpp"

namespace fga::io {

struct PaddedFrame {
  Frame frame;
  int original_width = 0;
  int original_height = 0;
};

/// Replicates the last column/row so both dimensions become multiples of m.
/// YUV420 inputs require an even m.
PaddedFrame pad_to_multiple(const Frame& f, int m);

/// Top-left crop.
Frame crop(const Frame& f, int width, int height);

/// Half-pixel-centre bilinear resampling with edge clamping:
/// src = (dst + 0.5) * in / out - 0.5.
Plane resize_bilinear(const Plane& p, int width, int height);
Frame resize_bilinear(const Frame& f, int width, int height);

/// round-half-up(extent / factor), at least 1.
int scaled_extent(int extent, double factor);

}  // namespace fga::io
