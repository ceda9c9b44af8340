#pragma once

#include "fga/imageio/frame.hpp"

namespace fga::io {

// Limited-range ("studio swing") BT.709: Y in [16, 235], Cb/Cr in [16, 240].
//
//   R = 1.164383562 (Y - 16)                          + 1.792741071 (V - 128)
//   G = 1.164383562 (Y - 16) - 0.2132486143 (U - 128) - 0.5329093286 (V - 128)
//   B = 1.164383562 (Y - 16) + 2.112401786 (U - 128)
//
//   Y = 16  + 0.1826193815 R + 0.6142556863 G + 0.0620071376 B
//   U = 128 - 0.1006437080 R - 0.3385171963 G + 0.4391609043 B
//   V = 128 + 0.4391609043 R - 0.3989416592 G - 0.0402192451 B
//
// Coefficients are derived in double precision from Kr = 0.2126 and
// Kb = 0.0722; results are rounded half away from zero, then clipped to
// [0, 255].
namespace bt709 {
inline constexpr double kKr = 0.2126;
inline constexpr double kKb = 0.0722;
inline constexpr double kKg = 1.0 - kKr - kKb;
inline constexpr double kLumaScale = 255.0 / 219.0;
inline constexpr double kChromaScale = 255.0 / 224.0;
}  // namespace bt709

/// Co-sited bilinear chroma upsampling followed by the limited-range matrix.
Frame yuv420_to_rgb_bt709(const Frame& yuv);

Frame rgb_to_yuv444_bt709(const Frame& rgb);
Frame yuv444_to_rgb_bt709(const Frame& yuv);

/// RGB -> YUV420 (2x2 chroma averaging, rounded). Used to write test
/// sequences; not part of the evaluation path.
Frame rgb_to_yuv420_bt709(const Frame& rgb);

}  // namespace fga::io
