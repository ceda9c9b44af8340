#pragma once

#include <string>

#include "fga/imageio/frame.hpp"

namespace fga::io {

/// 8-bit RGB PNG. Samples are rounded and clipped on write.
void write_png(const std::string& path, const Frame& rgb);
Frame read_png(const std::string& path);

}  // namespace fga::io
