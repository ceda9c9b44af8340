#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "fga/imageio/frame.hpp"

namespace fga::io {

/// A raw planar YUV 4:2:0 8-bit sequence (I420: Y, then U, then V per frame).
struct SequenceSpec {
  std::string path;
  int frame_count = 0;
  int width = 0;
  int height = 0;
  double frame_rate = 0.0;  // metadata only
};

std::uint64_t i420_frame_bytes(int width, int height);

/// Number of whole frames in the file. Throws DataError when the size is not
/// an exact multiple of the frame size or the dimensions are odd.
int count_raw_frames(const std::string& path, int width, int height);

/// Single-consumer frame stream.
class RawVideoReader {
 public:
  RawVideoReader(const std::string& path, int width, int height);

  /// Next frame in file order, or nullopt at end of file.
  std::optional<Frame> next();
  int frames_available() const { return frames_available_; }

 private:
  std::ifstream in_;
  int width_;
  int height_;
  int frames_available_;
  std::vector<std::uint8_t> buffer_;
};

/// Reads exactly spec.frame_count frames (all frames when 0).
std::vector<Frame> read_raw_video(const SequenceSpec& spec);

/// Appends or writes YUV420 frames as I420. Values are rounded and clipped.
void write_raw_video(const std::string& path, const std::vector<Frame>& frames);

}  // namespace fga::io
