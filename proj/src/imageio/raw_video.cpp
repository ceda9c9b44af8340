#include "fga/imageio/raw_video.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

namespace fga::io {

std::uint64_t i420_frame_bytes(int width, int height) {
  if (width <= 0 || height <= 0 || width % 2 || height % 2)
    throw DataError(fmt::format("4:2:0 video needs positive even dimensions, got {}x{}", width, height));
  return static_cast<std::uint64_t>(width) * height * 3 / 2;
}

int count_raw_frames(const std::string& path, int width, int height) {
  const std::uint64_t per_frame = i420_frame_bytes(width, height);
  std::error_code ec;
  const auto size = std::filesystem::file_size(path, ec);
  if (ec) throw DataError(fmt::format("cannot stat {}: {}", path, ec.message()));
  if (size % per_frame != 0) {
    const std::uint64_t whole = size / per_frame;
    throw DataError(fmt::format("{}: size {} bytes is not a multiple of the {}x{} frame size {} (expected {} or {} bytes)",
                                path, size, width, height, per_frame, whole * per_frame, (whole + 1) * per_frame));
  }
  return static_cast<int>(size / per_frame);
}

RawVideoReader::RawVideoReader(const std::string& path, int width, int height)
    : width_(width), height_(height), frames_available_(count_raw_frames(path, width, height)) {
  in_.open(path, std::ios::binary);
  if (!in_) throw DataError(fmt::format("cannot open {}", path));
  buffer_.resize(i420_frame_bytes(width, height));
}

std::optional<Frame> RawVideoReader::next() {
  in_.read(reinterpret_cast<char*>(buffer_.data()), static_cast<std::streamsize>(buffer_.size()));
  if (in_.gcount() == 0) return std::nullopt;
  if (static_cast<std::size_t>(in_.gcount()) != buffer_.size())
    throw DataError(fmt::format("short read: expected {} bytes, got {}", buffer_.size(), in_.gcount()));
  Frame f(width_, height_, ColorSpace::kYuv420);
  std::size_t off = 0;
  for (int p = 0; p < 3; ++p) {
    auto& d = f.plane(p).data;
    for (auto& v : d) v = buffer_[off++];
  }
  return f;
}

std::vector<Frame> read_raw_video(const SequenceSpec& spec) {
  RawVideoReader reader(spec.path, spec.width, spec.height);
  const int want = spec.frame_count > 0 ? spec.frame_count : reader.frames_available();
  if (want > reader.frames_available())
    throw DataError(fmt::format("{} holds {} frames, {} requested", spec.path, reader.frames_available(), want));
  std::vector<Frame> frames;
  frames.reserve(want);
  for (int i = 0; i < want; ++i) frames.push_back(*reader.next());
  return frames;
}

void write_raw_video(const std::string& path, const std::vector<Frame>& frames) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot open {} for writing", path));
  std::vector<std::uint8_t> buf;
  for (const Frame& f : frames) {
    if (f.color_space() != ColorSpace::kYuv420) throw std::invalid_argument("write_raw_video expects YUV420 frames");
    buf.clear();
    for (int p = 0; p < 3; ++p)
      for (float v : f.plane(p).data)
        buf.push_back(static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0f, 255.0f)));
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  }
  if (!out) throw DataError(fmt::format("write to {} failed", path));
}

}  // namespace fga::io
