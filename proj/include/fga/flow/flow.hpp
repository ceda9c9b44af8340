#pragma once

#include <string>
#include <vector>

#include "fga/imageio/frame.hpp"

namespace fga::flow {

using io::Frame;
using io::Plane;

/// Per-pixel displacement in pixels at this resolution. Positive x is
/// rightward, positive y downward; v(p) points from the current-frame pixel
/// p to its location in the reference frame.
struct FlowField {
  int width = 0;
  int height = 0;
  std::vector<float> vx;
  std::vector<float> vy;

  FlowField() = default;
  FlowField(int w, int h, float fx = 0.0f, float fy = 0.0f);

  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
  bool operator==(const FlowField&) const = default;
};

/// output(p) = bilinear(target, p + v(p)), edge-clamped.
Plane warp(const Plane& target, const FlowField& flow);
Frame warp(const Frame& target, const FlowField& flow);

/// sqrt((sum vx^2 + sum vy^2 + 1e-8) / (H*W)), accumulated in double.
double flow_magnitude(const FlowField& flow);

/// Bilinear resampling to round-half-up(size * factor); values times factor.
FlowField rescale_flow(const FlowField& flow, double factor);

/// Resampling to an exact size; each component is scaled by its own axis
/// ratio so non-integer scales still land on the target grid.
FlowField resize_flow(const FlowField& flow, int width, int height);

/// "FLOW <w> <h>\n" followed by little-endian float32 (vx, vy) pairs in
/// row-major order.
void write_flow(const std::string& path, const FlowField& flow);
FlowField read_flow(const std::string& path);

struct EstimatorOptions {
  int levels = 3;
  int iterations = 6;
  int window = 7;
  /// Tikhonov term added to the structure tensor (intensity^2 units).
  double regularization = 1.0;
};

/// Pluggable flow estimator. Implementations must be deterministic and safe
/// to call concurrently.
class FlowEstimator {
 public:
  virtual ~FlowEstimator() = default;
  virtual FlowField estimate(const Frame& cur, const Frame& ref) const = 0;
  /// Smallest width/height the estimator accepts.
  virtual int min_extent() const = 0;
};

/// Coarse-to-fine dense Lucas-Kanade on Rec.709 luma. An iteration is kept
/// only if it lowers the luma warp error; each level, and the final result,
/// falls back to zero flow when that is better.
class PyramidLucasKanade : public FlowEstimator {
 public:
  explicit PyramidLucasKanade(EstimatorOptions opts = {});
  FlowField estimate(const Frame& cur, const Frame& ref) const override;
  FlowField estimate_luma(const Plane& cur, const Plane& ref) const;
  int min_extent() const override { return 1 << (opts_.levels - 1); }
  const EstimatorOptions& options() const { return opts_; }

 private:
  EstimatorOptions opts_;
};

FlowField estimate_flow(const Frame& cur, const Frame& ref, int levels = 3, int iterations = 6);

/// Sum of squared luma differences between cur and ref warped by flow.
double luma_warp_sse(const Plane& cur, const Plane& ref, const FlowField& flow);

}  // namespace fga::flow
