#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fga/flow/flow.hpp"

namespace fga::sme {

struct ScaleSearchConfig {
  std::vector<double> scales;
  double delta = 0.1;  // dB
  double tau = 10.0;   // px

  /// {1, 1.25, ..., 5}, delta 0.1, tau 10.
  static ScaleSearchConfig standard();
  /// HEVC class B setting: {1, 1.25}, tau 10.
  static ScaleSearchConfig hevc_b();
  void validate() const;
};

struct ScaleEntry {
  double scale = 1;
  int width = 0;
  int height = 0;
  double psnr = 0;
};

struct SkippedScale {
  double scale = 1;
  std::string reason;
};

struct ScaleSearchResult {
  double best_scale = 1;
  double best_psnr = 0;
  flow::FlowField flow;              // at the original resolution
  std::vector<ScaleEntry> report;    // one per evaluated scale, in scale order
  std::vector<SkippedScale> skipped;
};

/// Estimates flow on both frames downsampled by `scale` and brings it back
/// to the original size.
flow::FlowField flow_at_scale(const io::Frame& cur, const io::Frame& ref, double scale,
                              const flow::FlowEstimator& estimator);

/// Adaptive scale search. Candidates may run concurrently; the selection
/// walks them in configured order, so the result does not depend on
/// `parallel`.
ScaleSearchResult select_scale(const io::Frame& cur, const io::Frame& ref, const ScaleSearchConfig& cfg,
                               const flow::FlowEstimator& estimator, bool parallel = false);

struct GatedFlow {
  flow::FlowField flow;
  double magnitude = 0;  // of the scale-1 estimate
  std::optional<ScaleSearchResult> search;
};

/// Scale-1 flow unless its magnitude exceeds tau, in which case the search
/// result's flow.
GatedFlow gated_flow(const io::Frame& cur, const io::Frame& ref, const ScaleSearchConfig& cfg,
                     const flow::FlowEstimator& estimator, bool parallel = false);

}  // namespace fga::sme
