#include "fga/sme/sme.hpp"

#include <fmt/format.h>

#include <future>
#include <stdexcept>
#include <variant>

#include "fga/imageio/geometry.hpp"
#include "fga/metrics/metrics.hpp"

namespace fga::sme {

ScaleSearchConfig ScaleSearchConfig::standard() {
  ScaleSearchConfig c;
  for (int i = 0; i <= 16; ++i) c.scales.push_back(1.0 + 0.25 * i);
  return c;
}

ScaleSearchConfig ScaleSearchConfig::hevc_b() {
  ScaleSearchConfig c;
  c.scales = {1.0, 1.25};
  c.tau = 10.0;
  return c;
}

void ScaleSearchConfig::validate() const {
  if (scales.empty() || scales.front() != 1.0)
    throw std::invalid_argument("scale set must be non-empty and start at 1");
  for (std::size_t i = 1; i < scales.size(); ++i)
    if (!(scales[i] > scales[i - 1])) throw std::invalid_argument("scale set must increase strictly");
  if (!(delta >= 0) || !(tau >= 0)) throw std::invalid_argument("delta and tau must be non-negative");
}

flow::FlowField flow_at_scale(const io::Frame& cur, const io::Frame& ref, double scale,
                              const flow::FlowEstimator& estimator) {
  const int w = io::scaled_extent(cur.width(), scale), h = io::scaled_extent(cur.height(), scale);
  const flow::FlowField f = estimator.estimate(io::resize_bilinear(cur, w, h), io::resize_bilinear(ref, w, h));
  return flow::resize_flow(f, cur.width(), cur.height());
}

ScaleSearchResult select_scale(const io::Frame& cur, const io::Frame& ref, const ScaleSearchConfig& cfg,
                               const flow::FlowEstimator& estimator, bool parallel) {
  cfg.validate();
  if (cur.width() != ref.width() || cur.height() != ref.height())
    throw std::invalid_argument("select_scale: frame sizes differ");
  if (cur.color_space() != io::ColorSpace::kRgb || ref.color_space() != io::ColorSpace::kRgb)
    throw std::invalid_argument("select_scale expects RGB frames");

  using Outcome = std::variant<ScaleEntry, SkippedScale>;
  auto evaluate = [&](double d) -> Outcome {
    const int w = io::scaled_extent(cur.width(), d), h = io::scaled_extent(cur.height(), d);
    if (std::min(w, h) < estimator.min_extent())
      return SkippedScale{d, fmt::format("downsampled size {}x{} is below the estimator minimum {}", w, h,
                                         estimator.min_extent())};
    const flow::FlowField f = flow_at_scale(cur, ref, d, estimator);
    return ScaleEntry{d, w, h, metrics::psnr(cur, flow::warp(ref, f))};
  };

  std::vector<Outcome> outcomes;
  if (parallel) {
    std::vector<std::future<Outcome>> jobs;
    for (double d : cfg.scales) jobs.push_back(std::async(std::launch::async, evaluate, d));
    for (auto& j : jobs) outcomes.push_back(j.get());
  } else {
    for (double d : cfg.scales) outcomes.push_back(evaluate(d));
  }

  ScaleSearchResult r;
  r.best_scale = 1.0;
  r.best_psnr = 0.0;
  for (const auto& o : outcomes) {
    if (const auto* s = std::get_if<SkippedScale>(&o)) {
      r.skipped.push_back(*s);
      continue;
    }
    const auto& e = std::get<ScaleEntry>(o);
    r.report.push_back(e);
    if (e.psnr > r.best_psnr + cfg.delta) {
      r.best_psnr = e.psnr;
      r.best_scale = e.scale;
    }
  }
  r.flow = flow_at_scale(cur, ref, r.best_scale, estimator);
  return r;
}

GatedFlow gated_flow(const io::Frame& cur, const io::Frame& ref, const ScaleSearchConfig& cfg,
                     const flow::FlowEstimator& estimator, bool parallel) {
  cfg.validate();
  GatedFlow g;
  g.flow = estimator.estimate(cur, ref);
  g.magnitude = flow::flow_magnitude(g.flow);
  if (g.magnitude > cfg.tau) {
    g.search = select_scale(cur, ref, cfg, estimator, parallel);
    g.flow = g.search->flow;
  }
  return g;
}

}  // namespace fga::sme
