#include <gtest/gtest.h>

#include "fga/imageio/synth.hpp"
#include "fga/metrics/metrics.hpp"
#include "fga/sme/sme.hpp"

using namespace fga;

namespace {

io::SynthSequence shifted_pair(int w, int h, double shift, double period = 8.0) {
  io::SynthParams p;
  p.width = w;
  p.height = h;
  p.shift_x = shift;
  p.texture_period = period;
  return io::synth_sequence(p);
}

const flow::PyramidLucasKanade kEstimator;

}  // namespace

TEST(ScaleConfig, StandardSetAndHevcB) {
  const auto s = sme::ScaleSearchConfig::standard();
  ASSERT_EQ(s.scales.size(), 17u);
  EXPECT_EQ(s.scales.front(), 1.0);
  EXPECT_EQ(s.scales[1], 1.25);
  EXPECT_EQ(s.scales.back(), 5.0);
  EXPECT_EQ(s.delta, 0.1);
  const auto b = sme::ScaleSearchConfig::hevc_b();
  EXPECT_EQ(b.tau, 10.0);
  EXPECT_EQ(b.scales, (std::vector<double>{1.0, 1.25}));
}

TEST(ScaleConfig, ValidationRejectsBadSets) {
  sme::ScaleSearchConfig c;
  c.scales = {1.25, 2.0};
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.scales = {1.0, 2.0, 2.0};
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.scales = {1.0};
  c.delta = -1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(SelectScale, StaticPairKeepsScaleOne) {
  io::SynthParams p;
  p.kind = io::SynthKind::kStatic;
  const auto s = io::synth_sequence(p);
  const auto r = sme::select_scale(s.frames[1], s.frames[0], sme::ScaleSearchConfig::standard(), kEstimator);
  EXPECT_EQ(r.best_scale, 1.0);
  EXPECT_EQ(r.best_psnr, metrics::kPsnrCap);
}

TEST(SelectScale, SingletonSetIsPlainEstimation) {
  const auto s = shifted_pair(64, 48, 3.0);
  sme::ScaleSearchConfig c;
  c.scales = {1.0};
  const auto r = sme::select_scale(s.frames[0], s.frames[1], c, kEstimator);
  EXPECT_EQ(r.flow, kEstimator.estimate(s.frames[0], s.frames[1]));
  ASSERT_EQ(r.report.size(), 1u);
}

TEST(SelectScale, FollowsTheDeltaUpdateRule) {
  const auto s = shifted_pair(160, 96, 9.0);
  const auto cfg = sme::ScaleSearchConfig::standard();
  const auto r = sme::select_scale(s.frames[0], s.frames[1], cfg, kEstimator);
  double best = 0, best_d = 1;
  for (const auto& e : r.report)
    if (e.psnr > best + cfg.delta) {
      best = e.psnr;
      best_d = e.scale;
    }
  EXPECT_EQ(r.best_scale, best_d);
  EXPECT_GE(r.best_psnr, r.report.front().psnr);
  bool found = false;
  for (const auto& e : r.report) found |= e.scale == r.best_scale;
  EXPECT_TRUE(found);
  EXPECT_EQ(r.flow, sme::flow_at_scale(s.frames[0], s.frames[1], r.best_scale, kEstimator));
}

TEST(SelectScale, SmallFramesSkipCoarseScales) {
  const auto s = shifted_pair(16, 12, 1.0);
  const auto r = sme::select_scale(s.frames[0], s.frames[1], sme::ScaleSearchConfig::standard(), kEstimator);
  EXPECT_FALSE(r.skipped.empty());
  EXPECT_EQ(r.report.size() + r.skipped.size(), 17u);
  for (const auto& k : r.skipped) EXPECT_GT(k.scale, 2.0);
}

TEST(SelectScale, ParallelMatchesSequential) {
  const auto s = shifted_pair(96, 64, 6.0);
  const auto cfg = sme::ScaleSearchConfig::standard();
  const auto a = sme::select_scale(s.frames[0], s.frames[1], cfg, kEstimator, false);
  const auto b = sme::select_scale(s.frames[0], s.frames[1], cfg, kEstimator, true);
  EXPECT_EQ(a.best_scale, b.best_scale);
  EXPECT_EQ(a.flow, b.flow);
  ASSERT_EQ(a.report.size(), b.report.size());
  for (std::size_t i = 0; i < a.report.size(); ++i) EXPECT_EQ(a.report[i].psnr, b.report[i].psnr);
}

TEST(GatedFlow, ClosedGateSkipsSearch) {
  io::SynthParams p;
  p.kind = io::SynthKind::kStatic;
  const auto s = io::synth_sequence(p);
  const auto g = sme::gated_flow(s.frames[1], s.frames[0], sme::ScaleSearchConfig::standard(), kEstimator);
  EXPECT_FALSE(g.search.has_value());
  EXPECT_EQ(g.flow, kEstimator.estimate(s.frames[1], s.frames[0]));
}

TEST(GatedFlow, ZeroTauAlwaysSearches) {
  io::SynthParams p;
  p.kind = io::SynthKind::kStatic;
  const auto s = io::synth_sequence(p);
  auto cfg = sme::ScaleSearchConfig::hevc_b();
  cfg.tau = 0;
  const auto g = sme::gated_flow(s.frames[1], s.frames[0], cfg, kEstimator);
  ASSERT_TRUE(g.search.has_value());
  EXPECT_EQ(g.flow, g.search->flow);
}
