#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "fga/flow/flow.hpp"
#include "fga/imageio/synth.hpp"

using namespace fga;
using flow::FlowField;

namespace {

io::Frame noise_frame(int w, int h, std::mt19937& gen) {
  std::uniform_int_distribution<int> d(0, 255);
  io::Frame f(w, h, io::ColorSpace::kRgb);
  for (int c = 0; c < 3; ++c)
    for (auto& v : f.plane(c).data) v = static_cast<float>(d(gen));
  return f;
}

FlowField random_field(int w, int h, std::mt19937& gen, float scale = 5.0f) {
  std::normal_distribution<float> d(0.0f, scale);
  FlowField f(w, h);
  for (auto& v : f.vx) v = d(gen);
  for (auto& v : f.vy) v = d(gen);
  return f;
}

}  // namespace

TEST(Warp, ZeroFlowIsIdentity) {
  std::mt19937 gen(1);
  const io::Frame f = noise_frame(17, 11, gen);
  EXPECT_EQ(flow::warp(f, FlowField(17, 11)), f);
}

TEST(Warp, IntegerShiftRecoversShiftedCopy) {
  std::mt19937 gen(2);
  const io::Frame ref = noise_frame(20, 12, gen);
  io::Frame cur(20, 12, io::ColorSpace::kRgb);
  // cur(x, y) = ref(x + 3, y - 2)
  for (int c = 0; c < 3; ++c)
    for (int y = 2; y < 12; ++y)
      for (int x = 0; x < 17; ++x) cur.plane(c).at(x, y) = ref.plane(c).at(x + 3, y - 2);
  const io::Frame w = flow::warp(ref, FlowField(20, 12, 3.0f, -2.0f));
  for (int c = 0; c < 3; ++c)
    for (int y = 2; y < 12; ++y)
      for (int x = 0; x < 17; ++x) EXPECT_EQ(w.plane(c).at(x, y), cur.plane(c).at(x, y));
}

TEST(Warp, HalfPixelOnRampGivesMidpoints) {
  io::Plane ramp(10, 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 10; ++x) ramp.at(x, y) = 10.0f * x + 3.0f;
  const io::Plane w = flow::warp(ramp, FlowField(10, 4, 0.5f, 0.0f));
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 9; ++x) EXPECT_EQ(w.at(x, y), 10.0f * x + 8.0f);
}

TEST(Warp, EdgeClampAndResolutionMismatch) {
  io::Plane p(4, 4);
  for (int i = 0; i < 16; ++i) p.data[i] = static_cast<float>(i);
  const io::Plane w = flow::warp(p, FlowField(4, 4, 100.0f, -100.0f));
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) EXPECT_EQ(w.at(x, y), p.at(3, 0));
  EXPECT_THROW(flow::warp(p, FlowField(4, 5)), std::invalid_argument);
}

TEST(FlowMagnitude, EpsilonFloorAndPythagoras) {
  EXPECT_NEAR(flow::flow_magnitude(FlowField(16, 16)), std::sqrt(1e-8 / 256), 1e-15);
  EXPECT_NEAR(flow::flow_magnitude(FlowField(7, 13, 3.0f, 4.0f)), 5.0, 1e-6);
  EXPECT_NEAR(flow::flow_magnitude(FlowField(300, 200, 3.0f, 4.0f)), 5.0, 1e-6);
}

TEST(FlowMagnitude, MatchesDirectSummation) {
  std::mt19937 gen(3);
  const FlowField f = random_field(37, 23, gen);
  double acc = 0;
  for (int y = 0; y < f.height; ++y)
    for (int x = 0; x < f.width; ++x) {
      const double a = f.vx[f.index(x, y)], b = f.vy[f.index(x, y)];
      acc += a * a + b * b;
    }
  EXPECT_NEAR(flow::flow_magnitude(f), std::sqrt((acc + 1e-8) / (37.0 * 23.0)), 1e-12);
}

TEST(FlowMagnitude, InvariantToSignFlipAndPermutation) {
  std::mt19937 gen(4);
  FlowField f = random_field(16, 16, gen);
  const double m = flow::flow_magnitude(f);
  FlowField g = f;
  for (auto& v : g.vx) v = -v;
  std::reverse(g.vy.begin(), g.vy.end());
  std::reverse(g.vx.begin(), g.vx.end());
  EXPECT_NEAR(flow::flow_magnitude(g), m, 1e-12);
}

TEST(RescaleFlow, FactorOneIsIdentity) {
  std::mt19937 gen(5);
  const FlowField f = random_field(9, 7, gen);
  EXPECT_EQ(flow::rescale_flow(f, 1.0), f);
}

TEST(RescaleFlow, ConstantFieldScalesExactly) {
  const FlowField h = flow::rescale_flow(FlowField(32, 16, 2.0f, 0.0f), 0.5);
  EXPECT_EQ(h.width, 16);
  EXPECT_EQ(h.height, 8);
  for (float v : h.vx) EXPECT_EQ(v, 1.0f);
  for (float v : h.vy) EXPECT_EQ(v, 0.0f);
  const FlowField u = flow::rescale_flow(FlowField(5, 5, -1.5f, 0.75f), 3.0);
  for (float v : u.vx) EXPECT_EQ(v, -4.5f);
  for (float v : u.vy) EXPECT_EQ(v, 2.25f);
}

TEST(RescaleFlow, SmoothFieldRoundTrip) {
  FlowField f(64, 48);
  for (int y = 0; y < 48; ++y)
    for (int x = 0; x < 64; ++x) {
      // slopes stay under 0.2 px/px; edge clamping costs about half a slope
      f.vx[f.index(x, y)] = 3.0f * std::sin(x / 16.0f) + 0.5f;
      f.vy[f.index(x, y)] = 2.0f * std::cos(y / 12.0f);
    }
  const FlowField back = flow::rescale_flow(flow::rescale_flow(f, 0.5), 2.0);
  ASSERT_EQ(back.width, 64);
  ASSERT_EQ(back.height, 48);
  float err = 0;
  for (std::size_t i = 0; i < f.vx.size(); ++i)
    err = std::max({err, std::abs(back.vx[i] - f.vx[i]), std::abs(back.vy[i] - f.vy[i])});
  EXPECT_LT(err, 0.1f);
}

TEST(ResizeFlow, PerAxisScaling) {
  const FlowField r = flow::resize_flow(FlowField(8, 10, 1.0f, 1.0f), 10, 12);
  EXPECT_FLOAT_EQ(r.vx[0], 1.25f);
  EXPECT_FLOAT_EQ(r.vy[0], 1.2f);
}

TEST(FlowDump, RoundTrip) {
  std::mt19937 gen(6);
  const FlowField f = random_field(13, 5, gen);
  const auto path = std::filesystem::temp_directory_path() / "fga_flow_test.flo";
  flow::write_flow(path.string(), f);
  EXPECT_EQ(flow::read_flow(path.string()), f);
}

TEST(EstimateFlow, IdenticalFramesGiveNoMotion) {
  io::SynthParams p;
  p.kind = io::SynthKind::kStatic;
  const auto s = io::synth_sequence(p);
  EXPECT_LT(flow::flow_magnitude(flow::estimate_flow(s.frames[0], s.frames[1])), 0.1);
}

TEST(EstimateFlow, RecoversGlobalFourPixelShift) {
  io::SynthParams p;
  p.width = 128;
  p.height = 96;
  p.shift_x = 4.0;
  const auto s = io::synth_sequence(p);
  // frame 1 holds frame 0's content moved 4 px right, so v = +4 from frame 0
  double gx, gy;
  io::SynthSequence rev{{s.frames[1], s.frames[0]}, {s.to_texture[1], s.to_texture[0]}};
  io::true_displacement(rev, 1, 0, 50, 50, gx, gy);
  ASSERT_DOUBLE_EQ(gx, 4.0);
  const FlowField f = flow::estimate_flow(s.frames[0], s.frames[1]);
  double mx = 0, my = 0;
  int n = 0;
  for (int y = 8; y < p.height - 8; ++y)
    for (int x = 8; x < p.width - 8; ++x, ++n) {
      mx += f.vx[f.index(x, y)];
      my += f.vy[f.index(x, y)];
    }
  EXPECT_NEAR(mx / n, gx, 0.5);
  EXPECT_LT(std::abs(my / n), 0.5);
}

TEST(EstimateFlow, FlatFramesReturnZeroFlow) {
  const io::Frame a(32, 32, io::ColorSpace::kRgb, 90.0f), b(32, 32, io::ColorSpace::kRgb, 140.0f);
  const FlowField f = flow::estimate_flow(a, b);
  EXPECT_EQ(f, FlowField(32, 32));
}

TEST(EstimateFlow, NeverWorseThanZeroFlow) {
  std::mt19937 gen(7);
  for (int trial = 0; trial < 6; ++trial) {
    const io::Frame a = noise_frame(24, 20, gen), b = noise_frame(24, 20, gen);
    const FlowField f = flow::estimate_flow(a, b);
    const io::Plane la = io::luma_plane(a), lb = io::luma_plane(b);
    EXPECT_LE(flow::luma_warp_sse(la, lb, f), flow::luma_warp_sse(la, lb, FlowField(24, 20)));
  }
}

TEST(EstimateFlow, DeterministicAndValidated) {
  io::SynthParams p;
  p.kind = io::SynthKind::kAffine;
  p.rotation = 0.03;
  p.shift_x = 1.5;
  const auto s = io::synth_sequence(p);
  EXPECT_EQ(flow::estimate_flow(s.frames[1], s.frames[0]), flow::estimate_flow(s.frames[1], s.frames[0]));
  EXPECT_THROW(flow::estimate_flow(io::Frame(3, 8, io::ColorSpace::kRgb), io::Frame(3, 8, io::ColorSpace::kRgb)),
               std::invalid_argument);
  EXPECT_THROW(flow::estimate_flow(s.frames[0], io::Frame(32, 32, io::ColorSpace::kRgb)), std::invalid_argument);
  EXPECT_NO_THROW(flow::estimate_flow(io::Frame(4, 4, io::ColorSpace::kRgb), io::Frame(4, 4, io::ColorSpace::kRgb)));
}
