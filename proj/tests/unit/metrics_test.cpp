#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fga/metrics/metrics.hpp"
#include "support/bd_reference.hpp"

using namespace fga;
using metrics::RDCurve;
using fga::testing::reference_bd_rate;

namespace {

io::Frame random_rgb(int w, int h, std::mt19937& gen) {
  std::uniform_int_distribution<int> d(0, 255);
  io::Frame f(w, h, io::ColorSpace::kRgb);
  for (int c = 0; c < 3; ++c)
    for (auto& v : f.plane(c).data) v = static_cast<float>(d(gen));
  return f;
}

io::Frame smooth_rgb(int w, int h) {
  io::Frame f(w, h, io::ColorSpace::kRgb);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        f.plane(c).at(x, y) = std::round(127.5f + 80.0f * std::sin(x / (7.0f + c)) * std::cos(y / 11.0f));
  return f;
}

io::Frame add_noise(const io::Frame& f, double sigma, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> d(0.0, sigma);
  io::Frame o = f;
  for (int c = 0; c < 3; ++c)
    for (auto& v : o.plane(c).data) v = static_cast<float>(std::clamp(std::round(v + d(gen)), 0.0, 255.0));
  return o;
}

RDCurve curve(const std::vector<double>& r, const std::vector<double>& q) {
  RDCurve c;
  c.label = "c";
  for (std::size_t i = 0; i < r.size(); ++i) c.points.push_back({r[i], q[i], ""});
  return c;
}

}  // namespace

TEST(Psnr, CapForIdenticalFrames) {
  std::mt19937 gen(1);
  const io::Frame f = random_rgb(16, 16, gen);
  EXPECT_EQ(metrics::psnr(f, f), 99.0);
}

TEST(Psnr, UnitDifferenceGivesTwentyLog255) {
  const io::Frame a(8, 8, io::ColorSpace::kRgb, 100.0f), b(8, 8, io::ColorSpace::kRgb, 101.0f);
  EXPECT_NEAR(metrics::psnr(a, b), 48.1308, 1e-4);
  EXPECT_NEAR(metrics::psnr(a, b), 20 * std::log10(255.0), 1e-12);
}

TEST(Psnr, MatchesScalarLoopAndIsSymmetric) {
  std::mt19937 gen(2);
  const io::Frame a = random_rgb(33, 17, gen), b = random_rgb(33, 17, gen);
  double s = 0;
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 17; ++y)
      for (int x = 0; x < 33; ++x) {
        const double d = a.plane(c).at(x, y) - b.plane(c).at(x, y);
        s += d * d;
      }
  const double ref = 10 * std::log10(255.0 * 255.0 / (s / (3 * 33 * 17)));
  EXPECT_NEAR(metrics::psnr(a, b), ref, 1e-9);
  EXPECT_EQ(metrics::psnr(a, b), metrics::psnr(b, a));
}

TEST(Psnr, DecreasesWithNoiseAndRejectsMismatch) {
  const io::Frame f = smooth_rgb(64, 64);
  EXPECT_GT(metrics::psnr(f, add_noise(f, 2, 1)), metrics::psnr(f, add_noise(f, 5, 1)));
  EXPECT_GT(metrics::psnr(f, add_noise(f, 5, 1)), metrics::psnr(f, add_noise(f, 12, 1)));
  EXPECT_THROW(metrics::psnr(f, smooth_rgb(64, 32)), std::invalid_argument);
}

TEST(MsSsim, IdenticalFramesScoreExactlyOne) {
  const io::Frame f = smooth_rgb(192, 180);
  EXPECT_EQ(metrics::ms_ssim(f, f), 1.0);
  std::mt19937 gen(3);
  const io::Frame r = random_rgb(40, 30, gen);
  EXPECT_EQ(metrics::ms_ssim(r, r), 1.0);
}

TEST(MsSsim, MonotoneInNoiseAndSymmetric) {
  const io::Frame f = smooth_rgb(180, 176);
  const double s1 = metrics::ms_ssim(f, add_noise(f, 3, 4));
  const double s2 = metrics::ms_ssim(f, add_noise(f, 8, 4));
  const double s3 = metrics::ms_ssim(f, add_noise(f, 20, 4));
  EXPECT_LT(s1, 1.0);
  EXPECT_GT(s1, s2);
  EXPECT_GT(s2, s3);
  EXPECT_GT(s3, 0.0);
  const io::Frame g = add_noise(f, 8, 5);
  EXPECT_EQ(metrics::ms_ssim(f, g), metrics::ms_ssim(g, f));
}

TEST(MsSsim, ScaleCountFollowsSize) {
  EXPECT_EQ(metrics::ms_ssim_scales(176, 200), 5);
  EXPECT_EQ(metrics::ms_ssim_scales(175, 200), 4);
  EXPECT_EQ(metrics::ms_ssim_scales(1920, 1080), 5);
  EXPECT_EQ(metrics::ms_ssim_scales(64, 64), 3);
  EXPECT_EQ(metrics::ms_ssim_scales(11, 11), 1);
  EXPECT_THROW(metrics::ms_ssim_scales(10, 64), std::invalid_argument);
}

TEST(BdRate, IdenticalCurvesGiveZero) {
  const RDCurve c = curve({0.05, 0.1, 0.2, 0.4}, {30, 32.5, 34.8, 37});
  EXPECT_NEAR(metrics::bd_rate(c, c), 0.0, 1e-12);
}

TEST(BdRate, HalvedRatesGiveMinusFifty) {
  const RDCurve a = curve({0.05, 0.1, 0.2, 0.4}, {30, 32.5, 34.8, 37});
  const RDCurve t = curve({0.025, 0.05, 0.1, 0.2}, {30, 32.5, 34.8, 37});
  EXPECT_NEAR(metrics::bd_rate(a, t), -50.0, 1e-6);
  const RDCurve u = curve({0.06, 0.12, 0.24, 0.48}, {30, 32.5, 34.8, 37});
  EXPECT_NEAR(metrics::bd_rate(a, u), 20.0, 1e-6);
}

TEST(BdRate, MatchesScipyPchipValues) {
  // values from scipy.interpolate.PchipInterpolator(...).integrate
  EXPECT_NEAR(metrics::bd_rate(curve({0.05, 0.1, 0.2, 0.4}, {30.1, 32.5, 34.8, 37.0}),
                               curve({0.045, 0.085, 0.17, 0.36}, {30.3, 32.6, 35.1, 37.2})),
              -18.959818355466673, 1e-9);
  EXPECT_NEAR(metrics::bd_rate(curve({0.02, 0.05, 0.11, 0.3}, {28, 31.5, 33, 36.9}),
                               curve({0.03, 0.06, 0.1, 0.25}, {29, 31, 33.9, 36})),
              -1.2872436821471545, 1e-9);
  EXPECT_NEAR(metrics::bd_rate(curve({0.1, 0.15, 0.3, 0.9}, {0.91, 0.93, 0.955, 0.98}),
                               curve({0.08, 0.14, 0.25, 1.0}, {0.905, 0.935, 0.96, 0.985})),
              -22.081371551075012, 1e-9);
}

TEST(BdRate, AgreesWithReferenceOnRandomCurves) {
  std::mt19937 gen(6);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> ra, qa, rt, qt;
    double r = 0.01 + 0.05 * u(gen), q = 26 + 4 * u(gen);
    double r2 = r * (0.7 + 0.6 * u(gen)), q2 = q + u(gen) - 0.5;
    for (int i = 0; i < 4; ++i) {
      ra.push_back(r);
      qa.push_back(q);
      rt.push_back(r2);
      qt.push_back(q2);
      r *= 1.5 + u(gen);
      q += 1 + 2.5 * u(gen);
      r2 *= 1.5 + u(gen);
      q2 += 1 + 2.5 * u(gen);
    }
    const RDCurve a = curve(ra, qa), t = curve(rt, qt);
    EXPECT_NEAR(metrics::bd_rate(a, t), reference_bd_rate(a, t), 0.01) << "trial " << trial;
  }
}

TEST(BdRate, Errors) {
  const RDCurve a = curve({0.05, 0.1, 0.2, 0.4}, {30, 31, 32, 33});
  EXPECT_THROW(metrics::bd_rate(a, curve({0.05, 0.1, 0.2, 0.4}, {40, 41, 42, 43})), io::DataError);
  EXPECT_THROW(metrics::bd_rate(a, curve({0.05, 0.1, 0.2}, {30, 31, 32})), io::DataError);
  EXPECT_THROW(metrics::bd_rate(a, curve({0.05, 0.1, 0.2, 0.4}, {30, 32, 31, 33})), io::DataError);
}

TEST(Pchip, InterpolatesKnotsAndIntegratesCubicsExactly) {
  const metrics::Pchip p({0, 1, 2, 4}, {1, 3, 4, 4.5});
  EXPECT_DOUBLE_EQ(p(0), 1);
  EXPECT_DOUBLE_EQ(p(2), 4);
  EXPECT_DOUBLE_EQ(p(4), 4.5);
  // a straight line is reproduced, so its integral is exact
  const metrics::Pchip line({0, 1, 3, 6}, {2, 4, 8, 14});
  EXPECT_NEAR(line.integral(0.5, 5.0), (2 * 5.0 + 25.0) - (2 * 0.5 + 0.25), 1e-12);
}

TEST(Fluctuation, GopRowsAndStats) {
  const auto flat = metrics::fluctuation_trace(std::vector<double>(96, 33.0));
  ASSERT_EQ(flat.gops.size(), 3u);
  ASSERT_EQ(flat.frames.size(), 96u);
  for (const auto& g : flat.gops) EXPECT_EQ(g.stddev, 0.0);
  EXPECT_EQ(flat.gops[1].first_frame, 32);
  EXPECT_EQ(flat.gops[2].first_frame, 64);
  EXPECT_EQ(flat.frames[33].gop, 1);
  EXPECT_EQ(flat.frames[33].position, 1);

  std::vector<double> alt;
  for (int i = 0; i < 70; ++i) alt.push_back(35.0 + (i % 2 ? 1.0 : -1.0));
  const auto t = metrics::fluctuation_trace(alt);
  ASSERT_EQ(t.gops.size(), 3u);
  EXPECT_EQ(t.gops[0].max - t.gops[0].min, 2.0);
  EXPECT_EQ(t.gops[2].frames, 6);
  EXPECT_THROW(metrics::fluctuation_trace({}), std::invalid_argument);
}
