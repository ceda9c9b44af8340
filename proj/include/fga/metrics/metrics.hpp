#pragma once

#include <string>
#include <vector>

#include "fga/imageio/frame.hpp"

namespace fga::metrics {

inline constexpr double kPsnrCap = 99.0;

/// 10 log10(255^2 / MSE) with the MSE pooled over all pixels and channels;
/// kPsnrCap when the frames are identical.
double psnr(const io::Frame& a, const io::Frame& b);
double psnr_from_mse(double mse);

/// Multi-scale SSIM per RGB channel, averaged. 11x11 Gaussian (sigma 1.5),
/// K1 = 0.01, K2 = 0.03, valid filtering, 2x2 average downsampling. Uses
/// min(5, floor(log2(min_dim / 11)) + 1) scales with the leading weights
/// renormalised.
double ms_ssim(const io::Frame& a, const io::Frame& b);
int ms_ssim_scales(int width, int height);

struct RDPoint {
  double bpp = 0;
  double quality = 0;
  std::string label;
};

struct RDCurve {
  std::string label;
  std::vector<RDPoint> points;

  /// Sorts by rate and checks bpp > 0, strictly increasing rate and quality.
  void validate();
};

/// Bjontegaard delta rate in percent (negative: test needs fewer bits).
/// log10(rate) is interpolated against quality with a monotone piecewise
/// cubic Hermite (PCHIP) curve and integrated exactly over the common
/// quality interval.
double bd_rate(RDCurve anchor, RDCurve test);

/// Monotone cubic Hermite interpolant (Fritsch-Carlson slopes with the
/// weighted harmonic mean and the non-centred three-point end rule).
class Pchip {
 public:
  Pchip(std::vector<double> x, std::vector<double> y);
  double operator()(double x) const;
  /// Exact integral over [a, b] within the data range.
  double integral(double a, double b) const;
  const std::vector<double>& slopes() const { return m_; }

 private:
  std::size_t segment(double x) const;
  double integral_from_start(std::size_t k, double x) const;
  std::vector<double> x_, y_, m_;
};

struct FluctuationRow {
  int frame = 0;
  int gop = 0;
  int position = 0;
  double psnr = 0;
};

struct GopStats {
  int gop = 0;
  int first_frame = 0;
  int frames = 0;
  double min = 0;
  double max = 0;
  double mean = 0;
  double stddev = 0;  // population
};

struct FluctuationTrace {
  std::vector<FluctuationRow> frames;
  std::vector<GopStats> gops;
};

FluctuationTrace fluctuation_trace(const std::vector<double>& per_frame_psnr, int gop = 32);

}  // namespace fga::metrics
