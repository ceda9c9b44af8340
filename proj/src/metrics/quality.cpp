#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "fga/metrics/metrics.hpp"

namespace fga::metrics {
namespace {

void require_same(const io::Frame& a, const io::Frame& b) {
  if (a.width() != b.width() || a.height() != b.height())
    throw std::invalid_argument(
        fmt::format("frame sizes differ: {}x{} vs {}x{}", a.width(), a.height(), b.width(), b.height()));
  if (a.color_space() != io::ColorSpace::kRgb || b.color_space() != io::ColorSpace::kRgb)
    throw std::invalid_argument("quality metrics expect RGB frames");
}

struct Grid {
  int w = 0, h = 0;
  std::vector<double> v;
  Grid(int w_, int h_) : w(w_), h(h_), v(static_cast<std::size_t>(w_) * h_) {}
  double& at(int x, int y) { return v[static_cast<std::size_t>(y) * w + x]; }
  double at(int x, int y) const { return v[static_cast<std::size_t>(y) * w + x]; }
};

constexpr int kWin = 11;
constexpr std::array<double, 5> kWeights = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};

std::array<double, kWin> gaussian() {
  std::array<double, kWin> g{};
  double s = 0;
  for (int i = 0; i < kWin; ++i) {
    const double d = i - kWin / 2;
    g[i] = std::exp(-d * d / (2 * 1.5 * 1.5));
    s += g[i];
  }
  for (double& v : g) v /= s;
  return g;
}

Grid filter_valid(const Grid& in) {
  static const auto g = gaussian();
  Grid tmp(in.w - kWin + 1, in.h), out(in.w - kWin + 1, in.h - kWin + 1);
  for (int y = 0; y < in.h; ++y)
    for (int x = 0; x < tmp.w; ++x) {
      double s = 0;
      for (int i = 0; i < kWin; ++i) s += g[i] * in.at(x + i, y);
      tmp.at(x, y) = s;
    }
  for (int y = 0; y < out.h; ++y)
    for (int x = 0; x < out.w; ++x) {
      double s = 0;
      for (int i = 0; i < kWin; ++i) s += g[i] * tmp.at(x, y + i);
      out.at(x, y) = s;
    }
  return out;
}

Grid product(const Grid& a, const Grid& b) {
  Grid o(a.w, a.h);
  for (std::size_t i = 0; i < o.v.size(); ++i) o.v[i] = a.v[i] * b.v[i];
  return o;
}

Grid downsample(const Grid& g) {
  Grid o(g.w / 2, g.h / 2);
  for (int y = 0; y < o.h; ++y)
    for (int x = 0; x < o.w; ++x)
      o.at(x, y) = (g.at(2 * x, 2 * y) + g.at(2 * x + 1, 2 * y) + g.at(2 * x, 2 * y + 1) + g.at(2 * x + 1, 2 * y + 1)) / 4.0;
  return o;
}

// mean luminance term and mean contrast-structure term at one scale
void ssim_terms(const Grid& a, const Grid& b, double& l, double& cs) {
  constexpr double c1 = (0.01 * 255) * (0.01 * 255);
  constexpr double c2 = (0.03 * 255) * (0.03 * 255);
  const Grid mu_a = filter_valid(a), mu_b = filter_valid(b);
  const Grid aa = filter_valid(product(a, a)), bb = filter_valid(product(b, b)), ab = filter_valid(product(a, b));
  double ls = 0, css = 0;
  for (std::size_t i = 0; i < mu_a.v.size(); ++i) {
    const double ma = mu_a.v[i], mb = mu_b.v[i];
    const double va = aa.v[i] - ma * ma, vb = bb.v[i] - mb * mb, cov = ab.v[i] - ma * mb;
    ls += (2 * ma * mb + c1) / (ma * ma + mb * mb + c1);
    css += (2 * cov + c2) / (va + vb + c2);
  }
  l = ls / mu_a.v.size();
  cs = css / mu_a.v.size();
}

}  // namespace

double psnr_from_mse(double mse) {
  if (mse <= 0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(255.0 * 255.0 / mse));
}

double psnr(const io::Frame& a, const io::Frame& b) {
  require_same(a, b);
  double s = 0;
  std::size_t n = 0;
  for (int c = 0; c < 3; ++c) {
    const auto& pa = a.plane(c).data;
    const auto& pb = b.plane(c).data;
    for (std::size_t i = 0; i < pa.size(); ++i) {
      const double d = static_cast<double>(pa[i]) - pb[i];
      s += d * d;
    }
    n += pa.size();
  }
  return psnr_from_mse(s / n);
}

int ms_ssim_scales(int width, int height) {
  const int m = std::min(width, height);
  if (m < kWin) throw std::invalid_argument(fmt::format("MS-SSIM needs at least {} px, got {}", kWin, m));
  return std::min(5, static_cast<int>(std::floor(std::log2(m / static_cast<double>(kWin)))) + 1);
}

double ms_ssim(const io::Frame& a, const io::Frame& b) {
  require_same(a, b);
  const int scales = ms_ssim_scales(a.width(), a.height());
  double wsum = 0;
  for (int i = 0; i < scales; ++i) wsum += kWeights[i];
  double total = 0;
  for (int c = 0; c < 3; ++c) {
    Grid ga(a.width(), a.height()), gb(a.width(), a.height());
    for (std::size_t i = 0; i < ga.v.size(); ++i) {
      ga.v[i] = a.plane(c).data[i];
      gb.v[i] = b.plane(c).data[i];
    }
    double score = 1.0;
    for (int s = 0; s < scales; ++s) {
      double l, cs;
      ssim_terms(ga, gb, l, cs);
      const double w = kWeights[s] / wsum;
      // negative structure correlation clamps to zero similarity
      score *= std::pow(std::max(cs, 0.0), w);
      if (s == scales - 1) score *= std::pow(std::max(l, 0.0), w);
      if (s + 1 < scales) {
        ga = downsample(ga);
        gb = downsample(gb);
      }
    }
    total += score;
  }
  return total / 3.0;
}

FluctuationTrace fluctuation_trace(const std::vector<double>& psnr, int gop) {
  if (psnr.empty()) throw std::invalid_argument("fluctuation trace needs at least one frame");
  if (gop < 1) throw std::invalid_argument("GOP size must be positive");
  FluctuationTrace t;
  for (std::size_t i = 0; i < psnr.size(); ++i)
    t.frames.push_back({static_cast<int>(i), static_cast<int>(i) / gop, static_cast<int>(i) % gop, psnr[i]});
  for (std::size_t start = 0; start < psnr.size(); start += gop) {
    const std::size_t end = std::min(psnr.size(), start + gop);
    GopStats g;
    g.gop = static_cast<int>(start) / gop;
    g.first_frame = static_cast<int>(start);
    g.frames = static_cast<int>(end - start);
    g.min = *std::min_element(psnr.begin() + start, psnr.begin() + end);
    g.max = *std::max_element(psnr.begin() + start, psnr.begin() + end);
    double s = 0;
    for (std::size_t i = start; i < end; ++i) s += psnr[i];
    g.mean = s / g.frames;
    double v = 0;
    for (std::size_t i = start; i < end; ++i) v += (psnr[i] - g.mean) * (psnr[i] - g.mean);
    g.stddev = std::sqrt(v / g.frames);
    t.gops.push_back(g);
  }
  return t;
}

}  // namespace fga::metrics
