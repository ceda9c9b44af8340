#include "fga/flow/flow.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "fga/imageio/geometry.hpp"

namespace fga::flow {
namespace {

void require_same(const Plane& p, const FlowField& f) {
  if (p.width != f.width || p.height != f.height)
    throw std::invalid_argument(
        fmt::format("flow {}x{} does not match target {}x{}", f.width, f.height, p.width, p.height));
}

Plane component(const FlowField& f, bool y) {
  Plane p;
  p.width = f.width;
  p.height = f.height;
  p.data = y ? f.vy : f.vx;
  return p;
}

// 5-tap binomial blur, edge clamped
Plane blur(const Plane& p) {
  static constexpr float k[5] = {1 / 16.f, 4 / 16.f, 6 / 16.f, 4 / 16.f, 1 / 16.f};
  Plane tmp(p.width, p.height), out(p.width, p.height);
  for (int y = 0; y < p.height; ++y)
    for (int x = 0; x < p.width; ++x) {
      float s = 0;
      for (int i = -2; i <= 2; ++i) s += k[i + 2] * p.at(std::clamp(x + i, 0, p.width - 1), y);
      tmp.at(x, y) = s;
    }
  for (int y = 0; y < p.height; ++y)
    for (int x = 0; x < p.width; ++x) {
      float s = 0;
      for (int i = -2; i <= 2; ++i) s += k[i + 2] * tmp.at(x, std::clamp(y + i, 0, p.height - 1));
      out.at(x, y) = s;
    }
  return out;
}

void gradients(const Plane& p, Plane& gx, Plane& gy) {
  gx = Plane(p.width, p.height);
  gy = Plane(p.width, p.height);
  for (int y = 0; y < p.height; ++y)
    for (int x = 0; x < p.width; ++x) {
      const int xl = std::max(x - 1, 0), xr = std::min(x + 1, p.width - 1);
      const int yu = std::max(y - 1, 0), yd = std::min(y + 1, p.height - 1);
      gx.at(x, y) = (p.at(xr, y) - p.at(xl, y)) / static_cast<float>(std::max(xr - xl, 1));
      gy.at(x, y) = (p.at(x, yd) - p.at(x, yu)) / static_cast<float>(std::max(yd - yu, 1));
    }
}

// window sums through a summed-area table
class BoxSum {
 public:
  BoxSum(int w, int h) : w_(w), h_(h), table_(static_cast<std::size_t>(w + 1) * (h + 1)) {}
  template <class F>
  void build(F&& value) {
    for (int y = 0; y < h_; ++y) {
      double row = 0;
      for (int x = 0; x < w_; ++x) {
        row += value(static_cast<std::size_t>(y) * w_ + x);
        at(x + 1, y + 1) = at(x + 1, y) + row;
      }
    }
  }
  double sum(int x0, int y0, int x1, int y1) const {  // inclusive-exclusive
    return at(x1, y1) - at(x0, y1) - at(x1, y0) + at(x0, y0);
  }

 private:
  double& at(int x, int y) { return table_[static_cast<std::size_t>(y) * (w_ + 1) + x]; }
  double at(int x, int y) const { return table_[static_cast<std::size_t>(y) * (w_ + 1) + x]; }
  int w_, h_;
  std::vector<double> table_;
};

double sse(const Plane& a, const Plane& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = static_cast<double>(a.data[i]) - b.data[i];
    s += d * d;
  }
  return s;
}

Plane half(const Plane& p) { return io::resize_bilinear(p, io::scaled_extent(p.width, 2.0), io::scaled_extent(p.height, 2.0)); }

}  // namespace

FlowField::FlowField(int w, int h, float fx, float fy)
    : width(w), height(h), vx(static_cast<std::size_t>(w) * h, fx), vy(static_cast<std::size_t>(w) * h, fy) {
  if (w <= 0 || h <= 0) throw std::invalid_argument(fmt::format("flow size {}x{} must be positive", w, h));
}

Plane warp(const Plane& target, const FlowField& flow) {
  require_same(target, flow);
  Plane out(target.width, target.height);
  const float xmax = static_cast<float>(target.width - 1), ymax = static_cast<float>(target.height - 1);
  for (int y = 0; y < target.height; ++y)
    for (int x = 0; x < target.width; ++x) {
      const std::size_t i = flow.index(x, y);
      const float sx = std::clamp(static_cast<float>(x) + flow.vx[i], 0.0f, xmax);
      const float sy = std::clamp(static_cast<float>(y) + flow.vy[i], 0.0f, ymax);
      const int x0 = static_cast<int>(sx), y0 = static_cast<int>(sy);
      const int x1 = std::min(x0 + 1, target.width - 1), y1 = std::min(y0 + 1, target.height - 1);
      const float lx = sx - x0, ly = sy - y0;
      const float v00 = target.at(x0, y0), v01 = target.at(x1, y0);
      const float v10 = target.at(x0, y1), v11 = target.at(x1, y1);
      const float top = v00 + lx * (v01 - v00);
      const float bot = v10 + lx * (v11 - v10);
      out.at(x, y) = top + ly * (bot - top);
    }
  return out;
}

Frame warp(const Frame& target, const FlowField& flow) {
  if (target.color_space() == io::ColorSpace::kYuv420) throw std::invalid_argument("warp expects a 4:4:4 frame");
  Frame out(target.width(), target.height(), target.color_space());
  for (int c = 0; c < 3; ++c) out.plane(c) = warp(target.plane(c), flow);
  return out;
}

double flow_magnitude(const FlowField& flow) {
  double sx = 0, sy = 0;
  for (float v : flow.vx) sx += static_cast<double>(v) * v;
  for (float v : flow.vy) sy += static_cast<double>(v) * v;
  return std::sqrt((sx + sy + 1e-8) / (static_cast<double>(flow.width) * flow.height));
}

FlowField resize_flow(const FlowField& flow, int width, int height) {
  if (width == flow.width && height == flow.height) return flow;
  const float fx = static_cast<float>(static_cast<double>(width) / flow.width);
  const float fy = static_cast<float>(static_cast<double>(height) / flow.height);
  FlowField out;
  out.width = width;
  out.height = height;
  out.vx = io::resize_bilinear(component(flow, false), width, height).data;
  out.vy = io::resize_bilinear(component(flow, true), width, height).data;
  for (auto& v : out.vx) v *= fx;
  for (auto& v : out.vy) v *= fy;
  return out;
}

FlowField rescale_flow(const FlowField& flow, double factor) {
  if (!(factor > 0)) throw std::invalid_argument("rescale factor must be positive");
  if (factor == 1.0) return flow;
  const int w = io::scaled_extent(flow.width, 1.0 / factor);
  const int h = io::scaled_extent(flow.height, 1.0 / factor);
  FlowField out;
  out.width = w;
  out.height = h;
  out.vx = io::resize_bilinear(component(flow, false), w, h).data;
  out.vy = io::resize_bilinear(component(flow, true), w, h).data;
  const float f = static_cast<float>(factor);
  for (auto& v : out.vx) v *= f;
  for (auto& v : out.vy) v *= f;
  return out;
}

void write_flow(const std::string& path, const FlowField& flow) {
  static_assert(std::endian::native == std::endian::little, "flow dumps assume a little-endian host");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io::DataError(fmt::format("cannot open {} for writing", path));
  out << "FLOW " << flow.width << ' ' << flow.height << '\n';
  for (std::size_t i = 0; i < flow.vx.size(); ++i) {
    out.write(reinterpret_cast<const char*>(&flow.vx[i]), 4);
    out.write(reinterpret_cast<const char*>(&flow.vy[i]), 4);
  }
}

FlowField read_flow(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::string tag;
  int w = 0, h = 0;
  if (!(in >> tag >> w >> h) || tag != "FLOW" || w <= 0 || h <= 0 || in.get() != '\n')
    throw io::DataError(fmt::format("{}: not a flow dump", path));
  FlowField f(w, h);
  for (std::size_t i = 0; i < f.vx.size(); ++i) {
    in.read(reinterpret_cast<char*>(&f.vx[i]), 4);
    in.read(reinterpret_cast<char*>(&f.vy[i]), 4);
  }
  if (!in) throw io::DataError(fmt::format("{}: truncated flow dump", path));
  return f;
}

double luma_warp_sse(const Plane& cur, const Plane& ref, const FlowField& flow) {
  return sse(cur, warp(ref, flow));
}

PyramidLucasKanade::PyramidLucasKanade(EstimatorOptions opts) : opts_(opts) {
  if (opts_.levels < 1 || opts_.iterations < 0 || opts_.window < 1 || opts_.window % 2 == 0)
    throw std::invalid_argument("estimator needs levels >= 1, iterations >= 0 and an odd window");
}

FlowField PyramidLucasKanade::estimate(const Frame& cur, const Frame& ref) const {
  if (cur.width() != ref.width() || cur.height() != ref.height())
    throw std::invalid_argument(fmt::format("frame sizes differ: {}x{} vs {}x{}", cur.width(), cur.height(),
                                            ref.width(), ref.height()));
  return estimate_luma(io::luma_plane(cur), io::luma_plane(ref));
}

FlowField PyramidLucasKanade::estimate_luma(const Plane& cur, const Plane& ref) const {
  if (cur.width < min_extent() || cur.height < min_extent())
    throw std::invalid_argument(fmt::format("{}x{} is below the {}-level minimum of {} px", cur.width, cur.height,
                                            opts_.levels, min_extent()));
  std::vector<Plane> pc{blur(cur)}, pr{blur(ref)};
  for (int l = 1; l < opts_.levels; ++l) {
    pc.push_back(blur(half(pc.back())));
    pr.push_back(blur(half(pr.back())));
  }

  const int r = opts_.window / 2;
  FlowField flow(pc.back().width, pc.back().height);
  for (int l = opts_.levels - 1; l >= 0; --l) {
    const Plane& I = pc[l];
    const Plane& J = pr[l];
    const int w = I.width, h = I.height;
    flow = resize_flow(flow, w, h);

    Plane ix, iy;
    gradients(I, ix, iy);
    Plane jw = warp(J, flow);
    double best = sse(I, jw);
    const double zero = sse(I, J);
    if (zero < best) {
      flow = FlowField(w, h);
      jw = J;
      best = zero;
    }

    BoxSum sxx(w, h), sxy(w, h), syy(w, h), sxt(w, h), syt(w, h);
    std::vector<float> gx(I.data.size()), gy(I.data.size()), it(I.data.size());
    for (int k = 0; k < opts_.iterations; ++k) {
      Plane jx, jy;
      gradients(jw, jx, jy);
      for (std::size_t i = 0; i < gx.size(); ++i) {
        gx[i] = 0.5f * (ix.data[i] + jx.data[i]);
        gy[i] = 0.5f * (iy.data[i] + jy.data[i]);
        it[i] = jw.data[i] - I.data[i];
      }
      sxx.build([&](std::size_t i) { return double(gx[i]) * gx[i]; });
      sxy.build([&](std::size_t i) { return double(gx[i]) * gy[i]; });
      syy.build([&](std::size_t i) { return double(gy[i]) * gy[i]; });
      sxt.build([&](std::size_t i) { return double(gx[i]) * it[i]; });
      syt.build([&](std::size_t i) { return double(gy[i]) * it[i]; });

      FlowField next = flow;
      for (int y = 0; y < h; ++y) {
        const int y0 = std::max(y - r, 0), y1 = std::min(y + r + 1, h);
        for (int x = 0; x < w; ++x) {
          const int x0 = std::max(x - r, 0), x1 = std::min(x + r + 1, w);
          const double a = sxx.sum(x0, y0, x1, y1) + opts_.regularization;
          const double b = sxy.sum(x0, y0, x1, y1);
          const double c = syy.sum(x0, y0, x1, y1) + opts_.regularization;
          const double bx = sxt.sum(x0, y0, x1, y1), by = syt.sum(x0, y0, x1, y1);
          const double det = a * c - b * b;
          if (!(det > 0)) continue;
          const double du = -(c * bx - b * by) / det;
          const double dv = -(a * by - b * bx) / det;
          const std::size_t i = flow.index(x, y);
          next.vx[i] += static_cast<float>(std::clamp(du, -2.0, 2.0));
          next.vy[i] += static_cast<float>(std::clamp(dv, -2.0, 2.0));
        }
      }
      Plane jn = warp(J, next);
      const double e = sse(I, jn);
      if (!(e < best)) break;
      best = e;
      flow = std::move(next);
      jw = std::move(jn);
    }
  }

  // the guarantee is stated on the unblurred luma
  if (luma_warp_sse(cur, ref, flow) > sse(cur, ref)) return FlowField(cur.width, cur.height);
  return flow;
}

FlowField estimate_flow(const Frame& cur, const Frame& ref, int levels, int iterations) {
  EstimatorOptions o;
  o.levels = levels;
  o.iterations = iterations;
  return PyramidLucasKanade(o).estimate(cur, ref);
}

}  // namespace fga::flow
