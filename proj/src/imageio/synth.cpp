#include "fga/imageio/synth.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace fga::io {
namespace {

std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double lattice(std::int64_t ix, std::int64_t iy, std::uint64_t key) {
  std::uint64_t h = mix(key ^ mix(static_cast<std::uint64_t>(ix) ^ mix(static_cast<std::uint64_t>(iy))));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double fade(double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }

double value_noise(double x, double y, std::uint64_t key) {
  const double fx = std::floor(x), fy = std::floor(y);
  const auto ix = static_cast<std::int64_t>(fx), iy = static_cast<std::int64_t>(fy);
  const double u = fade(x - fx), v = fade(y - fy);
  const double a = lattice(ix, iy, key), b = lattice(ix + 1, iy, key);
  const double c = lattice(ix, iy + 1, key), d = lattice(ix + 1, iy + 1, key);
  const double top = a + u * (b - a);
  const double bot = c + u * (d - c);
  return top + v * (bot - top);
}

constexpr std::array<double, 4> kOctaveWeights = {0.12, 0.18, 0.30, 0.40};  // fine to coarse

double texture(double tx, double ty, std::uint64_t seed, int channel, double period) {
  double s = 0.0, p = period;
  for (std::size_t o = 0; o < kOctaveWeights.size(); ++o, p *= 2.0) {
    const std::uint64_t key = mix(seed * 0x100 + static_cast<std::uint64_t>(channel) * 0x10 + o);
    s += kOctaveWeights[o] * value_noise(tx / p, ty / p, key);
  }
  // stretch contrast around the mean; octave sums rarely reach the extremes
  return std::clamp(128.0 + 1.6 * 255.0 * (s - 0.5), 0.0, 255.0);
}

Affine about_centre(double cx, double cy, double scale, double angle, double tx, double ty) {
  // p -> c + scale * R(angle) (p - c) + t
  const double cs = std::cos(angle) * scale, sn = std::sin(angle) * scale;
  Affine m;
  m.a = cs;
  m.b = -sn;
  m.d = sn;
  m.e = cs;
  m.c = cx - cs * cx + sn * cy + tx;
  m.f = cy - sn * cx - cs * cy + ty;
  return m;
}

}  // namespace

SynthKind parse_synth_kind(const std::string& name) {
  if (name == "static") return SynthKind::kStatic;
  if (name == "global_shift") return SynthKind::kGlobalShift;
  if (name == "affine") return SynthKind::kAffine;
  if (name == "rotating_texture") return SynthKind::kRotatingTexture;
  throw std::invalid_argument(fmt::format("unknown synthetic kind '{}'", name));
}

const char* to_string(SynthKind kind) {
  switch (kind) {
    case SynthKind::kStatic: return "static";
    case SynthKind::kGlobalShift: return "global_shift";
    case SynthKind::kAffine: return "affine";
    case SynthKind::kRotatingTexture: return "rotating_texture";
  }
  return "?";
}

Affine Affine::inverse() const {
  const double det = a * e - b * d;
  if (det == 0.0) throw std::invalid_argument("singular affine map");
  Affine r;
  r.a = e / det;
  r.b = -b / det;
  r.d = -d / det;
  r.e = a / det;
  r.c = -(r.a * c + r.b * f);
  r.f = -(r.d * c + r.e * f);
  return r;
}

Affine Affine::then(const Affine& o) const {
  Affine r;
  r.a = o.a * a + o.b * d;
  r.b = o.a * b + o.b * e;
  r.c = o.a * c + o.b * f + o.c;
  r.d = o.d * a + o.e * d;
  r.e = o.d * b + o.e * e;
  r.f = o.d * c + o.e * f + o.f;
  return r;
}

Frame render_texture(int width, int height, std::uint64_t seed, double period, const Affine& to_texture) {
  Frame f(width, height, ColorSpace::kRgb);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      double tx, ty;
      to_texture.apply(x, y, tx, ty);
      for (int c = 0; c < 3; ++c) f.plane(c).at(x, y) = static_cast<float>(std::round(texture(tx, ty, seed, c, period)));
    }
  return f;
}

SynthSequence synth_sequence(const SynthParams& p) {
  if (p.frames < 1) throw std::invalid_argument("synth_sequence needs at least one frame");
  if (!(p.texture_period > 0)) throw std::invalid_argument("texture period must be positive");
  const double limit = std::min(p.width, p.height);
  if (std::hypot(p.shift_x, p.shift_y) >= limit && p.kind != SynthKind::kStatic &&
      p.kind != SynthKind::kRotatingTexture)
    throw std::invalid_argument(fmt::format("per-frame motion ({}, {}) px exceeds the {}x{} frame", p.shift_x,
                                            p.shift_y, p.width, p.height));
  if (p.kind == SynthKind::kAffine && !(p.zoom > 0)) throw std::invalid_argument("zoom must be positive");

  const double cx = (p.width - 1) / 2.0, cy = (p.height - 1) / 2.0;
  // step: pixel in frame k -> pixel in frame k-1 showing the same content
  Affine step;
  switch (p.kind) {
    case SynthKind::kStatic: break;
    case SynthKind::kGlobalShift:
      step.c = -p.shift_x;
      step.f = -p.shift_y;
      break;
    case SynthKind::kAffine:
      step = about_centre(cx, cy, p.zoom, p.rotation, p.shift_x, p.shift_y).inverse();
      break;
    case SynthKind::kRotatingTexture:
      step = about_centre(cx, cy, 1.0, p.rotation, 0, 0).inverse();
      break;
  }

  SynthSequence seq;
  Affine t;
  for (int k = 0; k < p.frames; ++k) {
    if (k > 0) t = step.then(t);
    seq.to_texture.push_back(t);
    seq.frames.push_back(render_texture(p.width, p.height, p.seed, p.texture_period, t));
  }
  return seq;
}

void true_displacement(const SynthSequence& seq, int cur, int ref, double x, double y, double& dx, double& dy) {
  const Affine m = seq.to_texture.at(cur).then(seq.to_texture.at(ref).inverse());
  double qx, qy;
  m.apply(x, y, qx, qy);
  dx = qx - x;
  dy = qy - y;
}

}  // namespace fga::io
