#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fga/imageio/frame.hpp"

namespace fga::io {

enum class SynthKind { kStatic, kGlobalShift, kAffine, kRotatingTexture };

SynthKind parse_synth_kind(const std::string& name);
const char* to_string(SynthKind kind);

struct SynthParams {
  SynthKind kind = SynthKind::kGlobalShift;
  int width = 64;
  int height = 64;
  int frames = 2;
  std::uint64_t seed = 1;
  /// Global shift in pixels per frame (global_shift; also the translation
  /// part of affine).
  double shift_x = 3.0;
  double shift_y = 0.0;
  /// Rotation in radians per frame about the frame centre (affine,
  /// rotating_texture).
  double rotation = 0.0;
  /// Multiplicative zoom per frame (affine).
  double zoom = 1.0;
  /// Finest noise period in pixels; octaves double from here up to 8x.
  double texture_period = 8.0;
};

/// Maps frame pixel coordinates to texture coordinates:
/// tx = a*x + b*y + c, ty = d*x + e*y + f.
struct Affine {
  double a = 1, b = 0, c = 0, d = 0, e = 1, f = 0;
  void apply(double x, double y, double& tx, double& ty) const {
    tx = a * x + b * y + c;
    ty = d * x + e * y + f;
  }
  Affine inverse() const;
  Affine then(const Affine& outer) const;  // outer(this(p))
};

struct SynthSequence {
  std::vector<Frame> frames;          // RGB
  std::vector<Affine> to_texture;     // per frame: pixel -> texture coords
};

/// Deterministic RGB sequence over seeded smooth value noise. Frame k
/// samples the texture at to_texture[k](p).
SynthSequence synth_sequence(const SynthParams& params);

/// Renders one RGB frame from the texture under an arbitrary mapping.
Frame render_texture(int width, int height, std::uint64_t seed, double period,
                     const Affine& to_texture);

/// Ground-truth displacement at pixel p of frame `cur` pointing into frame
/// `ref` (same convention as estimated flow).
void true_displacement(const SynthSequence& seq, int cur, int ref, double x, double y, double& dx,
                       double& dy);

}  // namespace fga::io
