#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fga/flow/flow.hpp"
#include "fga/numerics/ops.hpp"

namespace fga::tsmc {

using nn::Tensor;

struct TsmcConfig {
  std::array<std::size_t, 3> channels = {32, 64, 96};
  std::size_t kernel = 3;
  std::size_t groups = 1;
  /// Centre-tap weight of the deformable conv at initialisation. 2 undoes
  /// the 0.5 mask of a zero-initialised hidden branch, so the module starts
  /// as a plain flow-guided warp.
  double dcn_centre = 2.0;
  std::uint64_t seed = 1;

  static TsmcConfig toy();  // (8, 8, 8)
  std::size_t taps() const { return kernel * kernel; }
  std::size_t offset_channels() const { return 2 * groups * taps(); }
  std::size_t mask_channels() const { return groups * taps(); }
};

template <typename T>
struct LevelParams {
  nn::ResBlockSpec<T> hidden_block;  // on concat[warped, feature]
  nn::ConvSpec<T> hidden_conv;       // -> offsets + mask logits
  nn::ConvSpec<T> fine_conv;         // flow -> fine offsets
  nn::ConvSpec<T> dcn;
  std::array<nn::ResBlockSpec<T>, 2> refine;
};

template <typename T>
struct FgdParams {
  TsmcConfig config;
  nn::ConvSpec<T> stem;                  // RGB -> C1
  std::array<nn::ConvSpec<T>, 2> down;   // stride 2, C1 -> C2 -> C3
  std::array<nn::ResBlockSpec<T>, 3> pyramid_blocks;
  std::array<LevelParams<T>, 3> levels;

  /// Random pyramid and hidden residual blocks, zero hidden output conv,
  /// flow-replicating fine conv, centre-tap deformable conv, refinement
  /// blocks whose second conv is zero.
  static FgdParams init(const TsmcConfig& cfg);

  /// Every trainable tensor with a stable dotted name, in a fixed order.
  std::vector<std::pair<std::string, Tensor<T>*>> named();
  std::vector<std::pair<std::string, const Tensor<T>*>> named() const;

  /// Deep copy with fresh graph nodes.
  FgdParams clone() const;
  template <typename U>
  FgdParams<U> cast() const;
};

template <typename T>
struct OffsetMask {
  Tensor<T> offsets;         // coarse + fine
  Tensor<T> mask;            // in (0, 1)
  Tensor<T> coarse_offsets;
  int level = 1;
};

template <typename T>
struct LevelOutput {
  Tensor<T> feature;   // F^s of the reference
  Tensor<T> flow;      // v^s, (1, 2, h, w)
  Tensor<T> warped;    // coarse warp of F^s
  OffsetMask<T> om;
  Tensor<T> aligned;   // C^s
  Tensor<T> refined;   // refined C^s
};

template <typename T>
using Pyramid = std::array<Tensor<T>, 3>;

template <typename T>
Tensor<T> frame_to_tensor(const io::Frame& rgb);  // (1, 3, H, W), scaled to [0, 1]
template <typename T>
Tensor<T> flow_to_tensor(const flow::FlowField& f);
io::Frame tensor_to_frame(const Tensor<float>& t);  // x255, rounded, clipped

/// Level 1 at full size, levels 2 and 3 through stride-2 convs; one
/// residual block per level. H and W must be multiples of 4.
template <typename T>
Pyramid<T> build_feature_pyramid(const Tensor<T>& image, const FgdParams<T>& p);

template <typename T>
OffsetMask<T> predict_offsets_masks(const Tensor<T>& feature, const Tensor<T>& flow, const FgdParams<T>& p,
                                    int level);

template <typename T>
Tensor<T> deformable_align(const Tensor<T>& feature, const OffsetMask<T>& om, const FgdParams<T>& p, int level);

template <typename T>
Pyramid<T> refine_contexts(const Pyramid<T>& contexts, const FgdParams<T>& p);

/// Full second stage. flow is at the image resolution; level s uses it
/// rescaled by 2^(1-s).
template <typename T>
std::array<LevelOutput<T>, 3> tsmc_forward(const Tensor<T>& ref_image, const flow::FlowField& flow,
                                           const FgdParams<T>& p);

/// Flat archive: "FGACKPT\0", u32 version, u32 count, then per tensor
/// u32 name length, name, u8 element size (4 or 8), u32 rank, u64 dims,
/// little-endian values.
template <typename T>
void save_checkpoint(const std::string& path, const FgdParams<T>& p);
/// Loads into a parameter set of matching layout; values are converted to T.
template <typename T>
void load_checkpoint(const std::string& path, FgdParams<T>& p);

}  // namespace fga::tsmc
