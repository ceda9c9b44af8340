#pragma once

#include <cstdint>
#include <vector>

#include "fga/numerics/tensor.hpp"

namespace fga::nn {

/// Convolution parameters. Weight is (out, in, kh, kw), bias is (out).
template <typename T>
struct ConvSpec {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel_h = 3;
  std::size_t kernel_w = 3;
  std::size_t stride = 1;
  std::size_t padding = 1;
  Tensor<T> weight;
  Tensor<T> bias;

  /// Zero weight and bias, marked as trainable parameters.
  static ConvSpec zeros(std::size_t in, std::size_t out, std::size_t kernel,
                        std::size_t stride = 1, std::size_t padding = 1);
  void validate() const;
};

/// conv -> leaky_relu -> conv with an additive skip. Both convs preserve the
/// channel count and spatial size.
template <typename T>
struct ResBlockSpec {
  ConvSpec<T> conv1;
  ConvSpec<T> conv2;
  T slope = T(0.1);

  static ResBlockSpec zeros(std::size_t channels);
};

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const ConvSpec<T>& spec);

template <typename T>
Tensor<T> apply_resblock(const Tensor<T>& x, const ResBlockSpec<T>& block);

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x);
template <typename T>
Tensor<T> leaky_relu(const Tensor<T>& x, T slope);
template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> scale(const Tensor<T>& x, T factor);

/// Reductions to a single-element tensor.
template <typename T>
Tensor<T> sum(const Tensor<T>& x);
template <typename T>
Tensor<T> mean(const Tensor<T>& x);
/// Mean of squared differences.
template <typename T>
Tensor<T> mse(const Tensor<T>& a, const Tensor<T>& b);
/// Mean absolute value; subgradient 0 at 0.
template <typename T>
Tensor<T> mean_abs(const Tensor<T>& x);

/// Concatenates rank-4 tensors along the channel axis.
template <typename T>
Tensor<T> concat_channels(const std::vector<Tensor<T>>& parts);
/// Splits along the channel axis; sizes must sum to the channel count.
template <typename T>
std::vector<Tensor<T>> split_channels(const Tensor<T>& x, const std::vector<std::size_t>& sizes);

/// Edge-clamped bilinear sampling at absolute positions; see
/// kernels::bilinear_forward. Differentiable in both arguments.
template <typename T>
Tensor<T> bilinear_sample(const Tensor<T>& feature, const Tensor<T>& coords);

/// Pixel-centre grid (N,2,H,W): channel 0 holds x, channel 1 holds y.
template <typename T>
Array<T> identity_grid(std::size_t n, std::size_t h, std::size_t w);

/// Samples `feature` at p + flow(p). flow is (N,2,H,W) in pixels.
template <typename T>
Tensor<T> warp(const Tensor<T>& feature, const Tensor<T>& flow);

/// Modulated deformable convolution; see kernels::deform_conv_forward for the
/// offset and mask channel layout.
template <typename T>
Tensor<T> deformable_conv(const Tensor<T>& x, const Tensor<T>& offsets, const Tensor<T>& mask,
                          const ConvSpec<T>& spec, std::size_t groups = 1);

/// Deterministic fill helpers for tests and initialisation. The generator
/// is a fixed-algorithm 64-bit PRNG so values are platform independent.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next_u64();
  /// Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal (Box-Muller).
  double normal();
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(next_u64() % n); }

 private:
  std::uint64_t state_;
};

template <typename T>
Array<T> random_array(const Shape& shape, Rng& rng, double lo = -1.0, double hi = 1.0);

}  // namespace fga::nn
