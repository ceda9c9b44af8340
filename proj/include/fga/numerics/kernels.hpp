#pragma once

// Forward and backward kernels on plain arrays. These carry no graph state
// and are safe to call concurrently. The differentiable wrappers in ops.hpp
// are built on top of them.

#include "fga/numerics/array.hpp"

namespace fga::nn::kernels {

std::size_t conv_out_size(std::size_t in, std::size_t kernel, std::size_t stride,
                          std::size_t padding);

/// Zero-padded 2-D cross-correlation. x: (N,Cin,H,W), w: (Cout,Cin,kh,kw),
/// b: (Cout).
template <typename T>
Array<T> conv2d_forward(const Array<T>& x, const Array<T>& w, const Array<T>& b,
                        std::size_t stride, std::size_t padding);

/// Any of the gradient outputs may be null. Non-null outputs are overwritten.
template <typename T>
void conv2d_backward(const Array<T>& x, const Array<T>& w, std::size_t stride,
                     std::size_t padding, const Array<T>& grad_out, Array<T>* grad_x,
                     Array<T>* grad_w, Array<T>* grad_b);

/// Edge-clamped bilinear gather. feature: (N,C,H,W); coords: (N,2,Ho,Wo)
/// holding absolute x (channel 0) and y (channel 1) sample positions.
template <typename T>
Array<T> bilinear_forward(const Array<T>& feature, const Array<T>& coords);

template <typename T>
void bilinear_backward(const Array<T>& feature, const Array<T>& coords,
                       const Array<T>& grad_out, Array<T>* grad_feature,
                       Array<T>* grad_coords);

/// Modulated deformable convolution.
///
/// offsets: (N, 2*G*kh*kw, Ho, Wo). Channel 2*(g*K + tap) is the x
/// displacement of kernel tap `tap` (row-major within the kernel) for
/// deformable group g, channel 2*(g*K + tap) + 1 the y displacement.
/// mask: (N, G*kh*kw, Ho, Wo), channel g*K + tap.
/// Tap (i, j) at output (ho, wo) samples input at
///   y = ho*stride - padding + i + dy,  x = wo*stride - padding + j + dx
/// with bilinear interpolation. Taps whose regular position (before the
/// offset) is inside the input sample with edge clamping; taps on the
/// padding ring treat neighbours outside the input as zero, so zero
/// offsets reproduce the zero padding of conv2d_forward.
template <typename T>
Array<T> deform_conv_forward(const Array<T>& x, const Array<T>& offsets,
                             const Array<T>& mask, const Array<T>& w, const Array<T>& b,
                             std::size_t stride, std::size_t padding, std::size_t groups);

template <typename T>
void deform_conv_backward(const Array<T>& x, const Array<T>& offsets, const Array<T>& mask,
                          const Array<T>& w, std::size_t stride, std::size_t padding,
                          std::size_t groups, const Array<T>& grad_out, Array<T>* grad_x,
                          Array<T>* grad_offsets, Array<T>* grad_mask, Array<T>* grad_w,
                          Array<T>* grad_b);

}  // namespace fga::nn::kernels
