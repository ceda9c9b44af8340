#include "fga/numerics/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace fga::nn::kernels {
namespace {

// Output positions processed per column block. Keeps the column buffer small
// at full HD while leaving the accumulation order independent of the block
// boundaries (each output element is accumulated in reduction-index order).
constexpr std::size_t kBlock = 2048;

struct ConvDims {
  std::size_t n, cin, h, w, cout, kh, kw, ho, wo;
  std::size_t taps() const { return kh * kw; }
  std::size_t rows() const { return cin * kh * kw; }
  std::size_t positions() const { return ho * wo; }
};

template <typename T>
ConvDims conv_dims(const Array<T>& x, const Array<T>& w, std::size_t stride, std::size_t padding,
                   const char* what) {
  require_rank4(x.shape(), what);
  require_rank4(w.shape(), what);
  if (stride == 0) throw ShapeError(fmt::format("{}: stride must be positive", what));
  ConvDims d{x.dim(0), x.dim(1), x.dim(2), x.dim(3), w.dim(0), w.dim(2), w.dim(3), 0, 0};
  if (w.dim(1) != d.cin) {
    throw ShapeError(fmt::format("{}: input has {} channels but weight {} expects {}", what, d.cin,
                                 shape_str(w.shape()), w.dim(1)));
  }
  if (d.h + 2 * padding < d.kh || d.w + 2 * padding < d.kw) {
    throw ShapeError(fmt::format("{}: kernel {}x{} larger than padded input {}x{}", what, d.kh,
                                 d.kw, d.h + 2 * padding, d.w + 2 * padding));
  }
  d.ho = conv_out_size(d.h, d.kh, stride, padding);
  d.wo = conv_out_size(d.w, d.kw, stride, padding);
  return d;
}

// out[m, p0 + q] = bias[m] + sum_r w[m, r] * col[r, q] for q < len.
template <typename T>
void gemm_block(const T* w, const T* bias, const T* col, std::size_t m_count, std::size_t r_count,
                std::size_t len, T* out, std::size_t out_stride) {
  for (std::size_t m = 0; m < m_count; ++m) {
    T* o = out + m * out_stride;
    const T b = bias ? bias[m] : T{0};
    for (std::size_t q = 0; q < len; ++q) o[q] = b;
    const T* wr = w + m * r_count;
    for (std::size_t r = 0; r < r_count; ++r) {
      const T wv = wr[r];
      const T* c = col + r * len;
      for (std::size_t q = 0; q < len; ++q) o[q] += wv * c[q];
    }
  }
}

// grad_col[r, q] = sum_m w[m, r] * gout[m, q]
template <typename T>
void gemm_transposed_block(const T* w, const T* gout, std::size_t gout_stride, std::size_t m_count,
                           std::size_t r_count, std::size_t len, T* grad_col) {
  std::fill(grad_col, grad_col + r_count * len, T{0});
  for (std::size_t m = 0; m < m_count; ++m) {
    const T* g = gout + m * gout_stride;
    const T* wr = w + m * r_count;
    for (std::size_t r = 0; r < r_count; ++r) {
      const T wv = wr[r];
      T* gc = grad_col + r * len;
      for (std::size_t q = 0; q < len; ++q) gc[q] += wv * g[q];
    }
  }
}

// grad_w[m, r] += sum_q gout[m, q] * col[r, q]; grad_b[m] += sum_q gout[m, q]
template <typename T>
void accumulate_weight_grad(const T* gout, std::size_t gout_stride, const T* col,
                            std::size_t m_count, std::size_t r_count, std::size_t len, T* grad_w,
                            T* grad_b) {
  for (std::size_t m = 0; m < m_count; ++m) {
    const T* g = gout + m * gout_stride;
    if (grad_b) {
      T acc{0};
      for (std::size_t q = 0; q < len; ++q) acc += g[q];
      grad_b[m] += acc;
    }
    if (grad_w) {
      for (std::size_t r = 0; r < r_count; ++r) {
        const T* c = col + r * len;
        T acc{0};
        for (std::size_t q = 0; q < len; ++q) acc += g[q] * c[q];
        grad_w[m * r_count + r] += acc;
      }
    }
  }
}

template <typename T>
void im2col_block(const T* img, const ConvDims& d, std::size_t stride, std::size_t padding,
                  std::size_t p0, std::size_t len, T* col) {
  const auto pad = static_cast<std::ptrdiff_t>(padding);
  for (std::size_t c = 0; c < d.cin; ++c) {
    const T* plane = img + c * d.h * d.w;
    for (std::size_t i = 0; i < d.kh; ++i) {
      for (std::size_t j = 0; j < d.kw; ++j) {
        T* row = col + ((c * d.kh + i) * d.kw + j) * len;
        for (std::size_t q = 0; q < len; ++q) {
          const std::size_t p = p0 + q;
          const auto y = static_cast<std::ptrdiff_t>((p / d.wo) * stride + i) - pad;
          const auto x = static_cast<std::ptrdiff_t>((p % d.wo) * stride + j) - pad;
          const bool inside = y >= 0 && x >= 0 && y < static_cast<std::ptrdiff_t>(d.h) &&
                              x < static_cast<std::ptrdiff_t>(d.w);
          row[q] = inside ? plane[y * static_cast<std::ptrdiff_t>(d.w) + x] : T{0};
        }
      }
    }
  }
}

template <typename T>
void col2im_block(const T* grad_col, const ConvDims& d, std::size_t stride, std::size_t padding,
                  std::size_t p0, std::size_t len, T* grad_img) {
  const auto pad = static_cast<std::ptrdiff_t>(padding);
  for (std::size_t c = 0; c < d.cin; ++c) {
    T* plane = grad_img + c * d.h * d.w;
    for (std::size_t i = 0; i < d.kh; ++i) {
      for (std::size_t j = 0; j < d.kw; ++j) {
        const T* row = grad_col + ((c * d.kh + i) * d.kw + j) * len;
        for (std::size_t q = 0; q < len; ++q) {
          const std::size_t p = p0 + q;
          const auto y = static_cast<std::ptrdiff_t>((p / d.wo) * stride + i) - pad;
          const auto x = static_cast<std::ptrdiff_t>((p % d.wo) * stride + j) - pad;
          if (y >= 0 && x >= 0 && y < static_cast<std::ptrdiff_t>(d.h) &&
              x < static_cast<std::ptrdiff_t>(d.w)) {
            plane[y * static_cast<std::ptrdiff_t>(d.w) + x] += row[q];
          }
        }
      }
    }
  }
}

// Bilinear corner lookup. `Clamp` selects edge clamping; otherwise samples
// outside the plane read as zero.
template <typename T, bool Clamp>
struct Corners {
  std::ptrdiff_t x0, y0;
  T lx, ly;
  T v00, v01, v10, v11;
  // Flat indices, -1 when the neighbour is outside (zero-fill mode only).
  std::ptrdiff_t i00, i01, i10, i11;

  Corners(const T* plane, std::ptrdiff_t h, std::ptrdiff_t w, T x, T y) {
    const T fx = std::floor(x);
    const T fy = std::floor(y);
    lx = x - fx;
    ly = y - fy;
    // Far outside: pin to a position whose neighbours are all out of range.
    const T lim = static_cast<T>(std::max(h, w) + 2);
    x0 = static_cast<std::ptrdiff_t>(std::clamp(fx, -lim, lim));
    y0 = static_cast<std::ptrdiff_t>(std::clamp(fy, -lim, lim));
    auto index = [&](std::ptrdiff_t yy, std::ptrdiff_t xx) -> std::ptrdiff_t {
      if constexpr (Clamp) {
        yy = std::clamp<std::ptrdiff_t>(yy, 0, h - 1);
        xx = std::clamp<std::ptrdiff_t>(xx, 0, w - 1);
        return yy * w + xx;
      } else {
        if (yy < 0 || xx < 0 || yy >= h || xx >= w) return -1;
        return yy * w + xx;
      }
    };
    i00 = index(y0, x0);
    i01 = index(y0, x0 + 1);
    i10 = index(y0 + 1, x0);
    i11 = index(y0 + 1, x0 + 1);
    v00 = i00 >= 0 ? plane[i00] : T{0};
    v01 = i01 >= 0 ? plane[i01] : T{0};
    v10 = i10 >= 0 ? plane[i10] : T{0};
    v11 = i11 >= 0 ? plane[i11] : T{0};
  }

  // Lerp form: exact at integer positions and on constant neighbourhoods.
  T value() const {
    const T top = v00 + lx * (v01 - v00);
    const T bottom = v10 + lx * (v11 - v10);
    return top + ly * (bottom - top);
  }
  T d_dx() const { return (T{1} - ly) * (v01 - v00) + ly * (v11 - v10); }
  T d_dy() const { return (T{1} - lx) * (v10 - v00) + lx * (v11 - v01); }

  void scatter(T* grad_plane, T g) const {
    if (i00 >= 0) grad_plane[i00] += g * (T{1} - lx) * (T{1} - ly);
    if (i01 >= 0) grad_plane[i01] += g * lx * (T{1} - ly);
    if (i10 >= 0) grad_plane[i10] += g * (T{1} - lx) * ly;
    if (i11 >= 0) grad_plane[i11] += g * lx * ly;
  }
};

// Taps whose regular grid position lies inside the input clamp like the
// bilinear sampler; taps on the padding ring zero-fill, as in conv2d.
template <typename T, typename F>
void tap_sample(const T* plane, std::ptrdiff_t h, std::ptrdiff_t w, T bx, T by, T x, T y, F&& f) {
  if (bx >= 0 && by >= 0 && bx <= static_cast<T>(w - 1) && by <= static_cast<T>(h - 1))
    f(Corners<T, true>(plane, h, w, x, y));
  else
    f(Corners<T, false>(plane, h, w, x, y));
}

struct DeformDims {
  ConvDims conv;
  std::size_t groups;
  std::size_t channels_per_group;
};

template <typename T>
DeformDims deform_dims(const Array<T>& x, const Array<T>& offsets, const Array<T>& mask,
                       const Array<T>& w, std::size_t stride, std::size_t padding,
                       std::size_t groups) {
  const char* what = "deformable_conv";
  ConvDims d = conv_dims(x, w, stride, padding, what);
  if (groups == 0 || d.cin % groups != 0) {
    throw ShapeError(
        fmt::format("{}: {} input channels not divisible by {} groups", what, d.cin, groups));
  }
  require_rank4(offsets.shape(), what);
  require_rank4(mask.shape(), what);
  const std::size_t k = d.taps();
  if (offsets.dim(1) != 2 * groups * k) {
    throw ShapeError(fmt::format("{}: offsets need 2*G*k*k = {} channels, got {}", what,
                                 2 * groups * k, offsets.dim(1)));
  }
  if (mask.dim(1) != groups * k) {
    throw ShapeError(fmt::format("{}: mask needs G*k*k = {} channels, got {}", what, groups * k,
                                 mask.dim(1)));
  }
  require_shape(offsets.shape(), {d.n, 2 * groups * k, d.ho, d.wo}, "deformable_conv offsets");
  require_shape(mask.shape(), {d.n, groups * k, d.ho, d.wo}, "deformable_conv mask");
  return {d, groups, d.cin / groups};
}

}  // namespace

std::size_t conv_out_size(std::size_t in, std::size_t kernel, std::size_t stride,
                          std::size_t padding) {
  return (in + 2 * padding - kernel) / stride + 1;
}

template <typename T>
Array<T> conv2d_forward(const Array<T>& x, const Array<T>& w, const Array<T>& b,
                        std::size_t stride, std::size_t padding) {
  const ConvDims d = conv_dims(x, w, stride, padding, "conv2d");
  require_shape(b.shape(), {d.cout}, "conv2d bias");
  Array<T> out({d.n, d.cout, d.ho, d.wo});
  const std::size_t positions = d.positions();
  std::vector<T> col(d.rows() * std::min(kBlock, positions));
  for (std::size_t n = 0; n < d.n; ++n) {
    const T* img = x.data() + n * d.cin * d.h * d.w;
    T* o = out.data() + n * d.cout * positions;
    for (std::size_t p0 = 0; p0 < positions; p0 += kBlock) {
      const std::size_t len = std::min(kBlock, positions - p0);
      im2col_block(img, d, stride, padding, p0, len, col.data());
      gemm_block(w.data(), b.data(), col.data(), d.cout, d.rows(), len, o + p0, positions);
    }
  }
  return out;
}

template <typename T>
void conv2d_backward(const Array<T>& x, const Array<T>& w, std::size_t stride, std::size_t padding,
                     const Array<T>& grad_out, Array<T>* grad_x, Array<T>* grad_w,
                     Array<T>* grad_b) {
  const ConvDims d = conv_dims(x, w, stride, padding, "conv2d backward");
  require_shape(grad_out.shape(), {d.n, d.cout, d.ho, d.wo}, "conv2d grad");
  if (grad_x) *grad_x = Array<T>(x.shape());
  if (grad_w) *grad_w = Array<T>(w.shape());
  if (grad_b) *grad_b = Array<T>({d.cout});
  const std::size_t positions = d.positions();
  const std::size_t block = std::min(kBlock, positions);
  std::vector<T> col(d.rows() * block);
  std::vector<T> gcol(grad_x ? d.rows() * block : 0);
  for (std::size_t n = 0; n < d.n; ++n) {
    const T* img = x.data() + n * d.cin * d.h * d.w;
    const T* g = grad_out.data() + n * d.cout * positions;
    for (std::size_t p0 = 0; p0 < positions; p0 += kBlock) {
      const std::size_t len = std::min(kBlock, positions - p0);
      if (grad_w || grad_b) {
        if (grad_w) im2col_block(img, d, stride, padding, p0, len, col.data());
        accumulate_weight_grad(g + p0, positions, col.data(), d.cout, d.rows(), len,
                               grad_w ? grad_w->data() : nullptr,
                               grad_b ? grad_b->data() : nullptr);
      }
      if (grad_x) {
        gemm_transposed_block(w.data(), g + p0, positions, d.cout, d.rows(), len, gcol.data());
        col2im_block(gcol.data(), d, stride, padding, p0, len,
                     grad_x->data() + n * d.cin * d.h * d.w);
      }
    }
  }
}

template <typename T>
Array<T> bilinear_forward(const Array<T>& feature, const Array<T>& coords) {
  require_rank4(feature.shape(), "bilinear_sample");
  require_rank4(coords.shape(), "bilinear_sample coords");
  if (coords.dim(1) != 2 || coords.dim(0) != feature.dim(0)) {
    throw ShapeError(fmt::format("bilinear_sample: coords must be ({},2,Ho,Wo), got {}",
                                 feature.dim(0), shape_str(coords.shape())));
  }
  const std::size_t n_count = feature.dim(0), c_count = feature.dim(1);
  const auto h = static_cast<std::ptrdiff_t>(feature.dim(2));
  const auto w = static_cast<std::ptrdiff_t>(feature.dim(3));
  const std::size_t ho = coords.dim(2), wo = coords.dim(3), positions = ho * wo;
  Array<T> out({n_count, c_count, ho, wo});
  for (std::size_t n = 0; n < n_count; ++n) {
    const T* cx = coords.data() + n * 2 * positions;
    const T* cy = cx + positions;
    for (std::size_t c = 0; c < c_count; ++c) {
      const T* plane = feature.data() + (n * c_count + c) * h * w;
      T* o = out.data() + (n * c_count + c) * positions;
      for (std::size_t p = 0; p < positions; ++p) {
        o[p] = Corners<T, true>(plane, h, w, cx[p], cy[p]).value();
      }
    }
  }
  return out;
}

template <typename T>
void bilinear_backward(const Array<T>& feature, const Array<T>& coords, const Array<T>& grad_out,
                       Array<T>* grad_feature, Array<T>* grad_coords) {
  const std::size_t n_count = feature.dim(0), c_count = feature.dim(1);
  const auto h = static_cast<std::ptrdiff_t>(feature.dim(2));
  const auto w = static_cast<std::ptrdiff_t>(feature.dim(3));
  const std::size_t positions = coords.dim(2) * coords.dim(3);
  require_shape(grad_out.shape(), {n_count, c_count, coords.dim(2), coords.dim(3)},
                "bilinear_sample grad");
  if (grad_feature) *grad_feature = Array<T>(feature.shape());
  if (grad_coords) *grad_coords = Array<T>(coords.shape());
  for (std::size_t n = 0; n < n_count; ++n) {
    const T* cx = coords.data() + n * 2 * positions;
    const T* cy = cx + positions;
    T* gx = grad_coords ? grad_coords->data() + n * 2 * positions : nullptr;
    T* gy = gx ? gx + positions : nullptr;
    for (std::size_t c = 0; c < c_count; ++c) {
      const T* plane = feature.data() + (n * c_count + c) * h * w;
      const T* g = grad_out.data() + (n * c_count + c) * positions;
      T* gf = grad_feature ? grad_feature->data() + (n * c_count + c) * h * w : nullptr;
      for (std::size_t p = 0; p < positions; ++p) {
        const Corners<T, true> s(plane, h, w, cx[p], cy[p]);
        if (gf) s.scatter(gf, g[p]);
        if (gx) {
          gx[p] += g[p] * s.d_dx();
          gy[p] += g[p] * s.d_dy();
        }
      }
    }
  }
}

namespace {

// Fills the modulated column block for deformable convolution. When
// `unmodulated` is non-null it also receives the raw bilinear samples.
template <typename T>
void deform_im2col_block(const T* img, const T* off, const T* msk, const DeformDims& dd,
                         std::size_t stride, std::size_t padding, std::size_t p0, std::size_t len,
                         T* col) {
  const ConvDims& d = dd.conv;
  const std::size_t positions = d.positions();
  const std::size_t k = d.taps();
  const auto h = static_cast<std::ptrdiff_t>(d.h);
  const auto w = static_cast<std::ptrdiff_t>(d.w);
  for (std::size_t c = 0; c < d.cin; ++c) {
    const std::size_t g = c / dd.channels_per_group;
    const T* plane = img + c * d.h * d.w;
    for (std::size_t i = 0; i < d.kh; ++i) {
      for (std::size_t j = 0; j < d.kw; ++j) {
        const std::size_t tap = i * d.kw + j;
        const T* ox = off + (2 * (g * k + tap)) * positions;
        const T* oy = ox + positions;
        const T* m = msk + (g * k + tap) * positions;
        T* row = col + (c * k + tap) * len;
        for (std::size_t q = 0; q < len; ++q) {
          const std::size_t p = p0 + q;
          const T by = static_cast<T>(static_cast<std::ptrdiff_t>((p / d.wo) * stride + i) -
                                      static_cast<std::ptrdiff_t>(padding));
          const T bx = static_cast<T>(static_cast<std::ptrdiff_t>((p % d.wo) * stride + j) -
                                      static_cast<std::ptrdiff_t>(padding));
          tap_sample(plane, h, w, bx, by, bx + ox[p], by + oy[p],
                     [&](const auto& s) { row[q] = m[p] * s.value(); });
        }
      }
    }
  }
}

}  // namespace

template <typename T>
Array<T> deform_conv_forward(const Array<T>& x, const Array<T>& offsets, const Array<T>& mask,
                             const Array<T>& w, const Array<T>& b, std::size_t stride,
                             std::size_t padding, std::size_t groups) {
  const DeformDims dd = deform_dims(x, offsets, mask, w, stride, padding, groups);
  const ConvDims& d = dd.conv;
  require_shape(b.shape(), {d.cout}, "deformable_conv bias");
  Array<T> out({d.n, d.cout, d.ho, d.wo});
  const std::size_t positions = d.positions();
  std::vector<T> col(d.rows() * std::min(kBlock, positions));
  for (std::size_t n = 0; n < d.n; ++n) {
    const T* img = x.data() + n * d.cin * d.h * d.w;
    const T* off = offsets.data() + n * offsets.dim(1) * positions;
    const T* msk = mask.data() + n * mask.dim(1) * positions;
    T* o = out.data() + n * d.cout * positions;
    for (std::size_t p0 = 0; p0 < positions; p0 += kBlock) {
      const std::size_t len = std::min(kBlock, positions - p0);
      deform_im2col_block(img, off, msk, dd, stride, padding, p0, len, col.data());
      gemm_block(w.data(), b.data(), col.data(), d.cout, d.rows(), len, o + p0, positions);
    }
  }
  return out;
}

template <typename T>
void deform_conv_backward(const Array<T>& x, const Array<T>& offsets, const Array<T>& mask,
                          const Array<T>& w, std::size_t stride, std::size_t padding,
                          std::size_t groups, const Array<T>& grad_out, Array<T>* grad_x,
                          Array<T>* grad_offsets, Array<T>* grad_mask, Array<T>* grad_w,
                          Array<T>* grad_b) {
  const DeformDims dd = deform_dims(x, offsets, mask, w, stride, padding, groups);
  const ConvDims& d = dd.conv;
  require_shape(grad_out.shape(), {d.n, d.cout, d.ho, d.wo}, "deformable_conv grad");
  if (grad_x) *grad_x = Array<T>(x.shape());
  if (grad_offsets) *grad_offsets = Array<T>(offsets.shape());
  if (grad_mask) *grad_mask = Array<T>(mask.shape());
  if (grad_w) *grad_w = Array<T>(w.shape());
  if (grad_b) *grad_b = Array<T>({d.cout});

  const std::size_t positions = d.positions();
  const std::size_t block = std::min(kBlock, positions);
  const std::size_t k = d.taps();
  const auto h = static_cast<std::ptrdiff_t>(d.h);
  const auto wd = static_cast<std::ptrdiff_t>(d.w);
  const bool need_col_grad = grad_x || grad_offsets || grad_mask;
  std::vector<T> col(d.rows() * block);
  std::vector<T> gcol(need_col_grad ? d.rows() * block : 0);

  for (std::size_t n = 0; n < d.n; ++n) {
    const T* img = x.data() + n * d.cin * d.h * d.w;
    const T* off = offsets.data() + n * offsets.dim(1) * positions;
    const T* msk = mask.data() + n * mask.dim(1) * positions;
    const T* g = grad_out.data() + n * d.cout * positions;
    for (std::size_t p0 = 0; p0 < positions; p0 += kBlock) {
      const std::size_t len = std::min(kBlock, positions - p0);
      if (grad_w || grad_b) {
        if (grad_w) deform_im2col_block(img, off, msk, dd, stride, padding, p0, len, col.data());
        accumulate_weight_grad(g + p0, positions, col.data(), d.cout, d.rows(), len,
                               grad_w ? grad_w->data() : nullptr,
                               grad_b ? grad_b->data() : nullptr);
      }
      if (!need_col_grad) continue;
      gemm_transposed_block(w.data(), g + p0, positions, d.cout, d.rows(), len, gcol.data());
      for (std::size_t c = 0; c < d.cin; ++c) {
        const std::size_t grp = c / dd.channels_per_group;
        const T* plane = img + c * d.h * d.w;
        T* gplane = grad_x ? grad_x->data() + (n * d.cin + c) * d.h * d.w : nullptr;
        for (std::size_t i = 0; i < d.kh; ++i) {
          for (std::size_t j = 0; j < d.kw; ++j) {
            const std::size_t tap = i * d.kw + j;
            const std::size_t oc = 2 * (grp * k + tap);
            const std::size_t mc = grp * k + tap;
            const T* ox = off + oc * positions;
            const T* oy = ox + positions;
            const T* m = msk + mc * positions;
            const T* gc = gcol.data() + (c * k + tap) * len;
            T* gox = grad_offsets
                         ? grad_offsets->data() + (n * offsets.dim(1) + oc) * positions
                         : nullptr;
            T* goy = gox ? gox + positions : nullptr;
            T* gm = grad_mask ? grad_mask->data() + (n * mask.dim(1) + mc) * positions : nullptr;
            for (std::size_t q = 0; q < len; ++q) {
              const std::size_t p = p0 + q;
              const T by = static_cast<T>(static_cast<std::ptrdiff_t>((p / d.wo) * stride + i) -
                                          static_cast<std::ptrdiff_t>(padding));
              const T bx = static_cast<T>(static_cast<std::ptrdiff_t>((p % d.wo) * stride + j) -
                                          static_cast<std::ptrdiff_t>(padding));
              tap_sample(plane, h, wd, bx, by, bx + ox[p], by + oy[p], [&](const auto& s) {
                if (gm) gm[p] += gc[q] * s.value();
                const T gv = gc[q] * m[p];
                if (gplane) s.scatter(gplane, gv);
                if (gox) {
                  gox[p] += gv * s.d_dx();
                  goy[p] += gv * s.d_dy();
                }
              });
            }
          }
        }
      }
    }
  }
}

#define FGA_INSTANTIATE(T)                                                                        \
  template Array<T> conv2d_forward(const Array<T>&, const Array<T>&, const Array<T>&,            \
                                   std::size_t, std::size_t);                                    \
  template void conv2d_backward(const Array<T>&, const Array<T>&, std::size_t, std::size_t,      \
                                const Array<T>&, Array<T>*, Array<T>*, Array<T>*);               \
  template Array<T> bilinear_forward(const Array<T>&, const Array<T>&);                          \
  template void bilinear_backward(const Array<T>&, const Array<T>&, const Array<T>&, Array<T>*,  \
                                  Array<T>*);                                                    \
  template Array<T> deform_conv_forward(const Array<T>&, const Array<T>&, const Array<T>&,       \
                                        const Array<T>&, const Array<T>&, std::size_t,           \
                                        std::size_t, std::size_t);                               \
  template void deform_conv_backward(const Array<T>&, const Array<T>&, const Array<T>&,          \
                                     const Array<T>&, std::size_t, std::size_t, std::size_t,     \
                                     const Array<T>&, Array<T>*, Array<T>*, Array<T>*,           \
                                     Array<T>*, Array<T>*);

FGA_INSTANTIATE(float)
FGA_INSTANTIATE(double)

}  // namespace fga::nn::kernels
