#include "fga/numerics/ops.hpp"

#include <cmath>
#include <fmt/format.h>
#include <numeric>

#include "fga/numerics/kernels.hpp"

namespace fga::nn {

template <typename T>
ConvSpec<T> ConvSpec<T>::zeros(std::size_t in, std::size_t out, std::size_t kernel,
                               std::size_t stride, std::size_t padding) {
  ConvSpec spec;
  spec.in_channels = in;
  spec.out_channels = out;
  spec.kernel_h = kernel;
  spec.kernel_w = kernel;
  spec.stride = stride;
  spec.padding = padding;
  spec.weight = Tensor<T>::parameter(Array<T>({out, in, kernel, kernel}));
  spec.bias = Tensor<T>::parameter(Array<T>({out}));
  return spec;
}

template <typename T>
void ConvSpec<T>::validate() const {
  if (!weight.defined() || !bias.defined()) throw ShapeError("conv spec has no parameters");
  require_shape(weight.shape(), {out_channels, in_channels, kernel_h, kernel_w}, "conv weight");
  require_shape(bias.shape(), {out_channels}, "conv bias");
  if (stride == 0) throw ShapeError("conv stride must be positive");
}

template <typename T>
ResBlockSpec<T> ResBlockSpec<T>::zeros(std::size_t channels) {
  return {ConvSpec<T>::zeros(channels, channels, 3), ConvSpec<T>::zeros(channels, channels, 3),
          T(0.1)};
}

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const ConvSpec<T>& spec) {
  spec.validate();
  require_rank4(x.shape(), "conv2d");
  if (x.shape()[1] != spec.in_channels) {
    throw ShapeError(fmt::format("conv2d: input {} has {} channels, spec expects {}",
                                 shape_str(x.shape()), x.shape()[1], spec.in_channels));
  }
  const std::size_t stride = spec.stride, padding = spec.padding;
  auto out = kernels::conv2d_forward(x.value(), spec.weight.value(), spec.bias.value(), stride,
                                     padding);
  return Tensor<T>::from_op(
      std::move(out), {x, spec.weight, spec.bias},
      [x, w = spec.weight, b = spec.bias, stride, padding](const typename Tensor<T>::Node& self) {
        Array<T> gx, gw, gb;
        kernels::conv2d_backward(x.value(), w.value(), stride, padding, self.grad,
                                 x.requires_grad() ? &gx : nullptr,
                                 w.requires_grad() ? &gw : nullptr,
                                 b.requires_grad() ? &gb : nullptr);
        if (x.requires_grad()) x.node()->accumulate(gx);
        if (w.requires_grad()) w.node()->accumulate(gw);
        if (b.requires_grad()) b.node()->accumulate(gb);
      });
}

template <typename T>
Tensor<T> apply_resblock(const Tensor<T>& x, const ResBlockSpec<T>& block) {
  if (block.conv1.in_channels != block.conv2.out_channels ||
      block.conv1.out_channels != block.conv2.in_channels) {
    throw ShapeError(fmt::format("resblock: channel chain {}->{}->{}->{} does not close",
                                 block.conv1.in_channels, block.conv1.out_channels,
                                 block.conv2.in_channels, block.conv2.out_channels));
  }
  auto h = conv2d(leaky_relu(conv2d(x, block.conv1), block.slope), block.conv2);
  if (h.shape() != x.shape()) {
    throw ShapeError(fmt::format("resblock: output {} differs from input {}", shape_str(h.shape()),
                                 shape_str(x.shape())));
  }
  return add(x, h);
}

namespace {

template <typename T, typename Fwd, typename Deriv>
Tensor<T> unary(const Tensor<T>& x, Fwd fwd, Deriv deriv) {
  Array<T> out(x.shape());
  const auto in = x.value().values();
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = fwd(in[i]);
  return Tensor<T>::from_op(std::move(out), {x},
                            [x, deriv](const typename Tensor<T>::Node& self) {
                              Array<T> g(x.shape());
                              const auto in = x.value().values();
                              for (std::size_t i = 0; i < in.size(); ++i) {
                                g[i] = self.grad[i] * deriv(in[i], self.value[i]);
                              }
                              x.node()->accumulate(g);
                            });
}

template <typename T>
void require_same(const Tensor<T>& a, const Tensor<T>& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw ShapeError(fmt::format("{}: operand shapes differ: {} vs {}", what, shape_str(a.shape()),
                                 shape_str(b.shape())));
  }
}

}  // namespace

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x) {
  return unary(
      x, [](T v) { return T{1} / (T{1} + std::exp(-v)); },
      [](T, T y) { return y * (T{1} - y); });
}

template <typename T>
Tensor<T> leaky_relu(const Tensor<T>& x, T slope) {
  return unary(
      x, [slope](T v) { return v > T{0} ? v : slope * v; },
      [slope](T v, T) { return v > T{0} ? T{1} : slope; });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& x, T factor) {
  return unary(
      x, [factor](T v) { return factor * v; }, [factor](T, T) { return factor; });
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  require_same(a, b, "add");
  Array<T> out = a.value();
  out += b.value();
  return Tensor<T>::from_op(std::move(out), {a, b}, [a, b](const typename Tensor<T>::Node& self) {
    a.node()->accumulate(self.grad);
    b.node()->accumulate(self.grad);
  });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  require_same(a, b, "sub");
  Array<T> out(a.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = a.value()[i] - b.value()[i];
  return Tensor<T>::from_op(std::move(out), {a, b}, [a, b](const typename Tensor<T>::Node& self) {
    a.node()->accumulate(self.grad);
    if (b.requires_grad()) {
      Array<T> g(self.grad.shape());
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] = -self.grad[i];
      b.node()->accumulate(g);
    }
  });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  require_same(a, b, "mul");
  Array<T> out(a.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = a.value()[i] * b.value()[i];
  return Tensor<T>::from_op(std::move(out), {a, b}, [a, b](const typename Tensor<T>::Node& self) {
    if (a.requires_grad()) {
      Array<T> g(a.shape());
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] = self.grad[i] * b.value()[i];
      a.node()->accumulate(g);
    }
    if (b.requires_grad()) {
      Array<T> g(b.shape());
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] = self.grad[i] * a.value()[i];
      b.node()->accumulate(g);
    }
  });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& x) {
  T acc{0};
  for (T v : x.value().values()) acc += v;
  return Tensor<T>::from_op(Array<T>({1}, acc), {x}, [x](const typename Tensor<T>::Node& self) {
    x.node()->accumulate(Array<T>(x.shape(), self.grad[0]));
  });
}

template <typename T>
Tensor<T> mean(const Tensor<T>& x) {
  return scale(sum(x), T{1} / static_cast<T>(x.numel()));
}

template <typename T>
Tensor<T> mse(const Tensor<T>& a, const Tensor<T>& b) {
  require_same(a, b, "mse");
  const std::size_t count = a.numel();
  T acc{0};
  for (std::size_t i = 0; i < count; ++i) {
    const T d = a.value()[i] - b.value()[i];
    acc += d * d;
  }
  return Tensor<T>::from_op(
      Array<T>({1}, acc / static_cast<T>(count)), {a, b},
      [a, b, count](const typename Tensor<T>::Node& self) {
        Array<T> g(a.shape());
        const T k = T{2} * self.grad[0] / static_cast<T>(count);
        for (std::size_t i = 0; i < count; ++i) g[i] = k * (a.value()[i] - b.value()[i]);
        a.node()->accumulate(g);
        if (b.requires_grad()) {
          for (auto& v : g.values()) v = -v;
          b.node()->accumulate(g);
        }
      });
}

template <typename T>
Tensor<T> mean_abs(const Tensor<T>& x) {
  const std::size_t count = x.numel();
  T acc{0};
  for (T v : x.value().values()) acc += std::abs(v);
  return Tensor<T>::from_op(Array<T>({1}, acc / static_cast<T>(count)), {x},
                            [x, count](const typename Tensor<T>::Node& self) {
                              Array<T> g(x.shape());
                              const T k = self.grad[0] / static_cast<T>(count);
                              for (std::size_t i = 0; i < count; ++i) {
                                const T v = x.value()[i];
                                g[i] = v > T{0} ? k : (v < T{0} ? -k : T{0});
                              }
                              x.node()->accumulate(g);
                            });
}

template <typename T>
Tensor<T> concat_channels(const std::vector<Tensor<T>>& parts) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  require_rank4(parts[0].shape(), "concat");
  const std::size_t n = parts[0].shape()[0], h = parts[0].shape()[2], w = parts[0].shape()[3];
  std::size_t channels = 0;
  for (const auto& p : parts) {
    require_rank4(p.shape(), "concat");
    if (p.shape()[0] != n || p.shape()[2] != h || p.shape()[3] != w) {
      throw ShapeError(fmt::format("concat: non-channel extents differ: {} vs {}",
                                   shape_str(parts[0].shape()), shape_str(p.shape())));
    }
    channels += p.shape()[1];
  }
  const std::size_t plane = h * w;
  Array<T> out({n, channels, h, w});
  for (std::size_t b = 0; b < n; ++b) {
    std::size_t c0 = 0;
    for (const auto& p : parts) {
      const std::size_t c = p.shape()[1];
      std::copy_n(p.value().data() + b * c * plane, c * plane,
                  out.data() + (b * channels + c0) * plane);
      c0 += c;
    }
  }
  return Tensor<T>::from_op(std::move(out), parts,
                            [parts, n, channels, plane](const typename Tensor<T>::Node& self) {
                              std::size_t c0 = 0;
                              for (const auto& p : parts) {
                                const std::size_t c = p.shape()[1];
                                if (p.requires_grad()) {
                                  Array<T> g(p.shape());
                                  for (std::size_t b = 0; b < n; ++b) {
                                    std::copy_n(self.grad.data() + (b * channels + c0) * plane,
                                                c * plane, g.data() + b * c * plane);
                                  }
                                  p.node()->accumulate(g);
                                }
                                c0 += c;
                              }
                            });
}

template <typename T>
std::vector<Tensor<T>> split_channels(const Tensor<T>& x, const std::vector<std::size_t>& sizes) {
  require_rank4(x.shape(), "split");
  const std::size_t n = x.shape()[0], channels = x.shape()[1], h = x.shape()[2],
                    w = x.shape()[3], plane = h * w;
  const std::size_t total = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
  if (total != channels) {
    throw ShapeError(fmt::format("split: sizes sum to {} but input has {} channels", total,
                                 channels));
  }
  std::vector<Tensor<T>> outs;
  std::size_t c0 = 0;
  for (std::size_t c : sizes) {
    if (c == 0) throw ShapeError("split: zero-sized part");
    Array<T> part({n, c, h, w});
    for (std::size_t b = 0; b < n; ++b) {
      std::copy_n(x.value().data() + (b * channels + c0) * plane, c * plane,
                  part.data() + b * c * plane);
    }
    outs.push_back(Tensor<T>::from_op(
        std::move(part), {x}, [x, c0, c, n, channels, plane](const typename Tensor<T>::Node& self) {
          Array<T> g(x.shape());
          for (std::size_t b = 0; b < n; ++b) {
            std::copy_n(self.grad.data() + b * c * plane, c * plane,
                        g.data() + (b * channels + c0) * plane);
          }
          x.node()->accumulate(g);
        }));
    c0 += c;
  }
  return outs;
}

template <typename T>
Tensor<T> bilinear_sample(const Tensor<T>& feature, const Tensor<T>& coords) {
  auto out = kernels::bilinear_forward(feature.value(), coords.value());
  return Tensor<T>::from_op(std::move(out), {feature, coords},
                            [feature, coords](const typename Tensor<T>::Node& self) {
                              Array<T> gf, gc;
                              kernels::bilinear_backward(
                                  feature.value(), coords.value(), self.grad,
                                  feature.requires_grad() ? &gf : nullptr,
                                  coords.requires_grad() ? &gc : nullptr);
                              if (feature.requires_grad()) feature.node()->accumulate(gf);
                              if (coords.requires_grad()) coords.node()->accumulate(gc);
                            });
}

template <typename T>
Array<T> identity_grid(std::size_t n, std::size_t h, std::size_t w) {
  Array<T> grid({n, 2, h, w});
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        grid.at(b, 0, y, x) = static_cast<T>(x);
        grid.at(b, 1, y, x) = static_cast<T>(y);
      }
    }
  }
  return grid;
}

template <typename T>
Tensor<T> warp(const Tensor<T>& feature, const Tensor<T>& flow) {
  require_rank4(feature.shape(), "warp");
  require_rank4(flow.shape(), "warp flow");
  const auto& fs = feature.shape();
  if (flow.shape() != Shape{fs[0], 2, fs[2], fs[3]}) {
    throw ShapeError(fmt::format("warp: flow {} does not match feature {}",
                                 shape_str(flow.shape()), shape_str(fs)));
  }
  auto grid = Tensor<T>::constant(identity_grid<T>(fs[0], fs[2], fs[3]));
  return bilinear_sample(feature, add(grid, flow));
}

template <typename T>
Tensor<T> deformable_conv(const Tensor<T>& x, const Tensor<T>& offsets, const Tensor<T>& mask,
                          const ConvSpec<T>& spec, std::size_t groups) {
  spec.validate();
  const std::size_t stride = spec.stride, padding = spec.padding;
  auto out = kernels::deform_conv_forward(x.value(), offsets.value(), mask.value(),
                                          spec.weight.value(), spec.bias.value(), stride, padding,
                                          groups);
  return Tensor<T>::from_op(
      std::move(out), {x, offsets, mask, spec.weight, spec.bias},
      [x, offsets, mask, w = spec.weight, b = spec.bias, stride, padding,
       groups](const typename Tensor<T>::Node& self) {
        Array<T> gx, go, gm, gw, gb;
        kernels::deform_conv_backward(
            x.value(), offsets.value(), mask.value(), w.value(), stride, padding, groups,
            self.grad, x.requires_grad() ? &gx : nullptr, offsets.requires_grad() ? &go : nullptr,
            mask.requires_grad() ? &gm : nullptr, w.requires_grad() ? &gw : nullptr,
            b.requires_grad() ? &gb : nullptr);
        if (x.requires_grad()) x.node()->accumulate(gx);
        if (offsets.requires_grad()) offsets.node()->accumulate(go);
        if (mask.requires_grad()) mask.node()->accumulate(gm);
        if (w.requires_grad()) w.node()->accumulate(gw);
        if (b.requires_grad()) b.node()->accumulate(gb);
      });
}

std::uint64_t Rng::next_u64() {
  // splitmix64
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

template <typename T>
Array<T> random_array(const Shape& shape, Rng& rng, double lo, double hi) {
  Array<T> a(shape);
  for (auto& v : a.values()) v = static_cast<T>(rng.uniform(lo, hi));
  return a;
}

#define FGA_INSTANTIATE(T)                                                                     \
  template struct ConvSpec<T>;                                                                 \
  template struct ResBlockSpec<T>;                                                             \
  template Tensor<T> conv2d(const Tensor<T>&, const ConvSpec<T>&);                             \
  template Tensor<T> apply_resblock(const Tensor<T>&, const ResBlockSpec<T>&);                 \
  template Tensor<T> sigmoid(const Tensor<T>&);                                                \
  template Tensor<T> leaky_relu(const Tensor<T>&, T);                                          \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                                  \
  template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                                  \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                                  \
  template Tensor<T> scale(const Tensor<T>&, T);                                               \
  template Tensor<T> sum(const Tensor<T>&);                                                    \
  template Tensor<T> mean(const Tensor<T>&);                                                   \
  template Tensor<T> mse(const Tensor<T>&, const Tensor<T>&);                                  \
  template Tensor<T> mean_abs(const Tensor<T>&);                                               \
  template Tensor<T> concat_channels(const std::vector<Tensor<T>>&);                           \
  template std::vector<Tensor<T>> split_channels(const Tensor<T>&,                             \
                                                 const std::vector<std::size_t>&);             \
  template Tensor<T> bilinear_sample(const Tensor<T>&, const Tensor<T>&);                      \
  template Array<T> identity_grid(std::size_t, std::size_t, std::size_t);                      \
  template Tensor<T> warp(const Tensor<T>&, const Tensor<T>&);                                 \
  template Tensor<T> deformable_conv(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,     \
                                     const ConvSpec<T>&, std::size_t);                         \
  template Array<T> random_array(const Shape&, Rng&, double, double);

FGA_INSTANTIATE(float)
FGA_INSTANTIATE(double)

}  // namespace fga::nn
