#include "fga/tsmc/tsmc.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>

#include "fga/imageio/frame.hpp"

namespace fga::tsmc {

using nn::Array;
using nn::ConvSpec;
using nn::ResBlockSpec;
using nn::Shape;

TsmcConfig TsmcConfig::toy() {
  TsmcConfig c;
  c.channels = {8, 8, 8};
  return c;
}

namespace {

// uniform in +-gain*sqrt(6/fan_in)
template <typename T>
ConvSpec<T> random_conv(std::size_t in, std::size_t out, std::size_t k, std::size_t stride, double gain,
                        nn::Rng& rng) {
  ConvSpec<T> c = ConvSpec<T>::zeros(in, out, k, stride, k / 2);
  const double a = gain * std::sqrt(6.0 / static_cast<double>(in * k * k));
  for (auto& v : c.weight.mutable_value().values()) v = static_cast<T>(rng.uniform(-a, a));
  return c;
}

template <typename T>
ResBlockSpec<T> random_block(std::size_t ch, double gain1, double gain2, nn::Rng& rng) {
  ResBlockSpec<T> b;
  b.conv1 = random_conv<T>(ch, ch, 3, 1, gain1, rng);
  b.conv2 = gain2 > 0 ? random_conv<T>(ch, ch, 3, 1, gain2, rng) : ConvSpec<T>::zeros(ch, ch, 3);
  return b;
}

void push(auto& out, const std::string& prefix, auto& conv) {
  out.emplace_back(prefix + ".weight", &conv.weight);
  out.emplace_back(prefix + ".bias", &conv.bias);
}

void push_block(auto& out, const std::string& prefix, auto& block) {
  push(out, prefix + ".conv1", block.conv1);
  push(out, prefix + ".conv2", block.conv2);
}

template <typename Params, typename Out>
void collect(Params& p, Out& out) {
  push(out, "pyramid.stem", p.stem);
  push(out, "pyramid.down2", p.down[0]);
  push(out, "pyramid.down3", p.down[1]);
  for (int s = 0; s < 3; ++s) push_block(out, fmt::format("pyramid.block{}", s + 1), p.pyramid_blocks[s]);
  for (int s = 0; s < 3; ++s) {
    const std::string l = fmt::format("level{}", s + 1);
    auto& lp = p.levels[s];
    push_block(out, l + ".hidden_block", lp.hidden_block);
    push(out, l + ".hidden_conv", lp.hidden_conv);
    push(out, l + ".fine_conv", lp.fine_conv);
    push(out, l + ".dcn", lp.dcn);
    push_block(out, l + ".refine1", lp.refine[0]);
    push_block(out, l + ".refine2", lp.refine[1]);
  }
}

void require_level(int level) {
  if (level < 1 || level > 3) throw std::invalid_argument(fmt::format("pyramid level {} is not 1..3", level));
}

}  // namespace

template <typename T>
FgdParams<T> FgdParams<T>::init(const TsmcConfig& cfg) {
  if (cfg.kernel % 2 == 0 || cfg.groups == 0) throw std::invalid_argument("odd kernel and >= 1 group required");
  for (std::size_t c : cfg.channels)
    if (c == 0 || c % cfg.groups) throw std::invalid_argument("channels must be positive multiples of groups");
  nn::Rng rng(cfg.seed);
  FgdParams p;
  p.config = cfg;
  const auto& ch = cfg.channels;
  p.stem = random_conv<T>(3, ch[0], 3, 1, 1.0, rng);
  p.down[0] = random_conv<T>(ch[0], ch[1], 3, 2, 1.0, rng);
  p.down[1] = random_conv<T>(ch[1], ch[2], 3, 2, 1.0, rng);
  for (int s = 0; s < 3; ++s) p.pyramid_blocks[s] = random_block<T>(ch[s], 1.0, 0.3, rng);

  const std::size_t k = cfg.kernel, taps = cfg.taps(), centre = taps / 2;
  for (int s = 0; s < 3; ++s) {
    auto& lp = p.levels[s];
    lp.hidden_block = random_block<T>(2 * ch[s], 1.0, 0.3, rng);
    lp.hidden_conv = ConvSpec<T>::zeros(2 * ch[s], cfg.offset_channels() + cfg.mask_channels(), 3);
    lp.fine_conv = ConvSpec<T>::zeros(2, cfg.offset_channels(), 3);
    auto& fw = lp.fine_conv.weight.mutable_value();
    for (std::size_t g = 0; g < cfg.groups; ++g)
      for (std::size_t t = 0; t < taps; ++t) {
        fw.at(2 * (g * taps + t), 0, 1, 1) = T(1);
        fw.at(2 * (g * taps + t) + 1, 1, 1, 1) = T(1);
      }
    lp.dcn = ConvSpec<T>::zeros(ch[s], ch[s], k, 1, k / 2);
    auto& dw = lp.dcn.weight.mutable_value();
    for (std::size_t c = 0; c < ch[s]; ++c) dw.at(c, c, centre / k, centre % k) = static_cast<T>(cfg.dcn_centre);
    lp.refine[0] = random_block<T>(ch[s], 1.0, 0.0, rng);
    lp.refine[1] = random_block<T>(ch[s], 1.0, 0.0, rng);
  }
  return p;
}

template <typename T>
std::vector<std::pair<std::string, Tensor<T>*>> FgdParams<T>::named() {
  std::vector<std::pair<std::string, Tensor<T>*>> out;
  collect(*this, out);
  return out;
}

template <typename T>
std::vector<std::pair<std::string, const Tensor<T>*>> FgdParams<T>::named() const {
  std::vector<std::pair<std::string, const Tensor<T>*>> out;
  collect(*this, out);
  return out;
}

template <typename T>
FgdParams<T> FgdParams<T>::clone() const {
  FgdParams copy = *this;
  for (auto& [name, t] : copy.named()) *t = Tensor<T>::parameter(t->value());
  return copy;
}

template <typename T>
template <typename U>
FgdParams<U> FgdParams<T>::cast() const {
  FgdParams<U> out = FgdParams<U>::init(config);
  auto dst = out.named();
  auto src = named();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const auto& v = src[i].second->value();
    std::vector<U> vals(v.values().begin(), v.values().end());
    *dst[i].second = Tensor<U>::parameter(Array<U>(v.shape(), std::move(vals)));
  }
  return out;
}

template <typename T>
Tensor<T> frame_to_tensor(const io::Frame& rgb) {
  if (rgb.color_space() != io::ColorSpace::kRgb) throw std::invalid_argument("frame_to_tensor expects RGB");
  const std::size_t h = rgb.height(), w = rgb.width();
  Array<T> a({1, 3, h, w});
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < h * w; ++i) a[c * h * w + i] = static_cast<T>(rgb.plane(c).data[i]) / T(255);
  return Tensor<T>::constant(std::move(a));
}

template <typename T>
Tensor<T> flow_to_tensor(const flow::FlowField& f) {
  const std::size_t n = static_cast<std::size_t>(f.width) * f.height;
  Array<T> a({1, 2, static_cast<std::size_t>(f.height), static_cast<std::size_t>(f.width)});
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = static_cast<T>(f.vx[i]);
    a[n + i] = static_cast<T>(f.vy[i]);
  }
  return Tensor<T>::constant(std::move(a));
}

io::Frame tensor_to_frame(const Tensor<float>& t) {
  const auto& s = t.shape();
  if (s.size() != 4 || s[0] != 1 || s[1] != 3) throw std::invalid_argument("tensor_to_frame expects (1,3,H,W)");
  io::Frame f(static_cast<int>(s[3]), static_cast<int>(s[2]), io::ColorSpace::kRgb);
  const std::size_t n = s[2] * s[3];
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < n; ++i)
      f.plane(c).data[i] = std::clamp(std::round(t.value()[c * n + i] * 255.0f), 0.0f, 255.0f);
  return f;
}

template <typename T>
Pyramid<T> build_feature_pyramid(const Tensor<T>& image, const FgdParams<T>& p) {
  const auto& s = image.shape();
  if (s.size() != 4 || s[2] % 4 || s[3] % 4)
    throw std::invalid_argument(
        fmt::format("pyramid input {} must be rank 4 with H and W divisible by 4", nn::shape_str(s)));
  Pyramid<T> f;
  f[0] = nn::apply_resblock(nn::conv2d(image, p.stem), p.pyramid_blocks[0]);
  f[1] = nn::apply_resblock(nn::conv2d(f[0], p.down[0]), p.pyramid_blocks[1]);
  f[2] = nn::apply_resblock(nn::conv2d(f[1], p.down[1]), p.pyramid_blocks[2]);
  return f;
}

template <typename T>
OffsetMask<T> predict_offsets_masks(const Tensor<T>& feature, const Tensor<T>& flow, const FgdParams<T>& p,
                                    int level) {
  require_level(level);
  const auto& fs = feature.shape();
  const auto& vs = flow.shape();
  if (vs.size() != 4 || fs.size() != 4 || vs[1] != 2 || vs[2] != fs[2] || vs[3] != fs[3])
    throw std::invalid_argument(fmt::format("level-{} flow {} does not match feature {}", level, nn::shape_str(vs),
                                            nn::shape_str(fs)));
  const auto& lp = p.levels[level - 1];
  const Tensor<T> warped = nn::warp(feature, flow);
  const Tensor<T> hidden =
      nn::conv2d(nn::apply_resblock(nn::concat_channels<T>({warped, feature}), lp.hidden_block), lp.hidden_conv);
  auto parts = nn::split_channels(hidden, {p.config.offset_channels(), p.config.mask_channels()});
  OffsetMask<T> om;
  om.level = level;
  om.coarse_offsets = parts[0];
  om.mask = nn::sigmoid(parts[1]);
  om.offsets = nn::add(parts[0], nn::conv2d(flow, lp.fine_conv));
  return om;
}

template <typename T>
Tensor<T> deformable_align(const Tensor<T>& feature, const OffsetMask<T>& om, const FgdParams<T>& p, int level) {
  require_level(level);
  if (om.level != level) throw std::invalid_argument(fmt::format("offsets are for level {}, not {}", om.level, level));
  return nn::deformable_conv(feature, om.offsets, om.mask, p.levels[level - 1].dcn, p.config.groups);
}

template <typename T>
Pyramid<T> refine_contexts(const Pyramid<T>& c, const FgdParams<T>& p) {
  Pyramid<T> out;
  for (int s = 0; s < 3; ++s)
    out[s] = nn::apply_resblock(nn::apply_resblock(c[s], p.levels[s].refine[0]), p.levels[s].refine[1]);
  return out;
}

template <typename T>
std::array<LevelOutput<T>, 3> tsmc_forward(const Tensor<T>& ref_image, const flow::FlowField& flow,
                                           const FgdParams<T>& p) {
  const auto& s = ref_image.shape();
  if (s.size() != 4 || static_cast<int>(s[2]) != flow.height || static_cast<int>(s[3]) != flow.width)
    throw std::invalid_argument(fmt::format("flow {}x{} does not match image {}", flow.width, flow.height,
                                            nn::shape_str(s)));
  const Pyramid<T> feats = build_feature_pyramid(ref_image, p);
  std::array<LevelOutput<T>, 3> out;
  Pyramid<T> aligned;
  for (int l = 0; l < 3; ++l) {
    LevelOutput<T>& o = out[l];
    o.feature = feats[l];
    o.flow = flow_to_tensor<T>(flow::rescale_flow(flow, std::ldexp(1.0, -l)));
    o.warped = nn::warp(o.feature, o.flow);
    o.om = predict_offsets_masks(o.feature, o.flow, p, l + 1);
    o.aligned = deformable_align(o.feature, o.om, p, l + 1);
    aligned[l] = o.aligned;
  }
  const Pyramid<T> refined = refine_contexts(aligned, p);
  for (int l = 0; l < 3; ++l) out[l].refined = refined[l];
  return out;
}

namespace {

constexpr char kMagic[8] = {'F', 'G', 'A', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint32_t kVersion = 1;

template <typename V>
void put(std::ostream& o, V v) {
  o.write(reinterpret_cast<const char*>(&v), sizeof v);
}
template <typename V>
V get(std::istream& in, const std::string& path) {
  V v;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw io::DataError(fmt::format("{}: truncated checkpoint", path));
  return v;
}

}  // namespace

template <typename T>
void save_checkpoint(const std::string& path, const FgdParams<T>& p) {
  static_assert(std::endian::native == std::endian::little, "checkpoints assume a little-endian host");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io::DataError(fmt::format("cannot open {} for writing", path));
  const auto tensors = p.named();
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put<std::uint8_t>(out, sizeof(T));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t->shape().size()));
    for (std::size_t d : t->shape()) put<std::uint64_t>(out, d);
    out.write(reinterpret_cast<const char*>(t->value().data()), static_cast<std::streamsize>(t->numel() * sizeof(T)));
  }
  if (!out) throw io::DataError(fmt::format("write to {} failed", path));
}

template <typename T>
void load_checkpoint(const std::string& path, FgdParams<T>& p) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io::DataError(fmt::format("cannot open {}", path));
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0) throw io::DataError(fmt::format("{}: not a checkpoint", path));
  const auto version = get<std::uint32_t>(in, path);
  if (version != kVersion) throw io::DataError(fmt::format("{}: unsupported checkpoint version {}", path, version));
  const auto count = get<std::uint32_t>(in, path);
  std::map<std::string, Array<T>> loaded;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name(get<std::uint32_t>(in, path), '\0');
    in.read(name.data(), static_cast<std::streamsize>(name.size()));
    const auto elem = get<std::uint8_t>(in, path);
    Shape shape(get<std::uint32_t>(in, path));
    for (auto& d : shape) d = get<std::uint64_t>(in, path);
    Array<T> a(shape);
    for (auto& v : a.values()) {
      if (elem == 4) v = static_cast<T>(get<float>(in, path));
      else if (elem == 8) v = static_cast<T>(get<double>(in, path));
      else throw io::DataError(fmt::format("{}: tensor '{}' has element size {}", path, name, elem));
    }
    loaded.emplace(std::move(name), std::move(a));
  }
  for (auto& [name, t] : p.named()) {
    auto it = loaded.find(name);
    if (it == loaded.end()) throw io::DataError(fmt::format("{}: missing tensor '{}'", path, name));
    if (it->second.shape() != t->shape())
      throw io::DataError(fmt::format("{}: tensor '{}' is {}, expected {}", path, name, nn::shape_str(it->second.shape()),
                                      nn::shape_str(t->shape())));
    *t = Tensor<T>::parameter(std::move(it->second));
  }
}

#define FGA_INSTANTIATE(T)                                                                                   \
  template struct FgdParams<T>;                                                                              \
  template Tensor<T> frame_to_tensor<T>(const io::Frame&);                                                   \
  template Tensor<T> flow_to_tensor<T>(const flow::FlowField&);                                              \
  template Pyramid<T> build_feature_pyramid(const Tensor<T>&, const FgdParams<T>&);                          \
  template OffsetMask<T> predict_offsets_masks(const Tensor<T>&, const Tensor<T>&, const FgdParams<T>&, int); \
  template Tensor<T> deformable_align(const Tensor<T>&, const OffsetMask<T>&, const FgdParams<T>&, int);     \
  template Pyramid<T> refine_contexts(const Pyramid<T>&, const FgdParams<T>&);                               \
  template std::array<LevelOutput<T>, 3> tsmc_forward(const Tensor<T>&, const flow::FlowField&,              \
                                                      const FgdParams<T>&);                                  \
  template void save_checkpoint(const std::string&, const FgdParams<T>&);                                    \
  template void load_checkpoint(const std::string&, FgdParams<T>&);

FGA_INSTANTIATE(float)
FGA_INSTANTIATE(double)
template FgdParams<double> FgdParams<float>::cast<double>() const;
template FgdParams<float> FgdParams<double>::cast<float>() const;

}  // namespace fga::tsmc
