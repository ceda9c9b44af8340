#include <cmath>

#include <fmt/format.h>

#include "fga/flow/flow.hpp"
#include "fga/harness/cli.hpp"
#include "fga/harness/train.hpp"
#include "fga/imageio/color.hpp"
#include "fga/imageio/synth.hpp"
#include "fga/metrics/metrics.hpp"
#include "fga/mrqa/mrqa.hpp"
#include "fga/numerics/gradcheck.hpp"
#include "fga/numerics/ops.hpp"
#include "fga/sme/sme.hpp"

namespace fga::harness {

using nn::Array;
using nn::Tensor;

namespace {

CheckResult degeneration() {
  nn::Rng rng(3);
  bool ok = true;
  for (int i = 0; i < 10 && ok; ++i) {
    auto spec = nn::ConvSpec<double>::zeros(3, 4, 3);
    spec.weight.mutable_value() = nn::random_array<double>(spec.weight.shape(), rng);
    spec.bias.mutable_value() = nn::random_array<double>(spec.bias.shape(), rng);
    const auto x = Tensor<double>::constant(nn::random_array<double>({1, 3, 7, 6}, rng));
    const auto a = nn::deformable_conv(x, Tensor<double>::constant(Array<double>({1, 18, 7, 6})),
                                       Tensor<double>::constant(Array<double>({1, 9, 7, 6}, 1.0)), spec);
    ok = a.value() == nn::conv2d(x, spec).value();
  }
  return {"deformable conv degenerates to conv2d", ok, "10 instances"};
}

CheckResult gradients() {
  nn::Rng rng(4);
  auto spec = nn::ConvSpec<double>::zeros(2, 2, 3);
  spec.weight.mutable_value() = nn::random_array<double>(spec.weight.shape(), rng, -0.5, 0.5);
  Array<double> off = nn::random_array<double>({1, 18, 5, 5}, rng, -1.3, 1.3);
  for (auto& v : off.values())
    if (std::abs(v - std::round(v)) < 0.05) v += 0.1;
  const auto r = nn::finite_diff_check(
      [&](const std::vector<Tensor<double>>& in) {
        return nn::sum(nn::deformable_conv(in[0], in[1], nn::sigmoid(in[2]), spec));
      },
      {nn::random_array<double>({1, 2, 5, 5}, rng), off, nn::random_array<double>({1, 9, 5, 5}, rng)});
  return {"deformable conv gradients", r.passed(1e-4), fmt::format("max rel {:.2e}", r.max_rel_error())};
}

CheckResult mrqa_pattern() {
  const std::vector<double> trace(15, 33.0);
  const auto w = mrqa::schedule_rollout(trace, {});
  bool ok = w.size() == 14;
  for (std::size_t i = 0; ok && i < w.size(); ++i) ok = w[i] == mrqa::kBaseWeights[i % 7];
  return {"MRQA constant trace tiles the base pattern", ok, ""};
}

CheckResult bd_identity() {
  metrics::RDCurve c{"a", {{0.1, 30, "a"}, {0.2, 32, "a"}, {0.4, 34.5, "a"}, {0.8, 36, "a"}}};
  metrics::RDCurve half = c;
  for (auto& p : half.points) p.bpp /= 2;
  const double same = metrics::bd_rate(c, c), h = metrics::bd_rate(c, half);
  return {"BD-rate identity and half rate", same == 0.0 && std::abs(h + 50.0) < 1e-6,
          fmt::format("{} / {:.8f}", same, h)};
}

CheckResult bt709() {
  io::Frame black(2, 2, io::ColorSpace::kYuv420), white(2, 2, io::ColorSpace::kYuv420);
  for (int p = 0; p < 3; ++p) {
    std::fill(black.plane(p).data.begin(), black.plane(p).data.end(), p == 0 ? 16.f : 128.f);
    std::fill(white.plane(p).data.begin(), white.plane(p).data.end(), p == 0 ? 235.f : 128.f);
  }
  const io::Frame b = io::yuv420_to_rgb_bt709(black), w = io::yuv420_to_rgb_bt709(white);
  bool ok = true;
  for (int p = 0; p < 3; ++p)
    for (float v : b.plane(p).data) ok = ok && v == 0.f;
  for (int p = 0; p < 3; ++p)
    for (float v : w.plane(p).data) ok = ok && v == 255.f;
  return {"BT.709 black and white", ok, ""};
}

CheckResult warp_and_gate() {
  io::SynthParams sp;
  sp.kind = io::SynthKind::kStatic;
  sp.width = sp.height = 32;
  const auto seq = io::synth_sequence(sp);
  const flow::PyramidLucasKanade est;
  bool ok = flow::warp(seq.frames[0], flow::FlowField(32, 32)) == seq.frames[0];
  sme::ScaleSearchConfig cfg = sme::ScaleSearchConfig::hevc_b();
  ok = ok && !sme::gated_flow(seq.frames[0], seq.frames[0], cfg, est).search;
  cfg.tau = 0;
  ok = ok && sme::gated_flow(seq.frames[0], seq.frames[0], cfg, est).search.has_value();
  return {"zero-flow warp identity and SME gate", ok, ""};
}

CheckResult init_is_warp() {
  ToyModel m = ToyModel::init(tsmc::TsmcConfig::toy());
  nn::Rng rng(9);
  const auto img = Tensor<float>::constant(nn::random_array<float>({1, 3, 16, 16}, rng, 0, 1));
  const auto out = tsmc::tsmc_forward(img, flow::FlowField(16, 16, 1.3f, -0.6f), m.fgd);
  double worst = 0;
  for (const auto& l : out)
    for (std::size_t i = 0; i < l.refined.numel(); ++i)
      worst = std::max(worst, static_cast<double>(std::abs(l.refined.value()[i] - l.warped.value()[i])));
  return {"FGDwarp initialisation equals coarse warp", worst < 1e-5, fmt::format("max diff {:.2e}", worst)};
}

}  // namespace

std::vector<CheckResult> run_selftest() {
  return {degeneration(), gradients(), mrqa_pattern(), bd_identity(), bt709(), warp_and_gate(), init_is_warp()};
}

}  // namespace fga::harness
