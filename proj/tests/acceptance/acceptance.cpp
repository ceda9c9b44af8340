// One PASS/FAIL line per acceptance criterion. Exit status is non-zero when
// any criterion fails.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <set>

#include <fmt/format.h>

#include "fga/flow/flow.hpp"
#include "fga/harness/evaluate.hpp"
#include "fga/harness/train.hpp"
#include "fga/imageio/color.hpp"
#include "fga/imageio/synth.hpp"
#include "fga/metrics/metrics.hpp"
#include "fga/mrqa/mrqa.hpp"
#include "fga/numerics/gradcheck.hpp"
#include "fga/numerics/ops.hpp"
#include "fga/sme/sme.hpp"
#include "fga/tsmc/tsmc.hpp"
#include "support/bd_reference.hpp"
#include "support/grad_helpers.hpp"

using namespace fga;
using nn::Array;
using nn::Rng;
using nn::Tensor;
using fga::testing::jitter_off_lattice;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// -- gradients ---------------------------------------------------------------

nn::ConvSpec<double> random_conv(std::size_t in, std::size_t out, std::size_t k, std::size_t stride, Rng& rng) {
  auto c = nn::ConvSpec<double>::zeros(in, out, k, stride, k / 2);
  c.weight.mutable_value() = nn::random_array<double>(c.weight.shape(), rng, -0.5, 0.5);
  c.bias.mutable_value() = nn::random_array<double>(c.bias.shape(), rng, -0.5, 0.5);
  return c;
}

// Projects the output on fixed random weights so every element matters.
Tensor<double> project(const Tensor<double>& y, std::uint64_t seed) {
  Rng r(seed);
  return nn::sum(nn::mul(y, Tensor<double>::constant(nn::random_array<double>(y.shape(), r))));
}

Outcome gradient_suite() {
  const auto t0 = Clock::now();
  double worst = 0;
  std::string worst_op;
  int checks = 0;
  auto record = [&](const std::string& op, const nn::GradCheckReport& r) {
    ++checks;
    const double e = r.nonfinite() ? INFINITY : r.max_rel_error();
    if (!(e <= worst)) {
      worst = e;
      worst_op = op;
    }
  };
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    Rng rng(100 + seed);
    for (std::size_t stride : {1, 2}) {
      auto c = random_conv(4, 3, 3, stride, rng);
      record("conv2d", nn::finite_diff_check(
                           [&](const std::vector<Tensor<double>>& in) {
                             auto s = c;
                             s.weight = in[1];
                             s.bias = in[2];
                             return project(nn::conv2d(in[0], s), seed);
                           },
                           {nn::random_array<double>({1, 4, 8, 8}, rng), c.weight.value(), c.bias.value()}));
    }
    nn::ResBlockSpec<double> b;
    b.conv1 = random_conv(4, 4, 3, 1, rng);
    b.conv2 = random_conv(4, 4, 3, 1, rng);
    record("resblock", nn::finite_diff_check(
                           [&](const std::vector<Tensor<double>>& in) {
                             auto s = b;
                             s.conv1.weight = in[1];
                             s.conv1.bias = in[2];
                             s.conv2.weight = in[3];
                             s.conv2.bias = in[4];
                             return project(nn::apply_resblock(in[0], s), seed);
                           },
                           {nn::random_array<double>({1, 4, 8, 8}, rng), b.conv1.weight.value(),
                            b.conv1.bias.value(), b.conv2.weight.value(), b.conv2.bias.value()}));
    record("bilinear_sample",
           nn::finite_diff_check([&](const std::vector<Tensor<double>>& in) {
                                   return project(nn::bilinear_sample(in[0], in[1]), seed);
                                 },
                                 {nn::random_array<double>({1, 3, 8, 8}, rng),
                                  jitter_off_lattice(nn::random_array<double>({1, 2, 8, 8}, rng, -1.5, 8.5), 0.05,
                                                     rng)}));
    auto dc = random_conv(4, 4, 3, 1, rng);
    record("deformable_conv",
           nn::finite_diff_check(
               [&](const std::vector<Tensor<double>>& in) {
                 auto s = dc;
                 s.weight = in[3];
                 s.bias = in[4];
                 return project(nn::deformable_conv(in[0], in[1], in[2], s, 2), seed);
               },
               {nn::random_array<double>({1, 4, 8, 8}, rng),
                jitter_off_lattice(nn::random_array<double>({1, 36, 8, 8}, rng, -2, 2), 0.05, rng),
                nn::random_array<double>({1, 18, 8, 8}, rng, 0.05, 0.95), dc.weight.value(), dc.bias.value()}));

    tsmc::TsmcConfig tc;
    tc.channels = {4, 4, 4};
    tc.seed = seed;
    auto p = tsmc::FgdParams<double>::init(tc);
    auto& lp = p.levels[0];
    lp.hidden_conv = random_conv(8, tc.offset_channels() + tc.mask_channels(), 3, 1, rng);
    lp.hidden_block.conv2 = random_conv(8, 8, 3, 1, rng);
    for (auto& v : lp.fine_conv.weight.mutable_value().values()) v += rng.uniform(-0.2, 0.2);
    std::vector<Tensor<double>*> slots = {&lp.hidden_block.conv1.weight, &lp.hidden_block.conv1.bias,
                                          &lp.hidden_block.conv2.weight, &lp.hidden_block.conv2.bias,
                                          &lp.hidden_conv.weight,        &lp.hidden_conv.bias,
                                          &lp.fine_conv.weight,          &lp.fine_conv.bias};
    std::vector<Array<double>> inputs = {
        nn::random_array<double>({1, 4, 8, 8}, rng),
        jitter_off_lattice(nn::random_array<double>({1, 2, 8, 8}, rng, -1.5, 1.5), 0.05, rng)};
    for (auto* s : slots) inputs.push_back(s->value());
    record("predict_offsets_masks", nn::finite_diff_check(
                                        [&](const std::vector<Tensor<double>>& in) {
                                          auto q = p;
                                          for (std::size_t i = 0; i < slots.size(); ++i) *slots[i] = in[2 + i];
                                          const auto om = tsmc::predict_offsets_masks(in[0], in[1], p, 1);
                                          p = q;
                                          return nn::add(project(om.offsets, seed), project(om.mask, seed + 7));
                                        },
                                        inputs));
  }
  const double secs = since(t0);
  return {worst < 1e-4 && secs < 60,
          fmt::format("{} checks, max rel err {:.2e} ({}), {:.1f} s", checks, worst, worst_op, secs)};
}

// -- degeneration ------------------------------------------------------------

Outcome degeneration() {
  Rng rng(2024);
  int equal = 0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t groups = 1 + rng.below(2);
    const std::size_t cin = groups * (1 + rng.below(4)), cout = 1 + rng.below(5);
    const std::size_t k = 1 + 2 * rng.below(3), stride = 1 + rng.below(2);
    const std::size_t h = 3 + rng.below(7), w = 3 + rng.below(7);
    auto spec = random_conv(cin, cout, k, stride, rng);
    const auto x = Tensor<double>::constant(nn::random_array<double>({1, cin, h, w}, rng));
    const std::size_t ho = (h + 2 * (k / 2) - k) / stride + 1, wo = (w + 2 * (k / 2) - k) / stride + 1;
    const auto off = Tensor<double>::constant(Array<double>({1, 2 * groups * k * k, ho, wo}));
    const auto mask = Tensor<double>::constant(Array<double>({1, groups * k * k, ho, wo}, 1.0));
    equal += nn::deformable_conv(x, off, mask, spec, groups).value() == nn::conv2d(x, spec).value();
  }
  return {equal == 100, fmt::format("{}/100 bit-identical", equal)};
}

// -- scale search ------------------------------------------------------------

Outcome scale_search() {
  const auto t0 = Clock::now();
  io::SynthParams sp;
  sp.width = 1920;
  sp.height = 1080;
  sp.shift_x = 24;
  sp.texture_period = 6;
  const auto seq = io::synth_sequence(sp);
  const auto& cur = seq.frames[1];
  const auto& ref = seq.frames[0];
  const flow::PyramidLucasKanade est;
  const auto cfg = sme::ScaleSearchConfig::standard();
  const auto seq_r = sme::select_scale(cur, ref, cfg, est, false);
  const auto par_r = sme::select_scale(cur, ref, cfg, est, true);
  bool same = seq_r.report.size() == par_r.report.size() && seq_r.best_scale == par_r.best_scale &&
              seq_r.flow == par_r.flow;
  for (std::size_t i = 0; same && i < seq_r.report.size(); ++i) {
    const auto &a = seq_r.report[i], &b = par_r.report[i];
    same = a.scale == b.scale && a.width == b.width && a.height == b.height && a.psnr == b.psnr;
  }
  sme::ScaleSearchConfig one = cfg;
  one.scales = {1.0};
  const bool singleton = sme::select_scale(cur, ref, one, est).flow == est.estimate(cur, ref);
  const double p1 = seq_r.report.front().psnr;
  const double secs = since(t0);
  const bool ok = seq_r.best_scale > 1 && seq_r.best_psnr >= p1 && same && singleton && secs < 120;
  return {ok, fmt::format("D_best {} ({:.2f} dB vs {:.2f} dB at 1), parallel==sequential {}, singleton exact {}, "
                          "{:.1f} s",
                          seq_r.best_scale, seq_r.best_psnr, p1, same, singleton, secs)};
}

Outcome sme_gate() {
  const flow::PyramidLucasKanade est;
  int closed = 0, open = 0;
  const int trials = 5;
  for (int s = 1; s <= trials; ++s) {
    io::SynthParams sp;
    sp.kind = io::SynthKind::kStatic;
    sp.width = 128;
    sp.height = 96;
    sp.seed = static_cast<std::uint64_t>(s);
    const auto seq = io::synth_sequence(sp);
    auto cfg = sme::ScaleSearchConfig::standard();
    cfg.tau = 10;
    closed += !sme::gated_flow(seq.frames[1], seq.frames[0], cfg, est).search.has_value();
    cfg.tau = 0;
    open += sme::gated_flow(seq.frames[1], seq.frames[0], cfg, est).search.has_value();
  }
  return {closed == trials && open == trials,
          fmt::format("tau=10 skipped search {}/{}, tau=0 searched {}/{}", closed, trials, open, trials)};
}

// -- MRQA --------------------------------------------------------------------

Outcome mrqa_exactness() {
  const auto t0 = Clock::now();
  bool tiled = true;
  for (double level : {25.0, 33.3, 41.0}) {
    const auto w = mrqa::schedule_rollout(std::vector<double>(64, level), {});
    for (std::size_t i = 0; i < w.size(); ++i) tiled = tiled && w[i] == mrqa::kBaseWeights[i % 7];
  }
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> u(0, 1);
  long violations = 0, weights = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    mrqa::MrqaState st;
    st.lambda_max = trial % 2 ? mrqa::kLambdaMaxPsnr : mrqa::kLambdaMaxMsSsim;
    st.lambda = st.lambda_max * u(gen);
    const std::size_t n = 2 + static_cast<std::size_t>(u(gen) * 63);
    std::vector<double> trace(n);
    for (auto& v : trace) v = 20 + 25 * u(gen);
    const auto w = mrqa::schedule_rollout(trace, st);
    const double r = st.lambda / st.lambda_max;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double base = mrqa::kBaseWeights[i % 7];
      ++weights;
      if (w[i] < base * (1 - r) || w[i] > base * (1 + r)) ++violations;
    }
  }
  bool monotone = true;
  mrqa::MrqaState st;
  for (long idx = 0; idx < 7; ++idx)
    for (double a = -12; a <= 12; a += 0.25)
      for (double b = -12; b < 12; b += 0.25) {
        monotone = monotone && mrqa::modulated_weight(idx, b + 0.25, a, st) <= mrqa::modulated_weight(idx, b, a, st);
        monotone = monotone && mrqa::modulated_weight(idx, a, b + 0.25, st) >= mrqa::modulated_weight(idx, a, b, st);
      }
  const double secs = since(t0);
  return {tiled && violations == 0 && monotone && secs < 10,
          fmt::format("tiling {}, {} bound violations in {} weights, monotone {}, {:.2f} s", tiled, violations,
                      weights, monotone, secs)};
}

// -- BD-rate -----------------------------------------------------------------

Outcome bd_rate_oracle() {
  const auto t0 = Clock::now();
  std::mt19937 gen(31);
  std::uniform_real_distribution<double> u(0, 1);
  double worst = 0;
  for (int trial = 0; trial < 200; ++trial) {
    metrics::RDCurve a{"a", {}}, t{"t", {}};
    double r = 0.01 + 0.05 * u(gen), q = 26 + 4 * u(gen);
    double r2 = r * (0.6 + 0.8 * u(gen)), q2 = q + 2 * u(gen) - 1;
    for (int i = 0; i < 4; ++i) {
      a.points.push_back({r, q, "a"});
      t.points.push_back({r2, q2, "t"});
      r *= 1.4 + u(gen);
      q += 0.8 + 2.5 * u(gen);
      r2 *= 1.4 + u(gen);
      q2 += 0.8 + 2.5 * u(gen);
    }
    worst = std::max(worst, std::abs(metrics::bd_rate(a, t) - fga::testing::reference_bd_rate(a, t)));
  }
  metrics::RDCurve c{"c", {{0.05, 30.1, ""}, {0.11, 32.4, ""}, {0.23, 34.0, ""}, {0.5, 36.2, ""}}};
  metrics::RDCurve half = c;
  for (auto& p : half.points) p.bpp *= 0.5;
  const double same = metrics::bd_rate(c, c), h = metrics::bd_rate(c, half);
  const double secs = since(t0);
  return {worst < 0.01 && same == 0.0 && std::abs(h + 50) <= 1e-6 && secs < 10,
          fmt::format("max |diff| {:.2e} % over 200 pairs, identical {} %, half {:.9f} %, {:.1f} s", worst, same, h,
                      secs)};
}

// -- training ----------------------------------------------------------------

harness::ExperimentConfig toy_config() {
  harness::ExperimentConfig c;
  c.seed = 7;
  c.output_dir = "";
  c.train.steps = 400;
  return c;
}

Outcome toy_learning(harness::ToyModel& trained) {
  const auto t0 = Clock::now();
  const auto cfg = toy_config();
  const auto a = harness::train_toy(cfg, &trained);
  const auto b = harness::train_toy(cfg);
  const bool repro = a.loss == b.loss && a.aligned_mse == b.aligned_mse && a.coarse_mse == b.coarse_mse;
  bool finite = true;
  for (double l : a.loss) finite = finite && std::isfinite(l);
  const double secs = since(t0);
  return {a.ratio() <= 0.8 && repro && finite && a.seconds < 600,
          fmt::format("{} steps, aligned/coarse {:.4f} ({:.5f} / {:.5f}), reproducible {}, {:.1f} s per run",
                      a.loss.size(), a.ratio(), a.aligned_mse, a.coarse_mse, repro, secs / 2)};
}

// -- protocol ----------------------------------------------------------------

Outcome protocol(const harness::ToyModel& model) {
  harness::ExperimentConfig c;
  c.frames = 96;
  c.sequences[0].name = "shift";
  c.sequences[0].width = 64;
  c.sequences[0].height = 48;
  c.sequences[0].synth.shift_x = 1.5;
  c.sequences[0].synth.shift_y = -0.5;
  const auto r = harness::evaluate_sequence(c, model);
  std::vector<int> intra;
  bool gop_ids = true;
  for (const auto& row : r.rows) {
    if (row.intra) intra.push_back(row.frame);
    gop_ids = gop_ids && row.gop == row.frame / 32;
  }
  const bool rows_ok = r.rows.size() == 96 && intra == std::vector<int>{0, 32, 64} && gop_ids;

  harness::ExperimentConfig hd = c;
  hd.frames = 2;
  hd.sequences[0].width = 1920;
  hd.sequences[0].height = 1080;
  hd.sequences[0].synth.shift_x = 4;
  const auto h = harness::evaluate_sequence(hd, model);
  const auto& p = h.rows.at(1);
  const bool pad_ok = h.padded_width == 1920 && h.padded_height == 1088 && h.width == 1920 && h.height == 1080;
  const bool bpp_ok = p.bits > 0 && p.bpp == p.bits / (1920.0 * 1080.0);

  io::Frame black(4, 4, io::ColorSpace::kYuv420), white(4, 4, io::ColorSpace::kYuv420);
  for (int k = 0; k < 3; ++k) {
    std::fill(black.plane(k).data.begin(), black.plane(k).data.end(), k == 0 ? 16.f : 128.f);
    std::fill(white.plane(k).data.begin(), white.plane(k).data.end(), k == 0 ? 235.f : 128.f);
  }
  bool bw = true;
  const io::Frame b = io::yuv420_to_rgb_bt709(black), w = io::yuv420_to_rgb_bt709(white);
  for (int k = 0; k < 3; ++k) {
    for (float v : b.plane(k).data) bw = bw && v == 0.f;
    for (float v : w.plane(k).data) bw = bw && v == 255.f;
  }
  std::mt19937 gen(5);
  std::uniform_int_distribution<int> d(0, 255);
  io::Frame rgb(64, 64, io::ColorSpace::kRgb);
  for (int k = 0; k < 3; ++k)
    for (auto& v : rgb.plane(k).data) v = static_cast<float>(d(gen));
  const io::Frame back = io::yuv444_to_rgb_bt709(io::rgb_to_yuv444_bt709(rgb));
  float trip = 0;
  for (int k = 0; k < 3; ++k)
    for (std::size_t i = 0; i < rgb.plane(k).data.size(); ++i)
      trip = std::max(trip, std::abs(back.plane(k).data[i] - rgb.plane(k).data[i]));

  return {rows_ok && pad_ok && bpp_ok && bw && trip <= 1,
          fmt::format("{} rows, intra at {}, 1920x1080 padded to {}x{}, bpp on original {}, black/white {}, "
                      "RGB->YUV444->RGB max diff {}",
                      r.rows.size(), fmt::join(intra, "/"), h.padded_width, h.padded_height, bpp_ok, bw, trip)};
}

// -- ablation ----------------------------------------------------------------

Outcome ablation() {
  const auto t0 = Clock::now();
  const fs::path dir = fs::temp_directory_path() / "fga_acceptance_ablation";
  fs::remove_all(dir);
  harness::ExperimentConfig c;
  c.frames = 16;
  c.gop = 8;
  c.train.steps = 40;
  c.sequences[0].name = "shift";
  c.sequences[0].width = 48;
  c.sequences[0].height = 48;
  c.sequences[0].synth.shift_x = 1.5;
  const auto rows = harness::run_ablation(c, dir.string());
  bool ok = rows.size() == 6 && fs::exists(dir / "ablation.csv");
  std::set<std::string> names;
  std::vector<std::pair<double, std::string>> order;
  for (const auto& r : rows) {
    names.insert(r.entry.name);
    const auto csv = harness::read_frame_csv(r.csv);
    ok = ok && csv.size() == 16;
    for (std::size_t i = 0; ok && i < csv.size(); ++i) ok = csv[i].frame == static_cast<int>(i);
    order.emplace_back(-r.psnr, fmt::format("{} {:.2f}", r.entry.name, r.psnr));
  }
  ok = ok && names == std::set<std::string>{"Ma", "Mb", "Mc", "Md", "Me", "Mf"};
  std::sort(order.begin(), order.end());
  std::vector<std::string> ranked;
  for (const auto& o : order) ranked.push_back(o.second);
  return {ok, fmt::format("6 configs, PSNR order {}, {:.1f} s", fmt::join(ranked, " > "), since(t0))};
}

}  // namespace

int main() {
  int failed = 0;
  auto run = [&](const std::string& name, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  };
  harness::ToyModel trained = harness::ToyModel::init(tsmc::TsmcConfig::toy());
  run("gradient suite", gradient_suite);
  run("degeneration identity", degeneration);
  run("scale search fidelity", scale_search);
  run("SME gate", sme_gate);
  run("MRQA exactness", mrqa_exactness);
  run("BD-rate oracle", bd_rate_oracle);
  run("toy alignment learning", [&] { return toy_learning(trained); });
  run("protocol conformance", [&] { return protocol(trained); });
  run("ablation harness parity", ablation);
  std::cout << fmt::format("{} of 9 criteria passed", 9 - failed) << std::endl;
  return failed == 0 ? 0 : 1;
}
