#include "fga/harness/train.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <fmt/format.h>

#include "fga/flow/flow.hpp"
#include "fga/imageio/frame.hpp"
#include "fga/imageio/synth.hpp"
#include "fga/metrics/metrics.hpp"
#include "fga/mrqa/mrqa.hpp"

namespace fga::harness {

using nn::Tensor;

namespace {

constexpr char kHeadMagic[8] = {'F', 'G', 'A', 'H', 'E', 'A', 'D', '\0'};

template <typename V>
void put(std::ostream& o, V v) {
  o.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename V>
V get(std::istream& in, const std::string& path) {
  V v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw io::DataError(fmt::format("{}: truncated", path));
  return v;
}

}  // namespace

ToyModel ToyModel::init(const tsmc::TsmcConfig& cfg) {
  ToyModel m;
  m.fgd = tsmc::FgdParams<float>::init(cfg);
  m.head = nn::ConvSpec<float>::zeros(cfg.channels[0], 3, 3);
  return m;
}

void ToyModel::save(const std::string& path) const {
  tsmc::save_checkpoint(path, fgd);
  std::ofstream o(path + ".head", std::ios::binary);
  if (!o) throw io::DataError(fmt::format("cannot write {}.head", path));
  o.write(kHeadMagic, 8);
  const auto& s = head.weight.shape();
  for (std::size_t d : s) put<std::uint32_t>(o, static_cast<std::uint32_t>(d));
  for (float v : head.weight.value().values()) put(o, v);
  for (float v : head.bias.value().values()) put(o, v);
}

void ToyModel::load(const std::string& path) {
  tsmc::load_checkpoint(path, fgd);
  const std::string hp = path + ".head";
  std::ifstream in(hp, std::ios::binary);
  if (!in) throw io::DataError(fmt::format("cannot open {}", hp));
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kHeadMagic, 8) != 0)
    throw io::DataError(fmt::format("{}: not a head checkpoint", hp));
  nn::Shape s(4);
  for (auto& d : s) d = get<std::uint32_t>(in, hp);
  if (s != head.weight.shape())
    throw io::DataError(fmt::format("{}: head shape {} does not match {}", hp, nn::shape_str(s),
                                    nn::shape_str(head.weight.shape())));
  nn::Array<float> w(s), b({s[0]});
  for (auto& v : w.values()) v = get<float>(in, hp);
  for (auto& v : b.values()) v = get<float>(in, hp);
  head.weight = Tensor<float>::parameter(std::move(w));
  head.bias = Tensor<float>::parameter(std::move(b));
}

ToyForward toy_forward(const tsmc::Pyramid<float>& feats, const flow::FlowField& flow, const ToyModel& m,
                       bool tsmc_enabled) {
  ToyForward out;
  tsmc::Pyramid<float> aligned;
  for (int l = 0; l < 3; ++l) {
    const Tensor<float> v = tsmc::flow_to_tensor<float>(flow::rescale_flow(flow, std::ldexp(1.0, -l)));
    out.warped[l] = nn::warp(feats[l], v);
    if (!tsmc_enabled) continue;
    auto om = tsmc::predict_offsets_masks(feats[l], v, m.fgd, l + 1);
    aligned[l] = tsmc::deformable_align(feats[l], om, m.fgd, l + 1);
    out.coarse_offsets.push_back(om.coarse_offsets);
  }
  out.contexts = tsmc_enabled ? tsmc::refine_contexts(aligned, m.fgd) : out.warped;
  out.residual = nn::conv2d(out.contexts[0], m.head);
  return out;
}

double offset_bits(const std::vector<Tensor<float>>& coarse) {
  double bits = 0;
  for (const auto& t : coarse)
    for (float v : t.value().values()) bits += std::abs(static_cast<double>(v));
  return bits;
}

namespace {

struct Pair {
  flow::FlowField flow;
  tsmc::Pyramid<float> ref_feats;
  tsmc::Pyramid<float> target;  // features of the current frame
  Tensor<float> cur;            // (1,3,H,W) in [0,1]
  Tensor<float> warped_image;
};

using Clip = std::vector<Pair>;  // consecutive pairs of one sequence

tsmc::Pyramid<float> frozen_features(const io::Frame& f, const tsmc::FgdParams<float>& p) {
  auto feats = tsmc::build_feature_pyramid(tsmc::frame_to_tensor<float>(f), p);
  for (auto& t : feats) t = t.detach();
  return feats;
}

std::vector<Clip> make_pool(const ExperimentConfig& cfg, const ToyModel& m, int count, std::uint64_t seed) {
  const TrainSettings& ts = cfg.train;
  nn::Rng rng(seed);
  const flow::PyramidLucasKanade estimator(cfg.flow);
  std::vector<Clip> pool;
  for (int i = 0; i < count; ++i) {
    io::SynthParams sp;
    sp.kind = io::SynthKind::kAffine;
    sp.width = sp.height = ts.size;
    sp.frames = ts.batch + 1;
    sp.seed = rng.next_u64();
    sp.shift_x = rng.uniform(-ts.max_shift, ts.max_shift);
    sp.shift_y = rng.uniform(-ts.max_shift, ts.max_shift);
    sp.rotation = rng.uniform(-ts.max_rotation, ts.max_rotation);
    sp.zoom = 1.0 + rng.uniform(-ts.max_zoom, ts.max_zoom);
    sp.texture_period = rng.uniform(4.0, 8.0);
    const io::SynthSequence seq = io::synth_sequence(sp);
    Clip clip;
    for (int t = 1; t < sp.frames; ++t) {
      const io::Frame& cur = seq.frames[t];
      const io::Frame& ref = seq.frames[t - 1];
      Pair p;
      p.flow = estimator.estimate(cur, ref);
      p.ref_feats = frozen_features(ref, m.fgd);
      p.target = frozen_features(cur, m.fgd);
      p.cur = tsmc::frame_to_tensor<float>(cur);
      p.warped_image = tsmc::frame_to_tensor<float>(flow::warp(ref, p.flow));
      clip.push_back(std::move(p));
    }
    pool.push_back(std::move(clip));
  }
  return pool;
}

struct PairLoss {
  Tensor<float> distortion;
  Tensor<float> rate;
  double recon_psnr = 0;
};

Tensor<float> feature_distortion(const std::array<Tensor<float>, 3>& c, const tsmc::Pyramid<float>& target) {
  Tensor<float> d = nn::mse(c[0], target[0]);
  for (int l = 1; l < 3; ++l) d = nn::add(d, nn::mse(c[l], target[l]));
  return nn::scale(d, 1.0f / 3.0f);
}

PairLoss pair_loss(const Pair& p, const ToyModel& m, bool tsmc_enabled, bool joint) {
  const ToyForward f = toy_forward(p.ref_feats, p.flow, m, tsmc_enabled);
  const Tensor<float> recon = nn::add(p.warped_image, f.residual);
  const Tensor<float> recon_mse = nn::mse(recon, p.cur);
  PairLoss out;
  out.recon_psnr = metrics::psnr_from_mse(static_cast<double>(recon_mse.value()[0]) * 255.0 * 255.0);
  if (!tsmc_enabled) {
    out.distortion = recon_mse;
    return out;
  }
  out.distortion = feature_distortion(f.contexts, p.target);
  if (joint) out.distortion = nn::add(out.distortion, recon_mse);
  Tensor<float> r = nn::mean_abs(f.coarse_offsets[0]);
  for (int l = 1; l < 3; ++l) r = nn::add(r, nn::mean_abs(f.coarse_offsets[l]));
  out.rate = nn::scale(r, 1.0f / 3.0f);
  return out;
}

AlignmentScore score(const std::vector<Clip>& pool, const ToyModel& m, bool tsmc_enabled) {
  AlignmentScore s;
  std::size_t n = 0;
  for (const auto& clip : pool)
    for (const auto& p : clip) {
      const ToyForward f = toy_forward(p.ref_feats, p.flow, m, tsmc_enabled);
      s.coarse += feature_distortion(f.warped, p.target).value()[0];
      s.aligned += feature_distortion(f.contexts, p.target).value()[0];
      ++n;
    }
  s.coarse /= static_cast<double>(n);
  s.aligned /= static_cast<double>(n);
  return s;
}

enum class Phase { kMotion, kContext, kAll };

const char* phase_name(Phase p) {
  switch (p) {
    case Phase::kMotion: return "motion";
    case Phase::kContext: return "context";
    default: return "all";
  }
}

bool trainable(const std::string& name, Phase phase) {
  if (name.rfind("level", 0) != 0) return false;
  const bool motion = name.find(".hidden_") != std::string::npos || name.find(".fine_conv") != std::string::npos;
  if (phase == Phase::kMotion) return motion;
  return motion || name.find(".dcn") != std::string::npos || name.find(".refine") != std::string::npos;
}

}  // namespace

AlignmentScore alignment_score(const ExperimentConfig& cfg, const ToyModel& m) {
  return score(make_pool(cfg, m, cfg.train.eval_pool, cfg.seed ^ 0x5eedULL), m, cfg.tsmc_enabled);
}

TrainReport train_toy(const ExperimentConfig& cfg, ToyModel* trained) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const TrainSettings& ts = cfg.train;
  tsmc::TsmcConfig tc = cfg.tsmc;
  tc.seed = cfg.seed;
  ToyModel m = ToyModel::init(tc);

  const std::vector<Clip> pool = make_pool(cfg, m, ts.pool, cfg.seed);
  const std::vector<Clip> held_out = make_pool(cfg, m, ts.eval_pool, cfg.seed ^ 0x5eedULL);

  TrainReport rep;
  const AlignmentScore init = score(held_out, m, cfg.tsmc_enabled);
  rep.coarse_mse_init = init.coarse;
  rep.aligned_mse_init = init.aligned;

  const int motion_end = static_cast<int>(std::lround(ts.steps * ts.motion_fraction));
  const int context_end = motion_end + static_cast<int>(std::lround(ts.steps * ts.context_fraction));
  mrqa::MrqaState mstate;
  mstate.lambda = cfg.lambda;
  mstate.lambda_max = cfg.lambda_max;

  nn::Rng order(cfg.seed ^ 0x07de7ULL);
  const float lr = static_cast<float>(ts.learning_rate);
  double first_loss = 0;
  for (int step = 0; step < ts.steps; ++step) {
    Phase phase = step < motion_end ? Phase::kMotion : step < context_end ? Phase::kContext : Phase::kAll;
    std::vector<Tensor<float>*> active;
    for (auto& [name, t] : m.fgd.named()) {
      const bool on = cfg.tsmc_enabled && trainable(name, phase);
      t->node()->requires_grad = on;
      if (on) active.push_back(t);
    }
    const bool head_on = phase == Phase::kAll || !cfg.tsmc_enabled;
    m.head.weight.node()->requires_grad = head_on;
    m.head.bias.node()->requires_grad = head_on;
    if (head_on) {
      active.push_back(&m.head.weight);
      active.push_back(&m.head.bias);
    }

    const Clip& clip = pool[order.below(pool.size())];
    std::vector<PairLoss> losses;
    std::vector<double> trace;
    for (const auto& p : clip) {
      losses.push_back(pair_loss(p, m, cfg.tsmc_enabled, phase == Phase::kAll));
      trace.push_back(losses.back().recon_psnr);
    }
    std::vector<double> w(clip.size(), 1.0);
    if (cfg.mrqa_finetune) {
      trace.insert(trace.begin(), trace.front());
      w = mrqa::schedule_rollout(trace, mstate);
    }
    const float inv_b = 1.0f / static_cast<float>(clip.size());
    double total = 0;
    for (std::size_t t = 0; t < clip.size(); ++t) {
      Tensor<float> l = nn::scale(losses[t].distortion, static_cast<float>(w[t] * cfg.lambda) * inv_b);
      if (losses[t].rate.defined() && ts.rate_weight > 0)
        l = nn::add(l, nn::scale(losses[t].rate, static_cast<float>(ts.rate_weight) * inv_b));
      total += l.value()[0];
      if (!active.empty()) l.backward();
    }
    if (step == 0) first_loss = total;
    if (!std::isfinite(total) || total > ts.divergence * first_loss)
      throw TrainingDiverged(fmt::format("training diverged at step {} ({} phase): loss {} vs initial {} (limit {}x)",
                                         step, phase_name(phase), total, first_loss, ts.divergence));
    rep.loss.push_back(total);
    rep.phase.emplace_back(phase_name(phase));
    for (Tensor<float>* t : active) {
      if (t->has_grad()) {
        auto v = t->mutable_value().values();
        auto g = t->grad().values();
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= lr * g[i];
      }
      t->zero_grad();
    }
  }
  for (auto& [name, t] : m.fgd.named()) t->node()->requires_grad = true;
  m.head.weight.node()->requires_grad = true;
  m.head.bias.node()->requires_grad = true;

  const AlignmentScore fin = score(held_out, m, cfg.tsmc_enabled);
  rep.coarse_mse = fin.coarse;
  rep.aligned_mse = fin.aligned;
  if (!cfg.output_dir.empty()) {
    std::filesystem::create_directories(cfg.output_dir);
    rep.checkpoint = (std::filesystem::path(cfg.output_dir) / "toy.ckpt").string();
    m.save(rep.checkpoint);
  }
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (trained) *trained = std::move(m);
  return rep;
}

}  // namespace fga::harness
