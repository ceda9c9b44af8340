#include "fga/harness/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include <fmt/format.h>

#include "fga/flow/flow.hpp"
#include "fga/harness/config.hpp"
#include "fga/harness/evaluate.hpp"
#include "fga/harness/report.hpp"
#include "fga/harness/train.hpp"
#include "fga/imageio/geometry.hpp"
#include "fga/imageio/png.hpp"
#include "fga/metrics/metrics.hpp"
#include "fga/mrqa/mrqa.hpp"
#include "fga/sme/sme.hpp"

namespace fga::harness {

namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config;
  std::string out;
};

ExperimentConfig resolve(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : load_config(c.config);
  if (!c.out.empty()) cfg.output_dir = c.out;
  cfg.validate();
  return cfg;
}

std::string path_in(const ExperimentConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.output_dir);
  return (fs::path(cfg.output_dir) / name).string();
}

std::vector<double> read_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io::DataError(fmt::format("cannot open '{}'", path));
  std::string first;
  std::getline(in, first);
  in.close();
  if (first.rfind("frame_idx,", 0) == 0) {
    std::vector<double> out;
    for (const auto& r : read_frame_csv(path)) out.push_back(r.psnr);
    return out;
  }
  std::ifstream again(path);
  std::vector<double> out;
  std::string line;
  int n = 0;
  while (std::getline(again, line)) {
    ++n;
    if (line.empty() || (n == 1 && line == "psnr")) continue;
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(line, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != line.size()) throw io::DataError(fmt::format("{}:{}: '{}' is not a PSNR", path, n, line));
    out.push_back(v);
  }
  if (out.size() < 2) throw io::DataError(fmt::format("{}: a trace needs at least two frames", path));
  return out;
}

metrics::RDCurve read_curve(const std::string& path) {
  auto pts = read_rd_csv(path);
  if (pts.empty()) throw io::DataError(fmt::format("{}: no RD points", path));
  return {pts.front().label, pts};
}

ToyModel model_for(const ExperimentConfig& cfg, const std::string& checkpoint) {
  tsmc::TsmcConfig tc = cfg.tsmc;
  tc.seed = cfg.seed;
  ToyModel m = ToyModel::init(tc);
  if (!checkpoint.empty()) m.load(checkpoint);
  return m;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"flow-guided alignment toolkit"};
  app.name("fga");
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "key = value config file")->check(CLI::ExistingFile);
    sub->add_option("--out", common.out, "output directory (overrides the config)");
  };

  std::string cur_path, ref_path, checkpoint;
  auto* flow_cmd = app.add_subcommand("flow", "estimate dense flow between two PNG frames");
  flow_cmd->add_option("--cur", cur_path)->required();
  flow_cmd->add_option("--ref", ref_path)->required();
  add_common(flow_cmd);

  auto* sme_cmd = app.add_subcommand("sme", "adaptive-scale flow for two PNG frames");
  sme_cmd->add_option("--cur", cur_path)->required();
  sme_cmd->add_option("--ref", ref_path)->required();
  double tau = -1;
  sme_cmd->add_option("--tau", tau, "gate threshold in px; default from config");
  add_common(sme_cmd);

  auto* align_cmd = app.add_subcommand("align", "coarse warp plus flow-guided deformable alignment");
  align_cmd->add_option("--cur", cur_path)->required();
  align_cmd->add_option("--ref", ref_path)->required();
  align_cmd->add_option("--checkpoint", checkpoint);
  add_common(align_cmd);

  std::string trace_path;
  double lambda = mrqa::kLambdaMaxPsnr, lambda_max = mrqa::kLambdaMaxPsnr;
  auto* mrqa_cmd = app.add_subcommand("mrqa", "quality-aware weights for a PSNR trace");
  mrqa_cmd->add_option("--psnr", trace_path, "one PSNR per line, or a per-frame CSV")->required();
  mrqa_cmd->add_option("--lambda", lambda);
  mrqa_cmd->add_option("--lambda-max", lambda_max);
  add_common(mrqa_cmd);

  int steps = -1;
  auto* train_cmd = app.add_subcommand("train", "toy alignment training");
  train_cmd->add_option("--steps", steps);
  add_common(train_cmd);

  bool ablation = false, dump = false;
  auto* eval_cmd = app.add_subcommand("eval", "GOP evaluation of the configured sequences");
  eval_cmd->add_option("--checkpoint", checkpoint);
  eval_cmd->add_flag("--ablation", ablation, "train and evaluate the six Ma..Mf toggles");
  eval_cmd->add_flag("--dump-recon", dump, "write reconstructions as PNG");
  add_common(eval_cmd);

  std::string anchor, test;
  auto* bd_cmd = app.add_subcommand("bdrate", "BD-rate of two RD CSVs (label,bpp,quality)");
  bd_cmd->add_option("--anchor", anchor)->required();
  bd_cmd->add_option("--test", test)->required();
  add_common(bd_cmd);

  std::vector<std::string> csvs;
  auto* plot_cmd = app.add_subcommand("plot", "SVG charts from per-frame or RD CSVs");
  plot_cmd->add_option("csv", csvs)->required();
  add_common(plot_cmd);

  auto* self_cmd = app.add_subcommand("selftest", "fast invariant suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  std::string command;
  for (int i = 1; i < argc; ++i) command += (i > 1 ? " " : "") + std::string(argv[i]);

  try {
    if (self_cmd->parsed()) {
      bool all = true;
      for (const auto& c : run_selftest()) {
        out << fmt::format("{} {}{}\n", c.passed ? "PASS" : "FAIL", c.name, c.detail.empty() ? "" : " (" + c.detail + ")");
        all = all && c.passed;
      }
      return all ? kExitOk : kExitCheckFailed;
    }

    const ExperimentConfig cfg = resolve(common);
    std::vector<std::string> outputs;

    if (flow_cmd->parsed() || sme_cmd->parsed() || align_cmd->parsed()) {
      const io::Frame cur = io::read_png(cur_path), ref = io::read_png(ref_path);
      if (cur.width() != ref.width() || cur.height() != ref.height())
        throw io::DataError(fmt::format("frame sizes differ: {}x{} vs {}x{}", cur.width(), cur.height(), ref.width(),
                                        ref.height()));
      const flow::PyramidLucasKanade est(cfg.flow);
      flow::FlowField v;
      if (flow_cmd->parsed()) {
        v = est.estimate(cur, ref);
      } else {
        sme::ScaleSearchConfig sc = cfg.sme;
        if (tau >= 0) sc.tau = tau;
        const sme::GatedFlow g = sme::gated_flow(cur, ref, sc, est, cfg.sme_parallel);
        v = g.flow;
        out << fmt::format("magnitude {:.4f} px, tau {}\n", g.magnitude, sc.tau);
        if (g.search) {
          const std::string csv = path_in(cfg, "sme.csv");
          std::ofstream o(csv);
          o << "scale,width,height,warp_psnr\n";
          for (const auto& e : g.search->report) {
            o << fmt::format("{},{},{},{:.6f}\n", e.scale, e.width, e.height, e.psnr);
            out << fmt::format("scale {:<5} {}x{}  warp PSNR {:.3f}\n", e.scale, e.width, e.height, e.psnr);
          }
          for (const auto& s : g.search->skipped) out << fmt::format("scale {} skipped: {}\n", s.scale, s.reason);
          out << fmt::format("selected scale {}\n", g.search->best_scale);
          outputs.push_back(csv);
        } else {
          out << "gate closed; scale-1 flow\n";
        }
      }
      out << fmt::format("flow RMS {:.4f} px, warp PSNR {:.3f} dB\n", flow::flow_magnitude(v),
                         metrics::psnr(flow::warp(ref, v), cur));
      const std::string flo = path_in(cfg, "flow.flo"), warped = path_in(cfg, "warped.png");
      flow::write_flow(flo, v);
      io::write_png(warped, flow::warp(ref, v));
      outputs.insert(outputs.end(), {flo, warped});
      if (align_cmd->parsed()) {
        const ToyModel m = model_for(cfg, checkpoint);
        const io::PaddedFrame pc = io::pad_to_multiple(cur, 4), pr = io::pad_to_multiple(ref, 4);
        const flow::FlowField pv = flow::PyramidLucasKanade(cfg.flow).estimate(pc.frame, pr.frame);
        const auto lv = tsmc::tsmc_forward(tsmc::frame_to_tensor<float>(pr.frame), pv, m.fgd);
        const auto target = tsmc::build_feature_pyramid(tsmc::frame_to_tensor<float>(pc.frame), m.fgd);
        for (int s = 0; s < 3; ++s)
          out << fmt::format("level {}: coarse-warp MSE {:.6f}, aligned MSE {:.6f}\n", s + 1,
                             nn::mse(lv[s].warped, target[s]).value()[0], nn::mse(lv[s].refined, target[s]).value()[0]);
        const io::Frame recon = io::crop(
            tsmc::tensor_to_frame(nn::add(tsmc::frame_to_tensor<float>(flow::warp(pr.frame, pv)),
                                          nn::conv2d(lv[0].refined, m.head))),
            cur.width(), cur.height());
        out << fmt::format("prediction PSNR {:.3f} dB\n", metrics::psnr(recon, cur));
        const std::string rp = path_in(cfg, "aligned.png");
        io::write_png(rp, recon);
        outputs.push_back(rp);
      }
    } else if (mrqa_cmd->parsed()) {
      mrqa::MrqaState st;
      st.lambda = lambda;
      st.lambda_max = lambda_max;
      st.validate();
      const auto trace = read_trace(trace_path);
      const auto w = mrqa::schedule_rollout(trace, st);
      const std::string csv = path_in(cfg, "mrqa_weights.csv");
      std::ofstream o(csv);
      o << "frame,psnr,weight\n";
      for (std::size_t t = 0; t < w.size(); ++t) {
        o << fmt::format("{},{},{}\n", t + 1, trace[t + 1], w[t]);
        out << fmt::format("{}{}", t ? " " : "", w[t]);
      }
      out << "\n";
      outputs.push_back(csv);
    } else if (train_cmd->parsed()) {
      ExperimentConfig c = cfg;
      if (steps >= 0) c.train.steps = steps;
      const TrainReport r = train_toy(c);
      const std::string loss = path_in(c, "train_loss.csv");
      std::ofstream o(loss);
      o << "step,phase,loss\n";
      for (std::size_t i = 0; i < r.loss.size(); ++i) o << fmt::format("{},{},{:.9g}\n", i, r.phase[i], r.loss[i]);
      out << fmt::format("steps {}, {:.1f} s\n", r.loss.size(), r.seconds);
      out << fmt::format("held-out feature MSE: coarse warp {:.6f} -> aligned {:.6f} (init {:.6f}), ratio {:.4f}\n",
                         r.coarse_mse, r.aligned_mse, r.aligned_mse_init, r.ratio());
      out << fmt::format("checkpoint {}\n", r.checkpoint);
      outputs.insert(outputs.end(), {loss, r.checkpoint});
      write_manifest(c.output_dir, c, command, outputs);
      return kExitOk;
    } else if (eval_cmd->parsed()) {
      if (ablation) {
        const auto rows = run_ablation(cfg, cfg.output_dir);
        out << "config tsmc mrqa sme      bpp     psnr  ms-ssim warp-psnr\n";
        for (const auto& r : rows) {
          out << fmt::format("{:<6} {:>4} {:>4} {:>3} {:>8.5f} {:>8.3f} {:>8.5f} {:>9.3f}\n", r.entry.name,
                             int(r.entry.tsmc), int(r.entry.mrqa), int(r.entry.sme), r.bpp, r.psnr, r.ms_ssim,
                             r.warp_psnr);
          outputs.push_back(r.csv);
        }
        outputs.push_back(path_in(cfg, "ablation.csv"));
      } else {
        const ToyModel m = model_for(cfg, checkpoint);
        std::vector<metrics::RDPoint> rd;
        for (std::size_t i = 0; i < cfg.sequences.size(); ++i) {
          const std::string name = cfg.sequences[i].name;
          const SequenceResult r =
              evaluate_sequence(cfg, m, i, dump ? path_in(cfg, name + "_recon") : std::string());
          for (const auto& w : r.warnings) err << "warning: " << w << "\n";
          const std::string csv = path_in(cfg, name + ".csv");
          write_frame_csv(csv, r.rows);
          rd.push_back(r.rd);
          outputs.push_back(csv);
          out << fmt::format("{}: {} frames, {}x{} (padded {}x{}), bpp {:.6f}, quality {:.4f}\n", name, r.rows.size(),
                             r.width, r.height, r.padded_width, r.padded_height, r.rd.bpp, r.rd.quality);
        }
        const std::string rdp = path_in(cfg, "rd.csv");
        write_rd_csv(rdp, rd);
        outputs.push_back(rdp);
      }
    } else if (bd_cmd->parsed()) {
      const double bd = metrics::bd_rate(read_curve(anchor), read_curve(test));
      out << fmt::format("{:.2f}%\n", bd);
    } else if (plot_cmd->parsed()) {
      outputs = emit_plots(csvs, cfg.output_dir);
      for (const auto& p : outputs) out << p << "\n";
    }
    write_manifest(cfg.output_dir, cfg, command, outputs);
    return kExitOk;
  } catch (const io::DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace fga::harness
