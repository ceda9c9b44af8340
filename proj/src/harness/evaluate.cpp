#include "fga/harness/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "fga/flow/flow.hpp"
#include "fga/imageio/color.hpp"
#include "fga/imageio/geometry.hpp"
#include "fga/imageio/png.hpp"
#include "fga/imageio/raw_video.hpp"
#include "fga/imageio/synth.hpp"
#include "fga/sme/sme.hpp"

namespace fga::harness {

namespace fs = std::filesystem;
using nn::Tensor;

std::vector<io::Frame> load_sequence(const SequenceSource& src, int budget, std::vector<std::string>* warnings) {
  std::vector<io::Frame> out;
  if (src.path.empty()) {
    io::SynthParams p = src.synth;
    p.width = src.width;
    p.height = src.height;
    p.frames = budget;
    out = io::synth_sequence(p).frames;
  } else {
    io::RawVideoReader reader(src.path, src.width, src.height);
    while (static_cast<int>(out.size()) < budget) {
      auto f = reader.next();
      if (!f) break;
      out.push_back(io::yuv420_to_rgb_bt709(*f));
    }
  }
  if (static_cast<int>(out.size()) < budget && warnings)
    warnings->push_back(fmt::format("{}: only {} of {} frames available; evaluating what exists", src.name,
                                    out.size(), budget));
  return out;
}

namespace {

io::Frame predict(const io::Frame& ref, const flow::FlowField& v, const ToyModel& m, bool tsmc_enabled,
                  double& bits) {
  const Tensor<float> ref_t = tsmc::frame_to_tensor<float>(ref);
  Tensor<float> residual;
  if (tsmc_enabled) {
    const auto out = tsmc::tsmc_forward(ref_t, v, m.fgd);
    bits = 0;
    for (const auto& l : out)
      for (float o : l.om.coarse_offsets.value().values()) bits += std::abs(static_cast<double>(o));
    residual = nn::conv2d(out[0].refined, m.head);
  } else {
    const auto feats = tsmc::build_feature_pyramid(ref_t, m.fgd);
    residual = toy_forward(feats, v, m, false).residual;
    bits = 0;
  }
  const Tensor<float> base = tsmc::frame_to_tensor<float>(flow::warp(ref, v));
  return tsmc::tensor_to_frame(nn::add(base, residual));
}

}  // namespace

SequenceResult evaluate_sequence(const ExperimentConfig& cfg, const ToyModel& model, std::size_t index,
                                 const std::string& recon_dir) {
  cfg.validate();
  if (index >= cfg.sequences.size()) throw std::out_of_range(fmt::format("no sequence #{}", index));
  const SequenceSource& src = cfg.sequences[index];
  SequenceResult res;
  res.label = src.name;
  const std::vector<io::Frame> frames = load_sequence(src, cfg.frames, &res.warnings);
  if (frames.empty()) throw io::DataError(fmt::format("{}: no frames", src.name));
  res.width = frames[0].width();
  res.height = frames[0].height();

  sme::ScaleSearchConfig search = cfg.sme;
  if (!cfg.sme_enabled) search.tau = std::numeric_limits<double>::infinity();
  const flow::PyramidLucasKanade estimator(cfg.flow);
  const double pixels = static_cast<double>(res.width) * res.height;
  if (!recon_dir.empty()) fs::create_directories(recon_dir);

  io::Frame ref;
  double sum_q = 0, sum_ssim = 0, sum_bpp = 0;
  int p_frames = 0;
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const io::PaddedFrame cur = io::pad_to_multiple(frames[t], kPadMultiple);
    res.padded_width = cur.frame.width();
    res.padded_height = cur.frame.height();
    FrameRecord r;
    r.frame = static_cast<int>(t);
    r.gop = r.frame / cfg.gop;
    r.intra = r.frame % cfg.gop == 0;
    io::Frame recon;
    if (r.intra) {
      recon = cur.frame;
    } else {
      const sme::GatedFlow g = sme::gated_flow(cur.frame, ref, search, estimator, cfg.sme_parallel);
      r.flow_magnitude = g.magnitude;
      r.scale = g.search ? g.search->best_scale : 1.0;
      recon = predict(ref, g.flow, model, cfg.tsmc_enabled, r.bits);
      r.warp_psnr = metrics::psnr(io::crop(flow::warp(ref, g.flow), res.width, res.height), frames[t]);
    }
    const io::Frame shown = io::crop(recon, res.width, res.height);
    r.psnr = metrics::psnr(shown, frames[t]);
    r.ms_ssim = metrics::ms_ssim(shown, frames[t]);
    r.bpp = r.bits / pixels;
    if (!r.intra) {
      sum_q += r.psnr;
      sum_ssim += r.ms_ssim;
      sum_bpp += r.bpp;
      ++p_frames;
    }
    if (!recon_dir.empty()) io::write_png((fs::path(recon_dir) / fmt::format("{:04d}.png", t)).string(), shown);
    res.rows.push_back(r);
    ref = std::move(recon);
  }
  res.rd.label = src.name;
  if (p_frames > 0) {
    res.rd.bpp = sum_bpp / p_frames;
    res.rd.quality = (cfg.metric == Metric::kPsnr ? sum_q : sum_ssim) / p_frames;
  }
  return res;
}

namespace {

constexpr const char* kFrameHeader = "frame_idx,gop,intra,bits,bpp,psnr,ms_ssim,warp_psnr,scale,flow_magnitude";
constexpr const char* kRdHeader = "label,bpp,quality";

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double cell_number(const std::string& path, int line, const std::string& s) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size())
    throw io::DataError(fmt::format("{}:{}: '{}' is not a number", path, line, s));
  return v;
}

std::vector<std::vector<std::string>> read_rows(const std::string& path, const std::string& header,
                                                std::size_t columns) {
  std::ifstream in(path);
  if (!in) throw io::DataError(fmt::format("cannot open '{}'", path));
  std::string line;
  if (!std::getline(in, line) || line != header)
    throw io::DataError(fmt::format("{}:1: expected header '{}'", path, header));
  std::vector<std::vector<std::string>> rows;
  int n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    auto cells = split_csv(line);
    if (cells.size() != columns)
      throw io::DataError(fmt::format("{}:{}: expected {} fields, found {}", path, n, columns, cells.size()));
    cells.push_back(std::to_string(n));
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace

void write_frame_csv(const std::string& path, const std::vector<FrameRecord>& rows) {
  std::ofstream o(path);
  if (!o) throw io::DataError(fmt::format("cannot write '{}'", path));
  o << kFrameHeader << "\n";
  for (const auto& r : rows)
    o << fmt::format("{},{},{},{:.6f},{:.9f},{:.6f},{:.6f},{:.6f},{},{:.6f}\n", r.frame, r.gop, r.intra ? 1 : 0,
                     r.bits, r.bpp, r.psnr, r.ms_ssim, r.warp_psnr, r.scale, r.flow_magnitude);
}

std::vector<FrameRecord> read_frame_csv(const std::string& path) {
  std::vector<FrameRecord> out;
  for (const auto& c : read_rows(path, kFrameHeader, 10)) {
    const int line = std::stoi(c[10]);
    auto num = [&](int i) { return cell_number(path, line, c[i]); };
    FrameRecord r;
    r.frame = static_cast<int>(num(0));
    r.gop = static_cast<int>(num(1));
    if (c[2] != "0" && c[2] != "1") throw io::DataError(fmt::format("{}:{}: intra flag must be 0 or 1", path, line));
    r.intra = c[2] == "1";
    r.bits = num(3);
    r.bpp = num(4);
    r.psnr = num(5);
    r.ms_ssim = num(6);
    r.warp_psnr = num(7);
    r.scale = num(8);
    r.flow_magnitude = num(9);
    out.push_back(r);
  }
  return out;
}

void write_rd_csv(const std::string& path, const std::vector<metrics::RDPoint>& points) {
  std::ofstream o(path);
  if (!o) throw io::DataError(fmt::format("cannot write '{}'", path));
  o << kRdHeader << "\n";
  for (const auto& p : points) o << fmt::format("{},{:.9f},{:.6f}\n", p.label, p.bpp, p.quality);
}

std::vector<metrics::RDPoint> read_rd_csv(const std::string& path) {
  std::vector<metrics::RDPoint> out;
  for (const auto& c : read_rows(path, kRdHeader, 3)) {
    const int line = std::stoi(c[3]);
    out.push_back({cell_number(path, line, c[1]), cell_number(path, line, c[2]), c[0]});
  }
  return out;
}

std::vector<metrics::RDCurve> group_curves(const std::vector<metrics::RDPoint>& points) {
  std::vector<metrics::RDCurve> curves;
  for (const auto& p : points) {
    auto it = std::find_if(curves.begin(), curves.end(), [&](const auto& c) { return c.label == p.label; });
    if (it == curves.end()) {
      curves.push_back({p.label, {}});
      it = curves.end() - 1;
    }
    it->points.push_back(p);
  }
  return curves;
}

std::vector<AblationEntry> ablation_matrix() {
  return {{"Ma", false, false, false}, {"Mb", true, false, false}, {"Mc", false, true, false},
          {"Md", false, false, true},  {"Me", true, true, false},  {"Mf", true, true, true}};
}

std::vector<AblationRow> run_ablation(const ExperimentConfig& cfg, const std::string& out_dir) {
  std::vector<AblationRow> rows;
  for (const auto& e : ablation_matrix()) {
    ExperimentConfig c = cfg;
    c.tsmc_enabled = e.tsmc;
    c.mrqa_finetune = e.mrqa;
    c.sme_enabled = e.sme;
    c.output_dir = (fs::path(out_dir) / e.name).string();
    fs::create_directories(c.output_dir);
    ToyModel model;
    train_toy(c, &model);
    AblationRow row;
    row.entry = e;
    for (std::size_t i = 0; i < c.sequences.size(); ++i) {
      SequenceResult r = evaluate_sequence(c, model, i);
      const std::string csv = (fs::path(c.output_dir) / fmt::format("{}.csv", r.label)).string();
      write_frame_csv(csv, r.rows);
      if (i == 0) row.csv = csv;
      double q = 0, s = 0, w = 0;
      int n = 0;
      for (const auto& f : r.rows)
        if (!f.intra) {
          q += f.psnr;
          s += f.ms_ssim;
          w += f.warp_psnr;
          ++n;
        }
      if (n > 0) {
        row.psnr += q / n;
        row.ms_ssim += s / n;
        row.warp_psnr += w / n;
      }
      row.bpp += r.rd.bpp;
      row.sequences.push_back(std::move(r));
    }
    const double k = static_cast<double>(c.sequences.size());
    row.psnr /= k;
    row.ms_ssim /= k;
    row.warp_psnr /= k;
    row.bpp /= k;
    rows.push_back(std::move(row));
  }
  std::vector<const AblationRow*> order;
  for (const auto& r : rows) order.push_back(&r);
  const bool by_psnr = cfg.metric == Metric::kPsnr;
  std::stable_sort(order.begin(), order.end(), [&](const AblationRow* a, const AblationRow* b) {
    return by_psnr ? a->psnr > b->psnr : a->ms_ssim > b->ms_ssim;
  });
  std::ofstream o(fs::path(out_dir) / "ablation.csv");
  o << "rank,config,tsmc,mrqa,sme,bpp,psnr,ms_ssim,warp_psnr,csv\n";
  for (std::size_t i = 0; i < order.size(); ++i) {
    const AblationRow& r = *order[i];
    o << fmt::format("{},{},{},{},{},{:.9f},{:.6f},{:.6f},{:.6f},{}\n", i + 1, r.entry.name, int(r.entry.tsmc),
                     int(r.entry.mrqa), int(r.entry.sme), r.bpp, r.psnr, r.ms_ssim, r.warp_psnr,
                     fs::relative(r.csv, out_dir).string());
  }
  return rows;
}

}  // namespace fga::harness
