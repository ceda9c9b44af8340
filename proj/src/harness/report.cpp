#include "fga/harness/report.hpp"

#include <openssl/opensslv.h>
#include <png.h>

#include <algorithm>
#include <boost/version.hpp>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <json.hpp>

namespace fga::harness {

namespace fs = std::filesystem;

namespace {

constexpr int kW = 640, kH = 420;
constexpr int kLeft = 70, kRight = 150, kTop = 30, kBottom = 50;
constexpr const char* kColours[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (!(hi > lo)) {
      lo -= 0.5;
      hi += 0.5;
    }
    const double m = 0.05 * (hi - lo);
    lo -= m;
    hi += m;
  }
};

struct Canvas {
  Range x, y;
  std::string body;

  double px(double v) const { return kLeft + (v - x.lo) / (x.hi - x.lo) * (kW - kLeft - kRight); }
  double py(double v) const { return kH - kBottom - (v - y.lo) / (y.hi - y.lo) * (kH - kTop - kBottom); }

  void axes(const std::string& xl, const std::string& yl, const std::string& title) {
    body += fmt::format(R"(<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#000"/>)" "\n", kLeft, kTop,
                        kW - kLeft - kRight, kH - kTop - kBottom);
    for (int i = 0; i <= 4; ++i) {
      const double xv = x.lo + (x.hi - x.lo) * i / 4, yv = y.lo + (y.hi - y.lo) * i / 4;
      body += fmt::format(R"(<text x="{:.1f}" y="{}" font-size="11" text-anchor="middle">{:.4g}</text>)" "\n",
                          px(xv), kH - kBottom + 16, xv);
      body += fmt::format(R"(<text x="{}" y="{:.1f}" font-size="11" text-anchor="end">{:.4g}</text>)" "\n",
                          kLeft - 6, py(yv) + 4, yv);
    }
    body += fmt::format(R"(<text x="{}" y="{}" font-size="13" text-anchor="middle">{}</text>)" "\n",
                        (kLeft + kW - kRight) / 2, kH - 12, xl);
    body += fmt::format(
        R"s(<text x="16" y="{}" font-size="13" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>)s" "\n",
        (kTop + kH - kBottom) / 2, (kTop + kH - kBottom) / 2, yl);
    body += fmt::format(R"(<text x="{}" y="18" font-size="14" text-anchor="middle">{}</text>)" "\n", kW / 2, title);
  }

  void series(const std::vector<std::pair<double, double>>& pts, const char* colour) {
    if (pts.size() > 1) {
      std::string d;
      for (const auto& [a, b] : pts) d += fmt::format("{:.2f},{:.2f} ", px(a), py(b));
      d.pop_back();
      body += fmt::format(R"(<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>)" "\n", colour, d);
    }
    for (const auto& [a, b] : pts)
      body += fmt::format(R"(<circle cx="{:.2f}" cy="{:.2f}" r="3" fill="{}"/>)" "\n", px(a), py(b), colour);
  }

  void legend(int i, const std::string& label, const char* colour) {
    const int ly = kTop + 10 + 18 * i;
    body += fmt::format(R"(<g class="legend"><rect x="{}" y="{}" width="12" height="12" fill="{}"/>)", kW - kRight + 12,
                        ly - 10, colour);
    body += fmt::format(R"(<text x="{}" y="{}" font-size="12">{}</text></g>)" "\n", kW - kRight + 30, ly, label);
  }

  std::string svg() const {
    return fmt::format(R"(<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">)"
                       "\n<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n{}</svg>\n",
                       kW, kH, kW, kH, body);
  }
};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

}  // namespace

std::string rd_svg(const std::vector<metrics::RDCurve>& curves, const std::string& quality_label) {
  Canvas c;
  for (const auto& cv : curves)
    for (const auto& p : cv.points) {
      c.x.add(p.bpp);
      c.y.add(p.quality);
    }
  c.x.pad();
  c.y.pad();
  c.axes("bpp", escape(quality_label), "Rate-distortion");
  for (std::size_t i = 0; i < curves.size(); ++i) {
    auto pts = curves[i].points;
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.bpp < b.bpp; });
    std::vector<std::pair<double, double>> xy;
    for (const auto& p : pts) xy.emplace_back(p.bpp, p.quality);
    const char* colour = kColours[i % std::size(kColours)];
    c.series(xy, colour);
    c.legend(static_cast<int>(i), escape(curves[i].label), colour);
  }
  return c.svg();
}

std::string fluctuation_svg(const std::vector<FrameRecord>& rows, const std::string& title) {
  Canvas c;
  std::vector<std::vector<std::pair<double, double>>> gops;
  int first = 0;
  for (const auto& r : rows) {
    if (gops.empty() || r.gop != rows[first].gop) {
      gops.emplace_back();
      first = static_cast<int>(&r - rows.data());
    }
    const double pos = r.frame - rows[first].frame;
    gops.back().emplace_back(pos, r.psnr);
    c.x.add(pos);
    c.y.add(r.psnr);
  }
  c.x.pad();
  c.y.pad();
  c.axes("frame in GOP", "PSNR (dB)", escape(title));
  for (std::size_t g = 0; g < gops.size(); ++g) {
    const char* colour = kColours[g % std::size(kColours)];
    c.series(gops[g], colour);
    c.legend(static_cast<int>(g), fmt::format("GOP {}", rows.empty() ? 0 : g), colour);
  }
  return c.svg();
}

std::vector<std::string> emit_plots(const std::vector<std::string>& csvs, const std::string& out_dir) {
  fs::create_directories(out_dir);
  std::vector<std::string> written;
  std::vector<metrics::RDPoint> rd;
  for (const auto& path : csvs) {
    std::ifstream in(path);
    if (!in) throw io::DataError(fmt::format("cannot open '{}'", path));
    std::string header;
    std::getline(in, header);
    const std::string stem = fs::path(path).stem().string();
    if (header.rfind("label,", 0) == 0) {
      auto pts = read_rd_csv(path);
      rd.insert(rd.end(), pts.begin(), pts.end());
      continue;
    }
    const auto rows = read_frame_csv(path);
    const std::string out = (fs::path(out_dir) / (stem + "_fluctuation.svg")).string();
    std::ofstream(out) << fluctuation_svg(rows, stem);
    written.push_back(out);
  }
  if (!rd.empty()) {
    const std::string out = (fs::path(out_dir) / "rd.svg").string();
    std::ofstream(out) << rd_svg(group_curves(rd));
    written.push_back(out);
  }
  return written;
}

void write_manifest(const std::string& dir, const ExperimentConfig& cfg, const std::string& command,
                    const std::vector<std::string>& outputs) {
  fs::create_directories(dir);
  nlohmann::ordered_json j;
  j["command"] = command;
  j["config_hash"] = cfg.hash();
  j["seed"] = cfg.seed;
  j["config"] = cfg.canonical();
  j["versions"] = {{"fga", "1.0.0"},
                   {"compiler", fmt::format("gcc {}.{}.{}", __GNUC__, __GNUC_MINOR__, __GNUC_PATCHLEVEL__)},
                   {"fmt", FMT_VERSION},
                   {"libpng", PNG_LIBPNG_VER_STRING},
                   {"openssl", OPENSSL_VERSION_TEXT},
                   {"boost", BOOST_LIB_VERSION}};
  j["outputs"] = outputs;
  j["timestamp"] = fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(
                                                              std::chrono::system_clock::now())));
  std::ofstream(fs::path(dir) / "manifest.json") << j.dump(2) << "\n";
}

}  // namespace fga::harness
