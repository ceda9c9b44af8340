#pragma once

#include <string>
#include <vector>

#include "fga/harness/config.hpp"
#include "fga/harness/train.hpp"
#include "fga/imageio/frame.hpp"
#include "fga/metrics/metrics.hpp"

namespace fga::harness {

inline constexpr int kPadMultiple = 16;

/// One CSV row. `bits` is the offset-magnitude surrogate (sum of |coarse
/// offset|), not an entropy-coded rate; intra rows carry 0.
struct FrameRecord {
  int frame = 0;
  int gop = 0;
  bool intra = false;
  double bits = 0;
  double bpp = 0;  // bits / (original width * height)
  double psnr = 0;
  double ms_ssim = 0;
  double warp_psnr = 0;  // P-frames only
  double scale = 1;
  double flow_magnitude = 0;
};

struct SequenceResult {
  std::string label;
  int width = 0;
  int height = 0;
  int padded_width = 0;
  int padded_height = 0;
  std::vector<FrameRecord> rows;
  metrics::RDPoint rd;  // means over P-frames
  std::vector<std::string> warnings;
};

/// Frames of one configured sequence as RGB, at most `budget` of them.
std::vector<io::Frame> load_sequence(const SequenceSource& src, int budget, std::vector<std::string>* warnings);

/// GOP-structured evaluation of cfg.sequences[index]. Frame 0 of every GOP
/// is a ground-truth copy; each P-frame is predicted from the previous
/// reconstruction. Reconstructions are written as PNG into recon_dir when
/// it is non-empty.
SequenceResult evaluate_sequence(const ExperimentConfig& cfg, const ToyModel& model, std::size_t index = 0,
                                 const std::string& recon_dir = "");

void write_frame_csv(const std::string& path, const std::vector<FrameRecord>& rows);
/// Throws io::DataError naming the line of the first malformed row.
std::vector<FrameRecord> read_frame_csv(const std::string& path);

/// label,bpp,quality
void write_rd_csv(const std::string& path, const std::vector<metrics::RDPoint>& points);
std::vector<metrics::RDPoint> read_rd_csv(const std::string& path);
/// One curve per label, in first-appearance order.
std::vector<metrics::RDCurve> group_curves(const std::vector<metrics::RDPoint>& points);

struct AblationEntry {
  std::string name;  // Ma..Mf
  bool tsmc = false;
  bool mrqa = false;
  bool sme = false;
};

/// The six on/off combinations of the ablation table.
std::vector<AblationEntry> ablation_matrix();

struct AblationRow {
  AblationEntry entry;
  std::vector<SequenceResult> sequences;
  double psnr = 0;  // mean over sequences of the P-frame mean
  double ms_ssim = 0;
  double bpp = 0;
  double warp_psnr = 0;
  std::string csv;  // per-frame CSV of the first sequence
};

/// Trains and evaluates every ablation config under out_dir/<name>/ and
/// writes out_dir/ablation.csv sorted by the configured metric.
std::vector<AblationRow> run_ablation(const ExperimentConfig& cfg, const std::string& out_dir);

}  // namespace fga::harness
