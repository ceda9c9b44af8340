#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fga/flow/flow.hpp"
#include "fga/imageio/synth.hpp"
#include "fga/sme/sme.hpp"
#include "fga/tsmc/tsmc.hpp"

namespace fga::harness {

enum class Metric { kPsnr, kMsSsim };

Metric parse_metric(const std::string& name);
const char* to_string(Metric m);

/// Either a raw I420 file or a generated sequence.
struct SequenceSource {
  std::string name = "synthetic";
  std::string path;  // empty: synthetic
  int width = 64;
  int height = 64;
  double frame_rate = 30.0;
  io::SynthParams synth;
};

struct TrainSettings {
  int steps = 2000;
  int batch = 4;
  double learning_rate = 1e-5;
  int size = 32;               // square training crops
  int pool = 48;               // training sequences
  int eval_pool = 16;          // held-out sequences
  double rate_weight = 0.0;    // weight of mean |coarse offset|
  double motion_fraction = 0.25;
  double context_fraction = 0.5;
  double divergence = 1e3;
  double max_shift = 2.0;      // px per frame
  double max_rotation = 0.05;  // rad per frame
  double max_zoom = 0.03;      // |zoom - 1|
};

struct ExperimentConfig {
  std::string output_dir = "out";
  std::uint64_t seed = 7;
  int gop = 32;
  int frames = 96;
  Metric metric = Metric::kPsnr;
  std::vector<SequenceSource> sequences{SequenceSource{}};

  double lambda = 2048;
  double lambda_max = 2048;
  bool mrqa_finetune = false;

  bool sme_enabled = true;
  sme::ScaleSearchConfig sme = sme::ScaleSearchConfig::standard();
  bool sme_parallel = false;

  bool tsmc_enabled = true;
  tsmc::TsmcConfig tsmc = tsmc::TsmcConfig::toy();

  flow::EstimatorOptions flow;
  TrainSettings train;

  /// Throws std::invalid_argument naming the offending key.
  void validate() const;
  /// Sorted `section.key = value` lines; the basis of the hash.
  std::string canonical() const;
  /// Hex SHA-256 of canonical().
  std::string hash() const;
};

/// INI text: `[section]` headers and `key = value` lines; `;` and `#`
/// comments. Unknown keys are rejected. Sections whose name starts with
/// "sequence" each add one sequence.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

std::string sha256_hex(const std::string& bytes);

}  // namespace fga::harness
