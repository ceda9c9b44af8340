#pragma once

#include <string>
#include <vector>

#include "fga/harness/config.hpp"
#include "fga/harness/evaluate.hpp"
#include "fga/metrics/metrics.hpp"

namespace fga::harness {

/// Rate-distortion chart, one polyline and legend entry per curve. Curves
/// with a single point get a marker only.
std::string rd_svg(const std::vector<metrics::RDCurve>& curves, const std::string& quality_label = "PSNR (dB)");

/// Per-frame quality with one polyline per GOP, x = position in the GOP.
std::string fluctuation_svg(const std::vector<FrameRecord>& rows, const std::string& title);

/// Reads every CSV (frame or RD schema, told apart by the header) and
/// writes the matching SVGs into out_dir. Returns the written paths.
std::vector<std::string> emit_plots(const std::vector<std::string>& csvs, const std::string& out_dir);

/// manifest.json beside the outputs: config hash and text, seed, command,
/// library versions, outputs and a UTC timestamp.
void write_manifest(const std::string& dir, const ExperimentConfig& cfg, const std::string& command,
                    const std::vector<std::string>& outputs);

}  // namespace fga::harness
