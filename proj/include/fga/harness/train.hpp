#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "fga/harness/config.hpp"
#include "fga/numerics/ops.hpp"
#include "fga/tsmc/tsmc.hpp"

namespace fga::harness {

/// Alignment network plus a one-conv head mapping the finest context back
/// to an RGB residual on top of the coarse-warped reference.
struct ToyModel {
  tsmc::FgdParams<float> fgd;
  nn::ConvSpec<float> head;  // C1 -> 3, zero at init

  static ToyModel init(const tsmc::TsmcConfig& cfg);
  void save(const std::string& path) const;  // path and path + ".head"
  /// Layout must match the model's config.
  void load(const std::string& path);
};

struct TrainReport {
  std::vector<double> loss;  // one per step
  std::vector<std::string> phase;
  double coarse_mse_init = 0;
  double aligned_mse_init = 0;
  double coarse_mse = 0;   // held-out, after training
  double aligned_mse = 0;
  std::string checkpoint;
  double seconds = 0;

  double ratio() const { return coarse_mse > 0 ? aligned_mse / coarse_mse : 0.0; }
};

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Gradient descent on random-affine synthetic pairs. Saves the checkpoint
/// under cfg.output_dir unless it is empty. Deterministic in (cfg, seed).
TrainReport train_toy(const ExperimentConfig& cfg, ToyModel* trained = nullptr);

struct ToyForward {
  std::array<nn::Tensor<float>, 3> warped;    // coarse warp of each level
  std::array<nn::Tensor<float>, 3> contexts;  // refined contexts, or warped when TSMC is off
  std::vector<nn::Tensor<float>> coarse_offsets;
  nn::Tensor<float> residual;                 // head(contexts[0]), (1, 3, H, W)
};

/// Same computation as tsmc_forward on precomputed reference features,
/// followed by the head.
ToyForward toy_forward(const tsmc::Pyramid<float>& ref_features, const flow::FlowField& flow, const ToyModel& m,
                       bool tsmc_enabled);

struct AlignmentScore {
  double coarse = 0;   // mean over levels of MSE(coarse warp, target features)
  double aligned = 0;  // same for the final contexts
};

/// Held-out score of a model on the evaluation pool train_toy would use.
AlignmentScore alignment_score(const ExperimentConfig& cfg, const ToyModel& m);

/// Sum of |coarse offset| over every level and position.
double offset_bits(const std::vector<nn::Tensor<float>>& coarse_offsets);

}  // namespace fga::harness
