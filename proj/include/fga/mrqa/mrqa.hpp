#pragma once

#include <array>
#include <vector>

namespace fga::mrqa {

inline constexpr std::array<double, 7> kBaseWeights = {1.8, 0.6, 0.8, 0.6, 1.4, 0.6, 0.8};
inline constexpr double kLambdaMaxPsnr = 2048.0;
inline constexpr double kLambdaMaxMsSsim = 64.0;

struct MrqaState {
  std::array<double, 7> base_weights = kBaseWeights;
  double lambda = kLambdaMaxPsnr;
  double lambda_max = kLambdaMaxPsnr;
  double prev_delta_q = 0.0;

  void validate() const;
};

double delta_q(double psnr_t, double psnr_prev);

double sigmoid(double x);

/// base[idx mod 7] * (1 + (lambda/lambda_max) * (sigmoid(dq_prev) - sigmoid(dq_t)))
double modulated_weight(long idx, double dq_t, double dq_prev, const MrqaState& state);

/// Weights for frames 1..N-1 of a PSNR trace. P-frame idx counts from 0 and
/// the first frame uses dq_prev = state.prev_delta_q.
std::vector<double> schedule_rollout(const std::vector<double>& psnr_trace, MrqaState state);

}  // namespace fga::mrqa
