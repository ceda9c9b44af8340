#include "fga/mrqa/mrqa.hpp"

#include <cmath>
#include <stdexcept>

namespace fga::mrqa {

void MrqaState::validate() const {
  if (!(lambda > 0) || !(lambda_max > 0) || lambda > lambda_max)
    throw std::invalid_argument("MRQA needs 0 < lambda <= lambda_max");
  for (double w : base_weights)
    if (!(w >= 0) || !std::isfinite(w)) throw std::invalid_argument("base weights must be finite and >= 0");
}

double delta_q(double psnr_t, double psnr_prev) { return psnr_t - psnr_prev; }

double sigmoid(double x) {
  // both branches stay finite for |x| -> inf
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double modulated_weight(long idx, double dq_t, double dq_prev, const MrqaState& s) {
  if (idx < 0) throw std::invalid_argument("frame index must be >= 0");
  const double base = s.base_weights[static_cast<std::size_t>(idx % 7)];
  return base * (1.0 + (s.lambda / s.lambda_max) * (sigmoid(dq_prev) - sigmoid(dq_t)));
}

std::vector<double> schedule_rollout(const std::vector<double>& trace, MrqaState state) {
  state.validate();
  if (trace.size() < 2) throw std::invalid_argument("rollout needs at least two frames");
  std::vector<double> w;
  w.reserve(trace.size() - 1);
  for (std::size_t t = 1; t < trace.size(); ++t) {
    const double dq = delta_q(trace[t], trace[t - 1]);
    w.push_back(modulated_weight(static_cast<long>(t - 1), dq, state.prev_delta_q, state));
    state.prev_delta_q = dq;
  }
  return w;
}

}  // namespace fga::mrqa
