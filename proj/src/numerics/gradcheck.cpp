#include "fga/numerics/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace fga::nn {

double GradCheckReport::max_rel_error() const {
  double m = 0.0;
  for (const auto& e : inputs) m = std::max(m, e.max_rel_error);
  return m;
}

bool GradCheckReport::nonfinite() const {
  return std::any_of(inputs.begin(), inputs.end(), [](const auto& e) { return e.nonfinite; });
}

namespace {

double evaluate(const ScalarFn& fn, const std::vector<Array<double>>& inputs) {
  std::vector<Tensor<double>> tensors;
  tensors.reserve(inputs.size());
  for (const auto& a : inputs) tensors.push_back(Tensor<double>::constant(a));
  const auto out = fn(tensors);
  if (out.numel() != 1) throw ShapeError("gradient check: function must return one element");
  return out.value()[0];
}

}  // namespace

std::vector<Array<double>> analytic_gradients(const ScalarFn& fn,
                                              const std::vector<Array<double>>& inputs) {
  std::vector<Tensor<double>> leaves;
  leaves.reserve(inputs.size());
  for (const auto& a : inputs) leaves.push_back(Tensor<double>::parameter(a));
  fn(leaves).backward();
  std::vector<Array<double>> grads;
  grads.reserve(leaves.size());
  for (const auto& l : leaves) grads.push_back(l.grad());
  return grads;
}

std::vector<Array<double>> numeric_gradients(const ScalarFn& fn,
                                             const std::vector<Array<double>>& inputs,
                                             double eps) {
  std::vector<Array<double>> work = inputs;
  std::vector<Array<double>> grads;
  for (std::size_t k = 0; k < work.size(); ++k) {
    Array<double> g(work[k].shape());
    for (std::size_t i = 0; i < work[k].numel(); ++i) {
      const double orig = work[k][i];
      work[k][i] = orig + eps;
      const double up = evaluate(fn, work);
      work[k][i] = orig - eps;
      const double down = evaluate(fn, work);
      work[k][i] = orig;
      g[i] = (up - down) / (2.0 * eps);
    }
    grads.push_back(std::move(g));
  }
  return grads;
}

GradCheckReport compare_gradients(const std::vector<Array<double>>& analytic,
                                  const std::vector<Array<double>>& numeric) {
  GradCheckReport report;
  for (std::size_t k = 0; k < analytic.size(); ++k) {
    require_shape(analytic[k].shape(), numeric.at(k).shape(), "gradient check");
    double scale = 0.0;
    for (double v : numeric[k].values()) scale = std::max(scale, std::abs(v));
    const double floor = std::max(1e-3 * scale, 1e-10);
    GradCheckEntry e;
    double total = 0.0;
    for (std::size_t i = 0; i < analytic[k].numel(); ++i) {
      const double a = analytic[k][i];
      const double n = numeric[k][i];
      if (!std::isfinite(a)) {
        e.nonfinite = true;
        continue;
      }
      const double abs_err = std::abs(a - n);
      const double rel = abs_err / std::max({std::abs(a), std::abs(n), floor});
      e.max_abs_error = std::max(e.max_abs_error, abs_err);
      e.max_rel_error = std::max(e.max_rel_error, rel);
      total += rel;
    }
    if (analytic[k].numel() > 0) e.mean_rel_error = total / static_cast<double>(analytic[k].numel());
    report.inputs.push_back(e);
  }
  return report;
}

GradCheckReport finite_diff_check(const ScalarFn& fn, const std::vector<Array<double>>& inputs,
                                  double eps) {
  return compare_gradients(analytic_gradients(fn, inputs), numeric_gradients(fn, inputs, eps));
}

}  // namespace fga::nn
