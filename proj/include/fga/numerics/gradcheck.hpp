#pragma once

#include <functional>
#include <vector>

#include "fga/numerics/tensor.hpp"

namespace fga::nn {

/// Function under test: maps the input tensors to a single-element tensor.
using ScalarFn = std::function<Tensor<double>(const std::vector<Tensor<double>>&)>;

struct GradCheckEntry {
  double max_rel_error = 0.0;
  double mean_rel_error = 0.0;
  double max_abs_error = 0.0;
  bool nonfinite = false;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> inputs;

  double max_rel_error() const;
  bool nonfinite() const;
  bool passed(double tolerance) const { return !nonfinite() && max_rel_error() < tolerance; }
};

std::vector<Array<double>> analytic_gradients(const ScalarFn& fn,
                                              const std::vector<Array<double>>& inputs);

/// Central differences, one coordinate at a time.
std::vector<Array<double>> numeric_gradients(const ScalarFn& fn,
                                             const std::vector<Array<double>>& inputs,
                                             double eps);

/// Per-coordinate relative error |a - n| / max(|a|, |n|, floor), where floor is
/// 1e-3 of the largest numeric gradient magnitude of that input (and at least
/// 1e-10). The floor keeps near-zero coordinates from reporting round-off as
/// a relative error of order one.
GradCheckReport compare_gradients(const std::vector<Array<double>>& analytic,
                                  const std::vector<Array<double>>& numeric);

GradCheckReport finite_diff_check(const ScalarFn& fn, const std::vector<Array<double>>& inputs,
                                  double eps = 1e-4);

}  // namespace fga::nn
