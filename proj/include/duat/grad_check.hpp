#pragma once

#include <functional>
#include <string>
#include <vector>

#include "duat/tape.hpp"

namespace duat {

/// Builds a scalar loss on a fresh tape from the current parameter values.
using LossBuilder = std::function<Var(Tape&)>;

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t checked = 0;
};

/// One forward + backward; returns a copy of every parameter's gradient in
/// store order.
std::vector<Tensor> analytic_gradients(ParameterStore& store, const LossBuilder& build);

/// Compares `analytic` against central differences of `build`, entry by
/// entry: |a - c| / max(|a|, |c|, 1e-8), maximized over all parameters.
/// `epsilon` must lie in [1e-6, 1e-3].
GradCheckReport compare_central_differences(ParameterStore& store, const LossBuilder& build,
                                            const std::vector<Tensor>& analytic, double epsilon);

GradCheckReport grad_check(ParameterStore& store, const LossBuilder& build, double epsilon = 1e-5);

}  // namespace duat
