#include "duat/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace duat {

namespace {
double evaluate(const LossBuilder& build) {
  Tape tape;
  return tape.value(build(tape)).data.at(0);
}
}  // namespace

std::vector<Tensor> analytic_gradients(ParameterStore& store, const LossBuilder& build) {
  store.zero_grad();
  Tape tape;
  Var loss = build(tape);
  tape.backward(loss);
  std::vector<Tensor> grads;
  grads.reserve(store.size());
  for (std::size_t i = 0; i < store.size(); ++i) grads.push_back(store[i].grad);
  store.zero_grad();
  return grads;
}

GradCheckReport compare_central_differences(ParameterStore& store, const LossBuilder& build,
                                            const std::vector<Tensor>& analytic, double epsilon) {
  if (!(epsilon >= 1e-6 && epsilon <= 1e-3)) throw std::invalid_argument("grad_check epsilon must be in [1e-6, 1e-3]");
  if (analytic.size() != store.size()) throw std::invalid_argument("grad_check: one analytic gradient per parameter");
  GradCheckReport report;
  for (std::size_t p = 0; p < store.size(); ++p) {
    Parameter& param = store[p];
    if (analytic[p].size() != param.value.size()) throw ShapeError("grad_check: gradient shape mismatch");
    for (std::size_t i = 0; i < param.value.size(); ++i) {
      const double original = param.value.data[i];
      param.value.data[i] = original + epsilon;
      const double plus = evaluate(build);
      param.value.data[i] = original - epsilon;
      const double minus = evaluate(build);
      param.value.data[i] = original;

      const double numeric = (plus - minus) / (2.0 * epsilon);
      const double a = analytic[p].data[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      const double rel = std::abs(a - numeric) / denom;
      ++report.checked;
      if (rel > report.max_relative_error) {
        report.max_relative_error = rel;
        report.worst_parameter = param.name();
        report.worst_index = i;
        report.analytic = a;
        report.numeric = numeric;
      }
    }
  }
  return report;
}

GradCheckReport grad_check(ParameterStore& store, const LossBuilder& build, double epsilon) {
  const auto analytic = analytic_gradients(store, build);
  return compare_central_differences(store, build, analytic, epsilon);
}

}  // namespace duat
