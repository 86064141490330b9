#include "duat/optimizer.hpp"

#include <stdexcept>

namespace duat {

void momentum_step(std::span<double> params, std::span<const double> grads, std::span<double> velocity, double lr,
                   double mu) {
  if (params.size() != grads.size() || params.size() != velocity.size()) {
    throw ShapeError("momentum_step: parameter, gradient and velocity sizes differ");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    velocity[i] = mu * velocity[i] + grads[i];
    params[i] -= lr * velocity[i];
  }
}

MomentumOptimizer::MomentumOptimizer(ParameterStore& store, double lr, double momentum, double weight_decay,
                                     bool lazy_rows)
    : store_(store), lr_(lr), mu_(momentum), wd_(weight_decay), lazy_(lazy_rows) {
  for (std::size_t p = 0; p < store.size(); ++p) {
    velocity_.emplace_back(store[p].value.shape);
    row_step_.emplace_back(store[p].rows(), 0);
  }
}

const MomentumOptimizer::Mat2& MomentumOptimizer::decay_power(std::uint64_t n) {
  auto it = powers_.find(n);
  if (it != powers_.end()) return it->second;
  auto mul = [](const Mat2& a, const Mat2& b) {
    return Mat2{a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2],
                a[2] * b[1] + a[3] * b[3]};
  };
  Mat2 result{1.0, 0.0, 0.0, 1.0};
  Mat2 base{mu_, wd_, -lr_ * mu_, 1.0 - lr_ * wd_};
  for (std::uint64_t e = n; e > 0; e >>= 1) {
    if (e & 1) result = mul(result, base);
    base = mul(base, base);
  }
  return powers_.emplace(n, result).first->second;
}

void MomentumOptimizer::catch_up(std::size_t p, std::size_t row) {
  // row_step_ counts the updates already folded into a row; step_ counts
  // completed optimizer steps.
  auto& last = row_step_[p][row];
  if (last >= step_) return;
  const Mat2& a = decay_power(step_ - last);
  Parameter& param = store_[p];
  const std::size_t w = param.row_width();
  double* theta = param.value.data.data() + row * w;
  double* v = velocity_[p].data.data() + row * w;
  for (std::size_t j = 0; j < w; ++j) {
    const double v0 = v[j], t0 = theta[j];
    v[j] = a[0] * v0 + a[1] * t0;
    theta[j] = a[2] * v0 + a[3] * t0;
  }
  last = step_;
}

void MomentumOptimizer::update_row(std::size_t p, std::size_t row) {
  Parameter& param = store_[p];
  const std::size_t w = param.row_width();
  double* theta = param.value.data.data() + row * w;
  double* v = velocity_[p].data.data() + row * w;
  const double* g = param.grad.data.data() + row * w;
  for (std::size_t j = 0; j < w; ++j) {
    v[j] = mu_ * v[j] + (g[j] + wd_ * theta[j]);
    theta[j] -= lr_ * v[j];
  }
  row_step_[p][row] = step_ + 1;
}

void MomentumOptimizer::step() {
  for (std::size_t p = 0; p < store_.size(); ++p) {
    Parameter& param = store_[p];
    if (!lazy_ || param.all_rows_touched()) {
      for (std::size_t r = 0; r < param.rows(); ++r) {
        catch_up(p, r);
        update_row(p, r);
      }
    } else {
      for (auto r : param.touched_rows()) {
        catch_up(p, r);
        update_row(p, r);
      }
    }
  }
  ++step_;
  store_.zero_grad();
}

void MomentumOptimizer::flush() {
  for (std::size_t p = 0; p < store_.size(); ++p) {
    for (std::size_t r = 0; r < store_[p].rows(); ++r) catch_up(p, r);
  }
}

}  // namespace duat
