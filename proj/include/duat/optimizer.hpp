#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "duat/tape.hpp"

namespace duat {

/// Classical momentum: v <- mu v + g; theta <- theta - lr v.
void momentum_step(std::span<double> params, std::span<const double> grads, std::span<double> velocity, double lr,
                   double mu);

/// Momentum SGD over a ParameterStore with optional L2 weight decay folded
/// into the gradient (g + weight_decay * theta).
///
/// In lazy mode rows without a data gradient are not visited each step.
/// Their evolution under pure decay is linear,
///   [v; theta] <- [[mu, wd], [-lr mu, 1 - lr wd]] [v; theta],
/// so a row that went untouched for n steps is brought up to date with the
/// n-th power of that matrix the next time it is touched or on flush(). The
/// result equals the dense update up to rounding.
class MomentumOptimizer {
 public:
  MomentumOptimizer(ParameterStore& store, double lr, double momentum, double weight_decay = 0.0,
                    bool lazy_rows = true);

  /// Applies one update from the accumulated gradients, then zeroes them.
  void step();
  /// Brings every deferred row up to the current step.
  void flush();

  std::uint64_t steps() const { return step_; }
  const Tensor& velocity(std::size_t param_index) const { return velocity_.at(param_index); }

 private:
  using Mat2 = std::array<double, 4>;  // row-major 2x2
  const Mat2& decay_power(std::uint64_t n);
  void catch_up(std::size_t p, std::size_t row);
  void update_row(std::size_t p, std::size_t row);

  ParameterStore& store_;
  double lr_;
  double mu_;
  double wd_;
  bool lazy_;
  std::uint64_t step_ = 0;
  std::vector<Tensor> velocity_;
  std::vector<std::vector<std::uint64_t>> row_step_;
  std::unordered_map<std::uint64_t, Mat2> powers_;
};

}  // namespace duat
