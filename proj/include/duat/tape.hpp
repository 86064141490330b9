#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "duat/tensor.hpp"

namespace duat {

/// A trainable tensor with its gradient buffer.
///
/// Gradients may be accumulated row-sparsely: kernels that only touch a few
/// leading-axis rows (sparse feature transforms) mark those rows instead of
/// the whole tensor, so zeroing and lazy optimizers can skip the rest.
class Parameter {
 public:
  Parameter(std::string name, Tensor value);

  const std::string& name() const { return name_; }
  Tensor value;
  Tensor grad;

  std::size_t rows() const { return value.rows(); }
  std::size_t row_width() const { return value.row_width(); }

  void mark_all_rows() { all_rows_ = true; }
  void mark_rows(std::span<const std::uint32_t> rows);
  bool all_rows_touched() const { return all_rows_; }
  /// Touched rows in first-touch order; meaningless when all_rows_touched().
  const std::vector<std::uint32_t>& touched_rows() const { return touched_; }

  /// Zeroes the gradient (only the touched rows when possible).
  void zero_grad();

 private:
  std::string name_;
  bool all_rows_ = false;
  std::vector<std::uint32_t> touched_;
  std::vector<std::uint8_t> touched_flag_;
};

/// Owning registry of parameters with stable addresses and insertion order.
class ParameterStore {
 public:
  Parameter& add(std::string name, Tensor value);
  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;
  bool contains(const std::string& name) const;

  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;
  Parameter& operator[](std::size_t i) { return *params_[i]; }
  const Parameter& operator[](std::size_t i) const { return *params_[i]; }

  void zero_grad();

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
};

/// Handle to a value recorded on a Tape.
struct Var {
  std::size_t id = static_cast<std::size_t>(-1);
};

/// Ordered record of executed primitives for one forward/backward pass.
///
/// Values are recorded in execution order, so every input precedes its
/// consumers and backward simply walks the record in reverse. Parameter
/// gradients accumulate straight into Parameter::grad.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, Var self, const Tensor& out_grad)>;

  explicit Tape(bool check_finite = true) : check_finite_(check_finite) {}

  Var constant(Tensor value);
  Var parameter(Parameter& p);

  /// Records a primitive's output. Throws NumericError naming `op` when the
  /// value is non-finite and finiteness checks are on.
  Var record(const char* op, Tensor value, bool requires_grad, BackwardFn backward);

  const Tensor& value(Var v) const;
  const Shape& shape(Var v) const { return value(v).shape; }
  bool requires_grad(Var v) const { return node(v).requires_grad; }
  Parameter* parameter_of(Var v) const { return node(v).param; }

  /// Dense gradient accumulator for `v`; parameters get all rows marked.
  std::span<double> grad_buffer(Var v);
  /// Gradient accumulator for `v` where only `rows` will be written.
  std::span<double> grad_buffer_rows(Var v, std::span<const std::uint32_t> rows);

  /// Gradient of the last backward pass w.r.t. a recorded value; empty if the
  /// value received none.
  const Tensor& grad(Var v) const;

  /// Reverse pass seeded with d(out)/d(out) = 1; `out` must hold one value.
  void backward(Var out);
  void backward(Var out, const Tensor& out_grad);

  std::size_t size() const { return nodes_.size(); }
  bool check_finite() const { return check_finite_; }

 private:
  struct Node {
    Tensor value;
    Parameter* param = nullptr;
    bool requires_grad = false;
    Tensor grad;
    BackwardFn backward;
  };
  const Node& node(Var v) const;
  Node& node(Var v);

  std::vector<Node> nodes_;
  bool check_finite_;
  bool backward_done_ = false;
};

}  // namespace duat
