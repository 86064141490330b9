#include <algorithm>
#include <stdexcept>

#include "duat/tape.hpp"

namespace duat {

Parameter::Parameter(std::string name, Tensor v)
    : value(std::move(v)), grad(value.shape), name_(std::move(name)) {
  touched_flag_.assign(value.rows(), 0);
}

void Parameter::mark_rows(std::span<const std::uint32_t> rows) {
  if (all_rows_) return;
  for (auto r : rows) {
    if (!touched_flag_[r]) {
      touched_flag_[r] = 1;
      touched_.push_back(r);
    }
  }
}

void Parameter::zero_grad() {
  if (all_rows_) {
    std::fill(grad.data.begin(), grad.data.end(), 0.0);
  } else {
    const std::size_t w = row_width();
    for (auto r : touched_) std::fill_n(grad.data.begin() + static_cast<std::ptrdiff_t>(r * w), w, 0.0);
  }
  for (auto r : touched_) touched_flag_[r] = 0;
  touched_.clear();
  all_rows_ = false;
}

Parameter& ParameterStore::add(std::string name, Tensor value) {
  if (contains(name)) throw std::invalid_argument("duplicate parameter name: " + name);
  params_.push_back(std::make_unique<Parameter>(std::move(name), std::move(value)));
  return *params_.back();
}

Parameter& ParameterStore::get(const std::string& name) {
  for (auto& p : params_) {
    if (p->name() == name) return *p;
  }
  throw std::out_of_range("unknown parameter: " + name);
}

const Parameter& ParameterStore::get(const std::string& name) const {
  return const_cast<ParameterStore*>(this)->get(name);
}

bool ParameterStore::contains(const std::string& name) const {
  return std::any_of(params_.begin(), params_.end(), [&](const auto& p) { return p->name() == name; });
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) p->zero_grad();
}

const Tape::Node& Tape::node(Var v) const {
  if (v.id >= nodes_.size()) throw std::out_of_range("Var does not belong to this tape");
  return nodes_[v.id];
}

Tape::Node& Tape::node(Var v) {
  if (v.id >= nodes_.size()) throw std::out_of_range("Var does not belong to this tape");
  return nodes_[v.id];
}

Var Tape::constant(Tensor value) {
  if (check_finite_ && !value.all_finite()) throw NumericError("non-finite constant input");
  nodes_.push_back(Node{std::move(value), nullptr, false, {}, {}});
  return Var{nodes_.size() - 1};
}

Var Tape::parameter(Parameter& p) {
  if (check_finite_ && !p.value.all_finite()) throw NumericError("non-finite parameter " + p.name());
  nodes_.push_back(Node{{}, &p, true, {}, {}});
  return Var{nodes_.size() - 1};
}

Var Tape::record(const char* op, Tensor value, bool requires_grad, BackwardFn backward) {
  if (check_finite_ && !value.all_finite()) {
    throw NumericError(std::string("non-finite output from ") + op);
  }
  nodes_.push_back(Node{std::move(value), nullptr, requires_grad, {}, requires_grad ? std::move(backward) : nullptr});
  return Var{nodes_.size() - 1};
}

const Tensor& Tape::value(Var v) const {
  const Node& n = node(v);
  return n.param ? n.param->value : n.value;
}

std::span<double> Tape::grad_buffer(Var v) {
  Node& n = node(v);
  if (n.param) {
    n.param->mark_all_rows();
    return n.param->grad.data;
  }
  if (n.grad.data.empty() && !n.value.data.empty()) n.grad = Tensor(n.value.shape);
  return n.grad.data;
}

std::span<double> Tape::grad_buffer_rows(Var v, std::span<const std::uint32_t> rows) {
  Node& n = node(v);
  if (n.param) {
    n.param->mark_rows(rows);
    return n.param->grad.data;
  }
  return grad_buffer(v);
}

const Tensor& Tape::grad(Var v) const {
  const Node& n = node(v);
  return n.param ? n.param->grad : n.grad;
}

void Tape::backward(Var out) {
  if (value(out).size() != 1) {
    throw ShapeError("backward(out) needs a single-value output, got " + shape_string(value(out).shape));
  }
  backward(out, Tensor::scalar(1.0));
}

void Tape::backward(Var out, const Tensor& out_grad) {
  if (nodes_.empty()) throw std::logic_error("backward called before any forward computation");
  if (backward_done_) throw std::logic_error("backward already ran on this tape");
  Node& root = node(out);
  if (out_grad.size() != value(out).size()) throw ShapeError("output gradient shape mismatch");
  backward_done_ = true;
  if (!root.requires_grad) return;
  auto seed = grad_buffer(out);
  for (std::size_t i = 0; i < seed.size(); ++i) seed[i] += out_grad.data[i];

  for (std::size_t i = out.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || !n.backward || n.grad.data.empty()) continue;
    n.backward(*this, Var{i}, n.grad);
  }
}

}  // namespace duat
