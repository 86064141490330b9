#include "duat/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace duat::ops {

namespace {

void expect_rank(const Tensor& t, std::size_t rank, const char* op, const char* arg) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(op) + ": " + arg + " must have rank " + std::to_string(rank) + ", got " +
                     shape_string(t.shape));
  }
}

bool any_grad(const Tape& t, std::initializer_list<Var> vs) {
  return std::any_of(vs.begin(), vs.end(), [&](Var v) { return t.requires_grad(v); });
}

}  // namespace

Var matmul(Tape& t, Var a, Var b) {
  const Tensor& av = t.value(a);
  const Tensor& bv = t.value(b);
  expect_rank(av, 2, "matmul", "a");
  expect_rank(bv, 2, "matmul", "b");
  const std::size_t n = av.shape[0], k = av.shape[1], m = bv.shape[1];
  if (bv.shape[0] != k) {
    throw ShapeError("matmul: inner dimensions differ: " + shape_string(av.shape) + " x " + shape_string(bv.shape));
  }
  Tensor out(Shape{n, m});
  kernels::matmul(av.data, bv.data, out.data, n, k, m);
  return t.record("matmul", std::move(out), any_grad(t, {a, b}), [a, b, n, k, m](Tape& t, Var, const Tensor& g) {
    if (t.requires_grad(a)) kernels::matmul_grad_a(g.data, t.value(b).data, t.grad_buffer(a), n, k, m);
    if (t.requires_grad(b)) kernels::matmul_grad_b(t.value(a).data, g.data, t.grad_buffer(b), n, k, m);
  });
}

Var affine(Tape& t, Var x, Var w, Var b) {
  const Tensor& bv = t.value(b);
  const Tensor& wv = t.value(w);
  expect_rank(bv, 1, "affine", "b");
  if (wv.rank() != 2 || bv.shape[0] != wv.shape[1]) {
    throw ShapeError("affine: bias " + shape_string(bv.shape) + " does not match weight " + shape_string(wv.shape));
  }
  Var xw = matmul(t, x, w);
  Tensor out = t.value(xw);
  const std::size_t m = bv.shape[0];
  for (std::size_t i = 0; i < out.rows(); ++i) {
    for (std::size_t j = 0; j < m; ++j) out.data[i * m + j] += bv.data[j];
  }
  return t.record("affine", std::move(out), any_grad(t, {xw, b}), [xw, b, m](Tape& t, Var, const Tensor& g) {
    if (t.requires_grad(xw)) {
      auto dxw = t.grad_buffer(xw);
      for (std::size_t i = 0; i < g.size(); ++i) dxw[i] += g.data[i];
    }
    if (t.requires_grad(b)) {
      auto db = t.grad_buffer(b);
      for (std::size_t i = 0; i < g.size(); ++i) db[i % m] += g.data[i];
    }
  });
}

Var add(Tape& t, Var a, Var b) {
  const Tensor& av = t.value(a);
  const Tensor& bv = t.value(b);
  if (av.shape != bv.shape) {
    throw ShapeError("add: shapes differ: " + shape_string(av.shape) + " vs " + shape_string(bv.shape));
  }
  Tensor out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += bv.data[i];
  return t.record("add", std::move(out), any_grad(t, {a, b}), [a, b](Tape& t, Var, const Tensor& g) {
    for (Var v : {a, b}) {
      if (!t.requires_grad(v)) continue;
      auto d = t.grad_buffer(v);
      for (std::size_t i = 0; i < g.size(); ++i) d[i] += g.data[i];
    }
  });
}

Var scale(Tape& t, Var a, double s) {
  Tensor out = t.value(a);
  for (double& v : out.data) v *= s;
  return t.record("scale", std::move(out), t.requires_grad(a), [a, s](Tape& t, Var, const Tensor& g) {
    auto d = t.grad_buffer(a);
    for (std::size_t i = 0; i < g.size(); ++i) d[i] += s * g.data[i];
  });
}

Var concat_cols(Tape& t, std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const std::size_t n = t.value(parts[0]).rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  bool needs = false;
  for (Var p : parts) {
    const Tensor& v = t.value(p);
    expect_rank(v, 2, "concat_cols", "part");
    if (v.shape[0] != n) throw ShapeError("concat_cols: row counts differ");
    widths.push_back(v.shape[1]);
    total += v.shape[1];
    needs = needs || t.requires_grad(p);
  }
  Tensor out(Shape{n, total});
  std::size_t col = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const Tensor& v = t.value(parts[p]);
    for (std::size_t i = 0; i < n; ++i) {
      std::copy_n(v.data.begin() + static_cast<std::ptrdiff_t>(i * widths[p]), widths[p],
                  out.data.begin() + static_cast<std::ptrdiff_t>(i * total + col));
    }
    col += widths[p];
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return t.record("concat_cols", std::move(out), needs,
                  [inputs, widths, n, total](Tape& t, Var, const Tensor& g) {
                    std::size_t col = 0;
                    for (std::size_t p = 0; p < inputs.size(); ++p) {
                      if (t.requires_grad(inputs[p])) {
                        auto d = t.grad_buffer(inputs[p]);
                        for (std::size_t i = 0; i < n; ++i) {
                          for (std::size_t j = 0; j < widths[p]; ++j) d[i * widths[p] + j] += g.data[i * total + col + j];
                        }
                      }
                      col += widths[p];
                    }
                  });
}

Var leaky_relu(Tape& t, Var x, double slope) {
  Tensor out = t.value(x);
  for (double& v : out.data) v = v >= 0.0 ? v : slope * v;
  return t.record("leaky_relu", std::move(out), t.requires_grad(x), [x, slope](Tape& t, Var, const Tensor& g) {
    const Tensor& in = t.value(x);
    auto d = t.grad_buffer(x);
    for (std::size_t i = 0; i < g.size(); ++i) d[i] += (in.data[i] >= 0.0 ? 1.0 : slope) * g.data[i];
  });
}

Var elu(Tape& t, Var x) {
  Tensor out = t.value(x);
  for (double& v : out.data) v = v >= 0.0 ? v : std::expm1(v);
  return t.record("elu", std::move(out), t.requires_grad(x), [x](Tape& t, Var self, const Tensor& g) {
    const Tensor& in = t.value(x);
    const Tensor& y = t.value(self);
    auto d = t.grad_buffer(x);
    // d/dx (e^x - 1) = y + 1 on the negative branch.
    for (std::size_t i = 0; i < g.size(); ++i) d[i] += (in.data[i] >= 0.0 ? 1.0 : y.data[i] + 1.0) * g.data[i];
  });
}

Var softmax_rows(Tape& t, Var x) {
  const Tensor& in = t.value(x);
  expect_rank(in, 2, "softmax_rows", "x");
  const std::size_t n = in.shape[0], m = in.shape[1];
  auto offsets = std::make_shared<std::vector<std::size_t>>(n + 1);
  for (std::size_t i = 0; i <= n; ++i) (*offsets)[i] = i * m;
  Tensor out(in.shape);
  kernels::segment_softmax(in.data, *offsets, out.data);
  return t.record("softmax_rows", std::move(out), t.requires_grad(x), [x, offsets](Tape& t, Var self, const Tensor& g) {
    kernels::segment_softmax_grad(t.value(self).data, g.data, *offsets, t.grad_buffer(x));
  });
}

Var masked_softmax(Tape& t, Var x, std::span<const std::size_t> index_set) {
  const Tensor& in = t.value(x);
  expect_rank(in, 1, "masked_softmax", "x");
  if (index_set.empty()) throw ShapeError("masked_softmax: empty index set");
  std::vector<std::size_t> idx(index_set.begin(), index_set.end());
  double mx = -std::numeric_limits<double>::infinity();
  for (auto i : idx) {
    if (i >= in.size()) throw ShapeError("masked_softmax: index out of range");
    mx = std::max(mx, in.data[i]);
  }
  Tensor out(in.shape);
  double z = 0.0;
  for (auto i : idx) z += (out.data[i] = std::exp(in.data[i] - mx));
  for (auto i : idx) out.data[i] /= z;
  return t.record("masked_softmax", std::move(out), t.requires_grad(x), [x, idx](Tape& t, Var self, const Tensor& g) {
    const Tensor& y = t.value(self);
    auto d = t.grad_buffer(x);
    double dot = 0.0;
    for (auto i : idx) dot += g.data[i] * y.data[i];
    for (auto i : idx) d[i] += y.data[i] * (g.data[i] - dot);
  });
}

Var segment_softmax(Tape& t, Var x, OffsetList segments) {
  const Tensor& in = t.value(x);
  expect_rank(in, 1, "segment_softmax", "x");
  if (segments->empty() || segments->front() != 0 || segments->back() != in.size()) {
    throw ShapeError("segment_softmax: segments do not cover the input");
  }
  Tensor out(in.shape);
  kernels::segment_softmax(in.data, *segments, out.data);
  return t.record("segment_softmax", std::move(out), t.requires_grad(x),
                  [x, segments](Tape& t, Var self, const Tensor& g) {
                    kernels::segment_softmax_grad(t.value(self).data, g.data, *segments, t.grad_buffer(x));
                  });
}

Var dropout(Tape& t, Var x, double rate, bool train, std::uint64_t seed) {
  if (rate < 0.0 || rate >= 1.0) throw std::invalid_argument("dropout rate must be in [0, 1)");
  if (!train || rate == 0.0) return x;
  const Tensor& in = t.value(x);
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution keep(1.0 - rate);
  const double s = 1.0 / (1.0 - rate);
  std::vector<double> mask(in.size());
  for (double& m : mask) m = keep(rng) ? s : 0.0;
  Tensor out = in;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] *= mask[i];
  return t.record("dropout", std::move(out), t.requires_grad(x),
                  [x, mask = std::move(mask)](Tape& t, Var, const Tensor& g) {
                    auto d = t.grad_buffer(x);
                    for (std::size_t i = 0; i < g.size(); ++i) d[i] += mask[i] * g.data[i];
                  });
}

Var weighted_sum(Tape& t, std::span<const Var> xs, std::span<const double> coeffs) {
  if (xs.empty() || xs.size() != coeffs.size()) {
    throw ShapeError("weighted_sum: need one coefficient per input");
  }
  Tensor out(t.value(xs[0]).shape);
  bool needs = false;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const Tensor& v = t.value(xs[k]);
    if (v.shape != out.shape) throw ShapeError("weighted_sum: input shapes differ");
    for (std::size_t i = 0; i < v.size(); ++i) out.data[i] += coeffs[k] * v.data[i];
    needs = needs || t.requires_grad(xs[k]);
  }
  std::vector<Var> inputs(xs.begin(), xs.end());
  std::vector<double> c(coeffs.begin(), coeffs.end());
  return t.record("weighted_sum", std::move(out), needs, [inputs, c](Tape& t, Var, const Tensor& g) {
    for (std::size_t k = 0; k < inputs.size(); ++k) {
      if (!t.requires_grad(inputs[k])) continue;
      auto d = t.grad_buffer(inputs[k]);
      for (std::size_t i = 0; i < g.size(); ++i) d[i] += c[k] * g.data[i];
    }
  });
}

Var cross_entropy(Tape& t, Var logits, std::span<const std::size_t> rows, std::span<const std::size_t> targets) {
  const Tensor& z = t.value(logits);
  expect_rank(z, 2, "cross_entropy", "logits");
  if (rows.empty()) throw std::invalid_argument("cross_entropy: empty labeled row set");
  if (rows.size() != targets.size()) throw ShapeError("cross_entropy: one target per row required");
  const std::size_t f = z.shape[1];
  std::vector<std::size_t> r(rows.begin(), rows.end());
  std::vector<std::size_t> y(targets.begin(), targets.end());
  // Softmax of each selected row, kept for the gradient.
  std::vector<double> probs(r.size() * f);
  double loss = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i] >= z.shape[0] || y[i] >= f) throw ShapeError("cross_entropy: row or target out of range");
    const double* row = z.data.data() + r[i] * f;
    const double mx = *std::max_element(row, row + f);
    double sum = 0.0;
    for (std::size_t j = 0; j < f; ++j) sum += (probs[i * f + j] = std::exp(row[j] - mx));
    for (std::size_t j = 0; j < f; ++j) probs[i * f + j] /= sum;
    loss += (mx + std::log(sum)) - row[y[i]];
  }
  return t.record("cross_entropy", Tensor::scalar(loss), t.requires_grad(logits),
                  [logits, r, y, f, probs = std::move(probs)](Tape& t, Var, const Tensor& g) {
                    auto d = t.grad_buffer(logits);
                    const double s = g.data[0];
                    for (std::size_t i = 0; i < r.size(); ++i) {
                      for (std::size_t j = 0; j < f; ++j) {
                        d[r[i] * f + j] += s * (probs[i * f + j] - (j == y[i] ? 1.0 : 0.0));
                      }
                    }
                  });
}

Var l2_penalty(Tape& t, std::span<const Var> params, double lambda) {
  double acc = 0.0;
  bool needs = false;
  for (Var p : params) {
    for (double v : t.value(p).data) acc += v * v;
    needs = needs || t.requires_grad(p);
  }
  std::vector<Var> inputs(params.begin(), params.end());
  return t.record("l2_penalty", Tensor::scalar(lambda * acc), needs, [inputs, lambda](Tape& t, Var, const Tensor& g) {
    for (Var p : inputs) {
      if (!t.requires_grad(p)) continue;
      const Tensor& v = t.value(p);
      auto d = t.grad_buffer(p);
      for (std::size_t i = 0; i < v.size(); ++i) d[i] += 2.0 * lambda * v.data[i] * g.data[0];
    }
  });
}

Var sparse_matmul(Tape& t, std::shared_ptr<const SparseRows> x, Var values, Var w) {
  const Tensor& vals = t.value(values);
  const Tensor& wv = t.value(w);
  expect_rank(vals, 1, "sparse_matmul", "values");
  expect_rank(wv, 2, "sparse_matmul", "w");
  if (vals.size() != x->nnz()) throw ShapeError("sparse_matmul: value count does not match structure");
  if (wv.shape[0] != x->num_cols) {
    throw ShapeError("sparse_matmul: feature dimension " + std::to_string(x->num_cols) + " != weight rows " +
                     std::to_string(wv.shape[0]));
  }
  const std::size_t m = wv.shape[1];
  Tensor out(Shape{x->rows(), m});
  kernels::spmm(x->view(), vals.data, wv.data, out.data, m);
  return t.record("sparse_matmul", std::move(out), any_grad(t, {values, w}),
                  [x, values, w, m](Tape& t, Var, const Tensor& g) {
                    if (t.requires_grad(w)) {
                      auto dw = t.grad_buffer_rows(w, x->cols);
                      kernels::spmm_grad_w(x->view(), t.value(values).data, g.data, dw, m);
                    }
                    if (t.requires_grad(values)) {
                      kernels::spmm_grad_values(x->view(), g.data, t.value(w).data, t.grad_buffer(values), m);
                    }
                  });
}

Var pair_scores(Tape& t, Var h, Var a, IndexList left, IndexList right) {
  const Tensor& hv = t.value(h);
  const Tensor& av = t.value(a);
  expect_rank(hv, 2, "pair_scores", "h");
  expect_rank(av, 1, "pair_scores", "a");
  const std::size_t d = hv.shape[1];
  if (av.size() != 2 * d) throw ShapeError("pair_scores: attention vector must have length 2d");
  if (left->size() != right->size()) throw ShapeError("pair_scores: index lists differ in length");
  for (const auto* list : {left.get(), right.get()}) {
    for (auto i : *list) {
      if (i >= hv.shape[0]) throw ShapeError("pair_scores: index out of range");
    }
  }
  Tensor out(Shape{left->size()});
  kernels::pair_scores(hv.data, av.data, *left, *right, out.data, d);
  return t.record("pair_scores", std::move(out), any_grad(t, {h, a}), [h, a, left, right, d](Tape& t, Var, const Tensor& g) {
    std::span<double> dh, da;
    if (t.requires_grad(h)) dh = t.grad_buffer(h);
    if (t.requires_grad(a)) da = t.grad_buffer(a);
    kernels::pair_scores_grad(t.value(h).data, t.value(a).data, *left, *right, g.data, dh, da, d);
  });
}

Var segment_weighted_sum(Tape& t, Var weights, Var h, IndexList idx, OffsetList segments) {
  const Tensor& wv = t.value(weights);
  const Tensor& hv = t.value(h);
  expect_rank(wv, 1, "segment_weighted_sum", "weights");
  expect_rank(hv, 2, "segment_weighted_sum", "h");
  if (wv.size() != idx->size()) throw ShapeError("segment_weighted_sum: one weight per slot required");
  if (segments->empty() || segments->front() != 0 || segments->back() != idx->size()) {
    throw ShapeError("segment_weighted_sum: segments do not cover the slots");
  }
  for (auto i : *idx) {
    if (i >= hv.shape[0]) throw ShapeError("segment_weighted_sum: index out of range");
  }
  const std::size_t d = hv.shape[1];
  Tensor out(Shape{segments->size() - 1, d});
  kernels::segment_weighted_sum(wv.data, hv.data, *idx, *segments, out.data, d);
  return t.record("segment_weighted_sum", std::move(out), any_grad(t, {weights, h}),
                  [weights, h, idx, segments, d](Tape& t, Var, const Tensor& g) {
                    std::span<double> dw, dh;
                    if (t.requires_grad(weights)) dw = t.grad_buffer(weights);
                    if (t.requires_grad(h)) dh = t.grad_buffer(h);
                    kernels::segment_weighted_sum_grad(t.value(weights).data, t.value(h).data, *idx, *segments,
                                                       g.data, dw, dh, d);
                  });
}

}  // namespace duat::ops
