#pragma once

// Differentiable primitives. Each records its forward value on the tape and
// registers the exact gradient. Shapes are checked eagerly and reported as
// ShapeError.

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "duat/kernels.hpp"
#include "duat/tape.hpp"

namespace duat {

/// Immutable CSR structure shared between a forward pass and its backward.
struct SparseRows {
  std::vector<std::size_t> offsets{0};
  std::vector<std::uint32_t> cols;
  std::size_t num_cols = 0;

  std::size_t rows() const { return offsets.size() - 1; }
  std::size_t nnz() const { return cols.size(); }
  kernels::CsrView view() const { return {offsets, cols}; }
};

using IndexList = std::shared_ptr<const std::vector<std::uint32_t>>;
using OffsetList = std::shared_ptr<const std::vector<std::size_t>>;

namespace ops {

/// [n,k] x [k,m]
Var matmul(Tape& t, Var a, Var b);
/// x[n,k] W[k,m] + b[m]
Var affine(Tape& t, Var x, Var w, Var b);
Var add(Tape& t, Var a, Var b);
Var scale(Tape& t, Var a, double s);
/// Concatenates 2-D tensors with equal row counts along the last axis.
Var concat_cols(Tape& t, std::span<const Var> parts);
Var leaky_relu(Tape& t, Var x, double negative_slope);
Var elu(Tape& t, Var x);
/// Row-wise softmax of a 2-D tensor.
Var softmax_rows(Tape& t, Var x);
/// Softmax of a 1-D tensor restricted to `index_set`; other entries are 0.
Var masked_softmax(Tape& t, Var x, std::span<const std::size_t> index_set);
/// Softmax within each segment of a 1-D tensor (one index set per segment).
Var segment_softmax(Tape& t, Var x, OffsetList segments);
/// Inverted dropout. Identity (same Var) when !train or rate == 0.
Var dropout(Tape& t, Var x, double rate, bool train, std::uint64_t seed);
/// sum_i coeffs[i] * xs[i]; coefficients are constants.
Var weighted_sum(Tape& t, std::span<const Var> xs, std::span<const double> coeffs);
/// Summed cross-entropy of rows[i] against targets[i], computed from logits
/// with log-sum-exp. Throws std::invalid_argument on an empty row set.
Var cross_entropy(Tape& t, Var logits, std::span<const std::size_t> rows,
                  std::span<const std::size_t> targets);
/// lambda * sum of squares of every listed parameter value.
Var l2_penalty(Tape& t, std::span<const Var> params, double lambda);
/// X W for a sparse X whose nonzero values are the 1-D tensor `values`.
Var sparse_matmul(Tape& t, std::shared_ptr<const SparseRows> x, Var values, Var w);
/// s[i] = a^T [h[left[i]] || h[right[i]]] for h [N,d] and a [2d].
Var pair_scores(Tape& t, Var h, Var a, IndexList left, IndexList right);
/// out[s,:] = sum over slots i of segment s of weights[i] * h[idx[i],:].
Var segment_weighted_sum(Tape& t, Var weights, Var h, IndexList idx, OffsetList segments);

}  // namespace ops

}  // namespace duat
