#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "duat/graph.hpp"
#include "duat/ops.hpp"

namespace duat {

/// Node feature matrix stored as sparse rows. One-hot identity features hold
/// a single 1 per row, so transforming a node reduces to reading one weight
/// row.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(SparseRows rows, std::vector<double> values);

  static FeatureMatrix identity(std::size_t n);
  static FeatureMatrix dense(const Tensor& matrix);
  /// Text format: first line "<rows> <dim>", then one line of `dim`
  /// whitespace-separated reals per row.
  static FeatureMatrix load_text(const std::string& path);

  std::size_t rows() const { return rows_.rows(); }
  std::size_t dim() const { return rows_.num_cols; }
  bool is_identity() const { return identity_; }

  struct Slice {
    std::shared_ptr<const SparseRows> structure;
    Tensor values;  // 1-D, nnz
  };
  /// Sub-matrix with the rows of `nodes`, in order.
  Slice gather(std::span<const NodeId> nodes) const;

 private:
  SparseRows rows_;
  std::vector<double> values_;
  bool identity_ = false;
};

}  // namespace duat
