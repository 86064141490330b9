#include "duat/features.hpp"

#include <fstream>
#include <sstream>

namespace duat {

FeatureMatrix::FeatureMatrix(SparseRows rows, std::vector<double> values)
    : rows_(std::move(rows)), values_(std::move(values)) {
  if (values_.size() != rows_.nnz()) throw ShapeError("feature values do not match sparse structure");
}

FeatureMatrix FeatureMatrix::identity(std::size_t n) {
  SparseRows rows;
  rows.num_cols = n;
  rows.offsets.resize(n + 1);
  rows.cols.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    rows.offsets[i + 1] = i + 1;
    rows.cols[i] = static_cast<std::uint32_t>(i);
  }
  FeatureMatrix f(std::move(rows), std::vector<double>(n, 1.0));
  f.identity_ = true;
  return f;
}

FeatureMatrix FeatureMatrix::dense(const Tensor& matrix) {
  if (matrix.rank() != 2) throw ShapeError("dense features must be a matrix");
  SparseRows rows;
  const std::size_t n = matrix.shape[0], d = matrix.shape[1];
  rows.num_cols = d;
  rows.offsets.resize(n + 1);
  rows.cols.reserve(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) rows.cols.push_back(static_cast<std::uint32_t>(j));
    rows.offsets[i + 1] = rows.cols.size();
  }
  return FeatureMatrix(std::move(rows), matrix.data);
}

FeatureMatrix FeatureMatrix::load_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open feature file " + path);
  std::size_t n = 0, d = 0;
  if (!(in >> n >> d) || d == 0) throw std::runtime_error("feature file " + path + ": bad header");
  Tensor m(Shape{n, d});
  for (std::size_t i = 0; i < n * d; ++i) {
    if (!(in >> m.data[i])) {
      throw std::runtime_error("feature file " + path + ": expected " + std::to_string(n * d) + " values, read " +
                               std::to_string(i));
    }
  }
  std::string extra;
  if (in >> extra) throw std::runtime_error("feature file " + path + ": trailing data");
  return dense(m);
}

FeatureMatrix::Slice FeatureMatrix::gather(std::span<const NodeId> nodes) const {
  auto sub = std::make_shared<SparseRows>();
  sub->num_cols = rows_.num_cols;
  sub->offsets.reserve(nodes.size() + 1);
  std::vector<double> vals;
  for (NodeId node : nodes) {
    if (node >= rows()) throw std::out_of_range("feature row " + std::to_string(node) + " out of range");
    for (std::size_t e = rows_.offsets[node]; e < rows_.offsets[node + 1]; ++e) {
      sub->cols.push_back(rows_.cols[e]);
      vals.push_back(values_[e]);
    }
    sub->offsets.push_back(sub->cols.size());
  }
  Slice s;
  const std::size_t nnz = vals.size();
  s.values = Tensor(Shape{nnz}, std::move(vals));
  s.structure = std::move(sub);
  return s;
}

}  // namespace duat
