#pragma once

// Dense and segment kernels behind the differentiation primitives.
//
// Every kernel exists twice: `serial::` is the reference loop nest, and
// `parallel::` is the OpenMP version. Parallel kernels split work so that each
// output element is accumulated by one thread in the same order as the serial
// loop, which makes the two bitwise identical. Scatter-style gradients are
// therefore partitioned over feature columns, not over source rows.
//
// All matrices are row-major. "+=" kernels accumulate into their output.

#include <cstddef>
#include <cstdint>
#include <span>

namespace duat::kernels {

/// CSR row structure; values are passed separately so they can carry
/// gradients.
struct CsrView {
  std::span<const std::size_t> offsets;  // rows + 1
  std::span<const std::uint32_t> cols;   // nnz
  std::size_t rows() const { return offsets.empty() ? 0 : offsets.size() - 1; }
};

/// Segment s spans slots [offsets[s], offsets[s+1]).
using Segments = std::span<const std::size_t>;

#define DUAT_KERNEL_DECLS                                                                        \
  /* C[n,m] = A[n,k] B[k,m] */                                                                   \
  void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c,          \
              std::size_t n, std::size_t k, std::size_t m);                                       \
  /* dA[n,k] += G[n,m] B^T */                                                                    \
  void matmul_grad_a(std::span<const double> g, std::span<const double> b, std::span<double> da,   \
                     std::size_t n, std::size_t k, std::size_t m);                                \
  /* dB[k,m] += A^T G */                                                                         \
  void matmul_grad_b(std::span<const double> a, std::span<const double> g, std::span<double> db,   \
                     std::size_t n, std::size_t k, std::size_t m);                                \
  /* out[rows,m] = X W with X sparse */                                                          \
  void spmm(CsrView x, std::span<const double> values, std::span<const double> w,                 \
            std::span<double> out, std::size_t m);                                                \
  void spmm_grad_w(CsrView x, std::span<const double> values, std::span<const double> g,           \
                   std::span<double> dw, std::size_t m);                                          \
  void spmm_grad_values(CsrView x, std::span<const double> g, std::span<const double> w,           \
                        std::span<double> dvalues, std::size_t m);                                \
  /* s[t] = a[:d] . h[left[t]] + a[d:] . h[right[t]] */                                          \
  void pair_scores(std::span<const double> h, std::span<const double> a,                          \
                   std::span<const std::uint32_t> left, std::span<const std::uint32_t> right,      \
                   std::span<double> scores, std::size_t d);                                      \
  void pair_scores_grad(std::span<const double> h, std::span<const double> a,                     \
                        std::span<const std::uint32_t> left, std::span<const std::uint32_t> right, \
                        std::span<const double> g, std::span<double> dh, std::span<double> da,     \
                        std::size_t d);                                                           \
  void segment_softmax(std::span<const double> x, Segments seg, std::span<double> y);            \
  void segment_softmax_grad(std::span<const double> y, std::span<const double> g, Segments seg,   \
                            std::span<double> dx);                                                \
  /* out[s,:] = sum_{t in s} w[t] h[idx[t],:] */                                                 \
  void segment_weighted_sum(std::span<const double> w, std::span<const double> h,                 \
                            std::span<const std::uint32_t> idx, Segments seg,                     \
                            std::span<double> out, std::size_t d);                                \
  void segment_weighted_sum_grad(std::span<const double> w, std::span<const double> h,            \
                                 std::span<const std::uint32_t> idx, Segments seg,                \
                                 std::span<const double> g, std::span<double> dw,                 \
                                 std::span<double> dh, std::size_t d);

namespace serial {
DUAT_KERNEL_DECLS
}
namespace parallel {
DUAT_KERNEL_DECLS
}

enum class Backend { serial, parallel };

/// Process-wide backend used by the dispatching functions below.
void set_backend(Backend b);
Backend backend();

/// Restores the previous backend on destruction.
class BackendScope {
 public:
  explicit BackendScope(Backend b) : previous_(backend()) { set_backend(b); }
  ~BackendScope() { set_backend(previous_); }
  BackendScope(const BackendScope&) = delete;
  BackendScope& operator=(const BackendScope&) = delete;

 private:
  Backend previous_;
};

DUAT_KERNEL_DECLS

#undef DUAT_KERNEL_DECLS

}  // namespace duat::kernels
