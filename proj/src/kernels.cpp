#include <atomic>

#include "duat/kernels.hpp"

namespace duat::kernels {

namespace {
std::atomic<Backend> g_backend{Backend::parallel};
}

void set_backend(Backend b) { g_backend.store(b, std::memory_order_relaxed); }
Backend backend() { return g_backend.load(std::memory_order_relaxed); }

#define DUAT_DISPATCH(name, ...)                                     \
  if (backend() == Backend::serial) return serial::name(__VA_ARGS__); \
  return parallel::name(__VA_ARGS__)

void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t n,
            std::size_t k, std::size_t m) {
  DUAT_DISPATCH(matmul, a, b, c, n, k, m);
}
void matmul_grad_a(std::span<const double> g, std::span<const double> b, std::span<double> da,
                   std::size_t n, std::size_t k, std::size_t m) {
  DUAT_DISPATCH(matmul_grad_a, g, b, da, n, k, m);
}
void matmul_grad_b(std::span<const double> a, std::span<const double> g, std::span<double> db,
                   std::size_t n, std::size_t k, std::size_t m) {
  DUAT_DISPATCH(matmul_grad_b, a, g, db, n, k, m);
}
void spmm(CsrView x, std::span<const double> values, std::span<const double> w, std::span<double> out,
          std::size_t m) {
  DUAT_DISPATCH(spmm, x, values, w, out, m);
}
void spmm_grad_w(CsrView x, std::span<const double> values, std::span<const double> g,
                 std::span<double> dw, std::size_t m) {
  DUAT_DISPATCH(spmm_grad_w, x, values, g, dw, m);
}
void spmm_grad_values(CsrView x, std::span<const double> g, std::span<const double> w,
                      std::span<double> dvalues, std::size_t m) {
  DUAT_DISPATCH(spmm_grad_values, x, g, w, dvalues, m);
}
void pair_scores(std::span<const double> h, std::span<const double> a, std::span<const std::uint32_t> left,
                 std::span<const std::uint32_t> right, std::span<double> scores, std::size_t d) {
  DUAT_DISPATCH(pair_scores, h, a, left, right, scores, d);
}
void pair_scores_grad(std::span<const double> h, std::span<const double> a,
                      std::span<const std::uint32_t> left, std::span<const std::uint32_t> right,
                      std::span<const double> g, std::span<double> dh, std::span<double> da, std::size_t d) {
  DUAT_DISPATCH(pair_scores_grad, h, a, left, right, g, dh, da, d);
}
void segment_softmax(std::span<const double> x, Segments seg, std::span<double> y) {
  DUAT_DISPATCH(segment_softmax, x, seg, y);
}
void segment_softmax_grad(std::span<const double> y, std::span<const double> g, Segments seg,
                          std::span<double> dx) {
  DUAT_DISPATCH(segment_softmax_grad, y, g, seg, dx);
}
void segment_weighted_sum(std::span<const double> w, std::span<const double> h,
                          std::span<const std::uint32_t> idx, Segments seg, std::span<double> out,
                          std::size_t d) {
  DUAT_DISPATCH(segment_weighted_sum, w, h, idx, seg, out, d);
}
void segment_weighted_sum_grad(std::span<const double> w, std::span<const double> h,
                               std::span<const std::uint32_t> idx, Segments seg, std::span<const double> g,
                               std::span<double> dw, std::span<double> dh, std::size_t d) {
  DUAT_DISPATCH(segment_weighted_sum_grad, w, h, idx, seg, g, dw, dh, d);
}

#undef DUAT_DISPATCH

}  // namespace duat::kernels
