#include <omp.h>

#include <algorithm>
#include <cmath>

#include "duat/kernels.hpp"

namespace duat::kernels::parallel {

namespace {

// Below this many multiply-adds the fork/join overhead dominates.
constexpr std::size_t kMinWork = 1 << 14;

struct ColumnRange {
  std::size_t begin;
  std::size_t end;
};

// Contiguous share of [0, d) for the calling thread of the current team.
ColumnRange my_columns(std::size_t d) {
  const auto threads = static_cast<std::size_t>(omp_get_num_threads());
  const auto me = static_cast<std::size_t>(omp_get_thread_num());
  const std::size_t chunk = (d + threads - 1) / threads;
  const std::size_t b = std::min(d, me * chunk);
  return {b, std::min(d, b + chunk)};
}

auto ssize(std::size_t n) { return static_cast<std::ptrdiff_t>(n); }

}  // namespace

void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t n,
            std::size_t k, std::size_t m) {
#pragma omp parallel for schedule(static) if (n * k * m > kMinWork)
  for (std::ptrdiff_t ii = 0; ii < ssize(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    double* row = c.data() + i * m;
    std::fill(row, row + m, 0.0);
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      const double* brow = b.data() + p * m;
      for (std::size_t j = 0; j < m; ++j) row[j] += av * brow[j];
    }
  }
}

void matmul_grad_a(std::span<const double> g, std::span<const double> b, std::span<double> da,
                   std::size_t n, std::size_t k, std::size_t m) {
#pragma omp parallel for schedule(static) if (n * k * m > kMinWork)
  for (std::ptrdiff_t ii = 0; ii < ssize(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    for (std::size_t p = 0; p < k; ++p) {
      double acc = 0.0;
      for (std::size_t j = 0; j < m; ++j) acc += g[i * m + j] * b[p * m + j];
      da[i * k + p] += acc;
    }
  }
}

void matmul_grad_b(std::span<const double> a, std::span<const double> g, std::span<double> db,
                   std::size_t n, std::size_t k, std::size_t m) {
#pragma omp parallel for schedule(static) if (n * k * m > kMinWork)
  for (std::ptrdiff_t pp = 0; pp < ssize(k); ++pp) {
    const auto p = static_cast<std::size_t>(pp);
    double* out = db.data() + p * m;
    for (std::size_t i = 0; i < n; ++i) {
      const double av = a[i * k + p];
      const double* grow = g.data() + i * m;
      for (std::size_t j = 0; j < m; ++j) out[j] += av * grow[j];
    }
  }
}

void spmm(CsrView x, std::span<const double> values, std::span<const double> w, std::span<double> out,
          std::size_t m) {
  const std::size_t rows = x.rows();
#pragma omp parallel for schedule(static) if (x.cols.size() * m > kMinWork)
  for (std::ptrdiff_t rr = 0; rr < ssize(rows); ++rr) {
    const auto r = static_cast<std::size_t>(rr);
    double* row = out.data() + r * m;
    std::fill(row, row + m, 0.0);
    for (std::size_t e = x.offsets[r]; e < x.offsets[r + 1]; ++e) {
      const double v = values[e];
      const double* wrow = w.data() + static_cast<std::size_t>(x.cols[e]) * m;
      for (std::size_t j = 0; j < m; ++j) row[j] += v * wrow[j];
    }
  }
}

void spmm_grad_w(CsrView x, std::span<const double> values, std::span<const double> g,
                 std::span<double> dw, std::size_t m) {
#pragma omp parallel if (x.cols.size() * m > kMinWork)
  {
    const auto [jb, je] = my_columns(m);
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const double* grow = g.data() + r * m;
      for (std::size_t e = x.offsets[r]; e < x.offsets[r + 1]; ++e) {
        const double v = values[e];
        double* out = dw.data() + static_cast<std::size_t>(x.cols[e]) * m;
        for (std::size_t j = jb; j < je; ++j) out[j] += v * grow[j];
      }
    }
  }
}

void spmm_grad_values(CsrView x, std::span<const double> g, std::span<const double> w,
                      std::span<double> dvalues, std::size_t m) {
  const std::size_t rows = x.rows();
#pragma omp parallel for schedule(static) if (x.cols.size() * m > kMinWork)
  for (std::ptrdiff_t rr = 0; rr < ssize(rows); ++rr) {
    const auto r = static_cast<std::size_t>(rr);
    const double* grow = g.data() + r * m;
    for (std::size_t e = x.offsets[r]; e < x.offsets[r + 1]; ++e) {
      const double* wrow = w.data() + static_cast<std::size_t>(x.cols[e]) * m;
      double acc = 0.0;
      for (std::size_t j = 0; j < m; ++j) acc += grow[j] * wrow[j];
      dvalues[e] += acc;
    }
  }
}

void pair_scores(std::span<const double> h, std::span<const double> a, std::span<const std::uint32_t> left,
                 std::span<const std::uint32_t> right, std::span<double> scores, std::size_t d) {
  const std::size_t n = left.size();
#pragma omp parallel for schedule(static) if (n * d > kMinWork)
  for (std::ptrdiff_t tt = 0; tt < ssize(n); ++tt) {
    const auto t = static_cast<std::size_t>(tt);
    const double* hl = h.data() + static_cast<std::size_t>(left[t]) * d;
    const double* hr = h.data() + static_cast<std::size_t>(right[t]) * d;
    double acc = 0.0;
    for (std::size_t j = 0; j < d; ++j) acc += a[j] * hl[j];
    for (std::size_t j = 0; j < d; ++j) acc += a[d + j] * hr[j];
    scores[t] = acc;
  }
}

void pair_scores_grad(std::span<const double> h, std::span<const double> a,
                      std::span<const std::uint32_t> left, std::span<const std::uint32_t> right,
                      std::span<const double> g, std::span<double> dh, std::span<double> da, std::size_t d) {
  // The serial loop touches the left half of every row before the right
  // half; a thread owning column j repeats that order for dh[:, j].
#pragma omp parallel if (left.size() * d > kMinWork)
  {
    const auto [jb, je] = my_columns(d);
    for (std::size_t t = 0; t < left.size(); ++t) {
      const std::size_t l = static_cast<std::size_t>(left[t]) * d;
      const std::size_t r = static_cast<std::size_t>(right[t]) * d;
      const double gt = g[t];
      if (!dh.empty()) {
        for (std::size_t j = jb; j < je; ++j) dh[l + j] += gt * a[j];
        for (std::size_t j = jb; j < je; ++j) dh[r + j] += gt * a[d + j];
      }
      if (!da.empty()) {
        for (std::size_t j = jb; j < je; ++j) da[j] += gt * h[l + j];
        for (std::size_t j = jb; j < je; ++j) da[d + j] += gt * h[r + j];
      }
    }
  }
}

void segment_softmax(std::span<const double> x, Segments seg, std::span<double> y) {
  const std::size_t n = seg.empty() ? 0 : seg.size() - 1;
#pragma omp parallel for schedule(static) if (x.size() > kMinWork)
  for (std::ptrdiff_t ss = 0; ss < ssize(n); ++ss) {
    const auto s = static_cast<std::size_t>(ss);
    const std::size_t b = seg[s], e = seg[s + 1];
    if (b == e) continue;
    double mx = x[b];
    for (std::size_t t = b + 1; t < e; ++t) mx = std::max(mx, x[t]);
    double z = 0.0;
    for (std::size_t t = b; t < e; ++t) {
      y[t] = std::exp(x[t] - mx);
      z += y[t];
    }
    for (std::size_t t = b; t < e; ++t) y[t] /= z;
  }
}

void segment_softmax_grad(std::span<const double> y, std::span<const double> g, Segments seg,
                          std::span<double> dx) {
  const std::size_t n = seg.empty() ? 0 : seg.size() - 1;
#pragma omp parallel for schedule(static) if (y.size() > kMinWork)
  for (std::ptrdiff_t ss = 0; ss < ssize(n); ++ss) {
    const auto s = static_cast<std::size_t>(ss);
    const std::size_t b = seg[s], e = seg[s + 1];
    double dot = 0.0;
    for (std::size_t t = b; t < e; ++t) dot += g[t] * y[t];
    for (std::size_t t = b; t < e; ++t) dx[t] += y[t] * (g[t] - dot);
  }
}

void segment_weighted_sum(std::span<const double> w, std::span<const double> h,
                          std::span<const std::uint32_t> idx, Segments seg, std::span<double> out,
                          std::size_t d) {
  const std::size_t n = seg.empty() ? 0 : seg.size() - 1;
#pragma omp parallel for schedule(static) if (idx.size() * d > kMinWork)
  for (std::ptrdiff_t ss = 0; ss < ssize(n); ++ss) {
    const auto s = static_cast<std::size_t>(ss);
    double* row = out.data() + s * d;
    std::fill(row, row + d, 0.0);
    for (std::size_t t = seg[s]; t < seg[s + 1]; ++t) {
      const double wt = w[t];
      const double* hrow = h.data() + static_cast<std::size_t>(idx[t]) * d;
      for (std::size_t j = 0; j < d; ++j) row[j] += wt * hrow[j];
    }
  }
}

void segment_weighted_sum_grad(std::span<const double> w, std::span<const double> h,
                               std::span<const std::uint32_t> idx, Segments seg, std::span<const double> g,
                               std::span<double> dw, std::span<double> dh, std::size_t d) {
  const std::size_t n = seg.empty() ? 0 : seg.size() - 1;
  const bool big = idx.size() * d > kMinWork;
  if (!dw.empty()) {
#pragma omp parallel for schedule(static) if (big)
    for (std::ptrdiff_t ss = 0; ss < ssize(n); ++ss) {
      const auto s = static_cast<std::size_t>(ss);
      const double* grow = g.data() + s * d;
      for (std::size_t t = seg[s]; t < seg[s + 1]; ++t) {
        const double* hrow = h.data() + static_cast<std::size_t>(idx[t]) * d;
        double acc = 0.0;
        for (std::size_t j = 0; j < d; ++j) acc += grow[j] * hrow[j];
        dw[t] += acc;
      }
    }
  }
  if (!dh.empty()) {
#pragma omp parallel if (big)
    {
      const auto [jb, je] = my_columns(d);
      for (std::size_t s = 0; s < n; ++s) {
        const double* grow = g.data() + s * d;
        for (std::size_t t = seg[s]; t < seg[s + 1]; ++t) {
          const double wt = w[t];
          double* out = dh.data() + static_cast<std::size_t>(idx[t]) * d;
          for (std::size_t j = jb; j < je; ++j) out[j] += wt * grow[j];
        }
      }
    }
  }
}

}  // namespace duat::kernels::parallel
