// Serial reference vs OpenMP kernels. Arg(0) is serial, Arg(1) parallel.
#include <benchmark/benchmark.h>

#include <numeric>
#include <random>
#include <vector>

#include "duat/corpus.hpp"
#include "duat/graph.hpp"
#include "duat/kernels.hpp"
#include "duat/synthetic.hpp"

namespace k = duat::kernels;

namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<double> v(n);
  for (auto& x : v) x = nd(rng);
  return v;
}

/// One-hot-like sparse rows: `nnz` entries per row over `cols` columns.
struct Sparse {
  std::vector<std::size_t> offsets{0};
  std::vector<std::uint32_t> cols;
  std::vector<double> values;
};

Sparse sparse_rows(std::size_t rows, std::size_t ncols, std::size_t nnz) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(ncols - 1));
  Sparse s;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < nnz; ++j) {
      s.cols.push_back(pick(rng));
      s.values.push_back(1.0);
    }
    s.offsets.push_back(s.cols.size());
  }
  return s;
}

/// Attention-shaped slot lists: `centers` segments of `fanout` slots each.
struct Slots {
  std::vector<std::size_t> seg;
  std::vector<std::uint32_t> left, right;
};

Slots slots(std::size_t centers, std::size_t fanout, std::size_t nodes) {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(nodes - 1));
  Slots s;
  s.seg.push_back(0);
  for (std::uint32_t c = 0; c < centers; ++c) {
    for (std::size_t j = 0; j < fanout; ++j) {
      s.left.push_back(c);
      s.right.push_back(pick(rng));
    }
    s.seg.push_back(s.left.size());
  }
  return s;
}

void BM_spmm(benchmark::State& state) {
  const bool par = state.range(0) != 0;
  const std::size_t rows = 2000, dim = 8000, width = 64;
  const auto x = sparse_rows(rows, dim, 30);
  const auto w = noise(dim * width, 1);
  std::vector<double> out(rows * width);
  const k::CsrView view{x.offsets, x.cols};
  for (auto _ : state) {
    if (par) {
      k::parallel::spmm(view, x.values, w, out, width);
    } else {
      k::serial::spmm(view, x.values, w, out, width);
    }
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_segment_softmax(benchmark::State& state) {
  const bool par = state.range(0) != 0;
  const auto s = slots(2000, 70, 20000);
  const auto x = noise(s.left.size(), 2);
  std::vector<double> y(x.size());
  for (auto _ : state) {
    if (par) {
      k::parallel::segment_softmax(x, s.seg, y);
    } else {
      k::serial::segment_softmax(x, s.seg, y);
    }
    benchmark::DoNotOptimize(y.data());
  }
}

void BM_segment_weighted_sum(benchmark::State& state) {
  const bool par = state.range(0) != 0;
  const std::size_t nodes = 20000, d = 64;
  const auto s = slots(2000, 70, nodes);
  const auto w = noise(s.left.size(), 3);
  const auto h = noise(nodes * d, 4);
  std::vector<double> out(2000 * d);
  for (auto _ : state) {
    if (par) {
      k::parallel::segment_weighted_sum(w, h, s.right, s.seg, out, d);
    } else {
      k::serial::segment_weighted_sum(w, h, s.right, s.seg, out, d);
    }
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_pair_scores(benchmark::State& state) {
  const bool par = state.range(0) != 0;
  const std::size_t nodes = 20000, d = 64;
  const auto s = slots(2000, 70, nodes);
  const auto h = noise(nodes * d, 5);
  const auto a = noise(2 * d, 6);
  std::vector<double> scores(s.left.size());
  for (auto _ : state) {
    if (par) {
      k::parallel::pair_scores(h, a, s.left, s.right, scores, d);
    } else {
      k::serial::pair_scores(h, a, s.left, s.right, scores, d);
    }
    benchmark::DoNotOptimize(scores.data());
  }
}

void BM_window_stats(benchmark::State& state) {
  const bool par = state.range(0) != 0;
  const auto raw = duat::synthetic::topics(1, 2000, 8);
  const auto corpus = duat::make_corpus(raw.texts, raw.meta, duat::CleaningRules{}, 1);
  for (auto _ : state) {
    auto stats = duat::collect_window_stats(corpus, 20, par);
    benchmark::DoNotOptimize(stats);
  }
}

}  // namespace

BENCHMARK(BM_spmm)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_segment_softmax)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_segment_weighted_sum)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_pair_scores)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_window_stats)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
