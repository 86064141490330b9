#include <cmath>
#include <functional>
#include <random>

#include "doctest.h"
#include "duat/grad_check.hpp"
#include "duat/ops.hpp"
#include "duat/tape.hpp"

using namespace duat;

namespace {

// Scalar probe sum_i r_i x_i, so any tensor-valued op can be grad-checked.
Var probe(Tape& t, Var x, const std::vector<double>& r) {
  const auto& v = t.value(x).data;
  REQUIRE(v.size() == r.size());
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * r[i];
  return t.record("probe", Tensor::scalar(s), t.requires_grad(x), [x, r](Tape& tp, Var, const Tensor& g) {
    auto buf = tp.grad_buffer(x);
    for (std::size_t i = 0; i < r.size(); ++i) buf[i] += g.data[0] * r[i];
  });
}

Tensor random_tensor(Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  Tensor t(std::move(shape));
  for (auto& v : t.data) v = d(rng);
  return t;
}

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng) {
  return random_tensor(Shape{n}, rng).data;
}

IndexList index_list(std::vector<std::uint32_t> v) { return std::make_shared<const std::vector<std::uint32_t>>(std::move(v)); }
OffsetList offset_list(std::vector<std::size_t> v) { return std::make_shared<const std::vector<std::size_t>>(std::move(v)); }

}  // namespace

TEST_CASE("primitive forward examples") {
  Tape t;
  auto x = t.constant(Tensor::scalar(-1.0));
  CHECK(t.value(ops::elu(t, x)).data[0] == doctest::Approx(std::exp(-1.0) - 1.0));
  CHECK(t.value(ops::elu(t, x)).data[0] == doctest::Approx(-0.6321).epsilon(1e-4));

  auto y = t.constant(Tensor::scalar(-2.0));
  CHECK(t.value(ops::leaky_relu(t, y, 0.2)).data[0] == doctest::Approx(-0.4));

  auto v = t.constant(Tensor(Shape{4}, {3.0, -7.0, 0.5, 100.0}));
  std::vector<std::size_t> single{2};
  auto sm = t.value(ops::masked_softmax(t, v, single)).data;
  CHECK(sm == std::vector<double>{0.0, 0.0, 1.0, 0.0});

  std::vector<std::size_t> mask{0, 1, 3};
  auto m = t.value(ops::masked_softmax(t, v, mask)).data;
  double sum = 0.0;
  for (double p : m) {
    CHECK(p >= 0.0);
    sum += p;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m[2] == 0.0);
}

TEST_CASE("affine gradient matches the hand formula on a 2x2 case") {
  // y = x W + b with x = [1, 2]; upstream g = [0.5, -1].
  ParameterStore store;
  auto& w = store.add("w", Tensor::matrix(2, 2, {1, 2, 3, 4}));
  auto& b = store.add("b", Tensor(Shape{2}, {0.1, 0.2}));
  Tape t;
  auto x = t.constant(Tensor::matrix(1, 2, {1, 2}));
  auto y = ops::affine(t, x, t.parameter(w), t.parameter(b));
  CHECK(t.value(y).data == std::vector<double>{7.1, 10.2});
  t.backward(y, Tensor::matrix(1, 2, {0.5, -1.0}));
  // dW = x^T g, db = g
  CHECK(w.grad.data == std::vector<double>{0.5, -1.0, 1.0, -2.0});
  CHECK(b.grad.data == std::vector<double>{0.5, -1.0});
}

TEST_CASE("dropout in eval mode is the identity") {
  ParameterStore store;
  auto& p = store.add("p", Tensor(Shape{3}, {1.0, -2.0, 3.0}));
  Tape t;
  auto x = t.parameter(p);
  auto y = ops::dropout(t, x, 0.5, false, 1);
  CHECK(y.id == x.id);
  t.backward(probe(t, y, {1.0, 2.0, 3.0}));
  CHECK(p.grad.data == std::vector<double>{1.0, 2.0, 3.0});
}

TEST_CASE("dropout in train mode uses inverted scaling") {
  Tape t;
  auto x = t.constant(Tensor(Shape{1000}, std::vector<double>(1000, 1.0)));
  auto y = t.value(ops::dropout(t, x, 0.25, true, 9)).data;
  std::size_t kept = 0;
  for (double v : y) {
    CHECK((v == 0.0 || v == doctest::Approx(1.0 / 0.75)));
    kept += v != 0.0;
  }
  CHECK(kept > 650);
  CHECK(kept < 850);
  CHECK_THROWS_AS(ops::dropout(t, x, 1.0, true, 0), std::invalid_argument);
}

TEST_CASE("cross-entropy requires rows") {
  Tape t;
  auto logits = t.constant(Tensor::matrix(1, 2, {0.0, 0.0}));
  CHECK_THROWS_AS(ops::cross_entropy(t, logits, {}, {}), std::invalid_argument);
}

TEST_CASE("non-finite values are reported with the op name") {
  Tape t;
  auto x = t.constant(Tensor::scalar(800.0));
  try {
    ops::elu(t, ops::scale(t, x, 1e306));
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("scale") != std::string::npos);
  }
}

TEST_CASE("backward preconditions") {
  Tape t;
  CHECK_THROWS(t.backward(Var{0}));
  auto x = t.constant(Tensor(Shape{2}, {1.0, 2.0}));
  CHECK_THROWS(t.backward(x));
}

TEST_CASE("every primitive passes a central-difference check") {
  std::mt19937_64 rng(2024);
  struct Case {
    const char* name;
    std::function<void(ParameterStore&)> init;
    LossBuilder build;
  };
  ParameterStore store;
  const auto r6 = random_vec(6, rng), r8 = random_vec(8, rng), r12 = random_vec(12, rng), r4 = random_vec(4, rng);
  const std::vector<std::size_t> mask{0, 2, 3};
  const auto seg = offset_list({0, 1, 4, 6});
  const auto left = index_list({0, 0, 1, 1, 2, 2}), right = index_list({0, 3, 1, 2, 2, 0});
  auto sparse = std::make_shared<SparseRows>();
  sparse->offsets = {0, 2, 3, 5};
  sparse->cols = {0, 3, 1, 2, 3};
  sparse->num_cols = 4;

  std::vector<Case> cases = {
      {"matmul",
       [&](ParameterStore& s) {
         s.add("a", random_tensor({3, 4}, rng));
         s.add("b", random_tensor({4, 2}, rng));
       },
       [&](Tape& t) { return probe(t, ops::matmul(t, t.parameter(store[0]), t.parameter(store[1])), r6); }},
      {"affine",
       [&](ParameterStore& s) {
         s.add("x", random_tensor({3, 2}, rng));
         s.add("w", random_tensor({2, 2}, rng));
         s.add("b", random_tensor({2}, rng));
       },
       [&](Tape& t) {
         return probe(t, ops::affine(t, t.parameter(store[0]), t.parameter(store[1]), t.parameter(store[2])), r6);
       }},
      {"add and scale",
       [&](ParameterStore& s) {
         s.add("a", random_tensor({2, 3}, rng));
         s.add("b", random_tensor({2, 3}, rng));
       },
       [&](Tape& t) {
         return probe(t, ops::scale(t, ops::add(t, t.parameter(store[0]), t.parameter(store[1])), -1.7), r6);
       }},
      {"concat",
       [&](ParameterStore& s) {
         s.add("a", random_tensor({2, 1}, rng));
         s.add("b", random_tensor({2, 2}, rng));
       },
       [&](Tape& t) {
         Var parts[] = {t.parameter(store[0]), t.parameter(store[1])};
         return probe(t, ops::concat_cols(t, parts), r6);
       }},
      {"leaky relu", [&](ParameterStore& s) { s.add("x", random_tensor({6}, rng)); },
       [&](Tape& t) { return probe(t, ops::leaky_relu(t, t.parameter(store[0]), 0.2), r6); }},
      {"elu", [&](ParameterStore& s) { s.add("x", random_tensor({6}, rng)); },
       [&](Tape& t) { return probe(t, ops::elu(t, t.parameter(store[0])), r6); }},
      {"softmax rows", [&](ParameterStore& s) { s.add("x", random_tensor({2, 3}, rng)); },
       [&](Tape& t) { return probe(t, ops::softmax_rows(t, t.parameter(store[0])), r6); }},
      {"masked softmax", [&](ParameterStore& s) { s.add("x", random_tensor({4}, rng)); },
       [&](Tape& t) { return probe(t, ops::masked_softmax(t, t.parameter(store[0]), mask), r4); }},
      {"segment softmax", [&](ParameterStore& s) { s.add("x", random_tensor({6}, rng)); },
       [&](Tape& t) { return probe(t, ops::segment_softmax(t, t.parameter(store[0]), seg), r6); }},
      {"dropout with a fixed mask", [&](ParameterStore& s) { s.add("x", random_tensor({8}, rng)); },
       [&](Tape& t) { return probe(t, ops::dropout(t, t.parameter(store[0]), 0.4, true, 5), r8); }},
      {"weighted sum",
       [&](ParameterStore& s) {
         s.add("a", random_tensor({2, 3}, rng));
         s.add("b", random_tensor({2, 3}, rng));
       },
       [&](Tape& t) {
         Var xs[] = {t.parameter(store[0]), t.parameter(store[1])};
         const double q[] = {0.62, 0.38};
         return probe(t, ops::weighted_sum(t, xs, q), r6);
       }},
      {"cross entropy", [&](ParameterStore& s) { s.add("logits", random_tensor({3, 4}, rng, -3, 3)); },
       [&](Tape& t) {
         const std::size_t rows[] = {0, 2}, targets[] = {3, 1};
         return ops::cross_entropy(t, t.parameter(store[0]), rows, targets);
       }},
      {"l2 penalty",
       [&](ParameterStore& s) {
         s.add("a", random_tensor({3}, rng));
         s.add("b", random_tensor({2, 2}, rng));
       },
       [&](Tape& t) {
         Var ps[] = {t.parameter(store[0]), t.parameter(store[1])};
         return ops::l2_penalty(t, ps, 0.3);
       }},
      {"sparse matmul",
       [&](ParameterStore& s) {
         s.add("values", random_tensor({5}, rng));
         s.add("w", random_tensor({4, 4}, rng));
       },
       [&](Tape& t) {
         return probe(t, ops::sparse_matmul(t, sparse, t.parameter(store[0]), t.parameter(store[1])), r12);
       }},
      {"pair scores",
       [&](ParameterStore& s) {
         s.add("h", random_tensor({4, 3}, rng));
         s.add("a", random_tensor({6}, rng));
       },
       [&](Tape& t) {
         return probe(t, ops::pair_scores(t, t.parameter(store[0]), t.parameter(store[1]), left, right), r6);
       }},
      {"segment weighted sum",
       [&](ParameterStore& s) {
         s.add("w", random_tensor({6}, rng));
         s.add("h", random_tensor({4, 4}, rng));
       },
       [&](Tape& t) {
         return probe(t,
                      ops::segment_weighted_sum(t, t.parameter(store[0]), t.parameter(store[1]), right, seg),
                      r12);
       }},
  };

  for (auto& c : cases) {
    CAPTURE(c.name);
    store = ParameterStore{};
    c.init(store);
    auto report = grad_check(store, c.build);
    CHECK(report.checked == store.scalar_count());
    CHECK(report.max_relative_error < 1e-4);
  }
}

TEST_CASE("grad_check edge cases") {
  SUBCASE("no parameters is vacuously exact") {
    ParameterStore empty;
    auto report = grad_check(empty, [](Tape& t) { return t.constant(Tensor::scalar(3.0)); });
    CHECK(report.max_relative_error == 0.0);
    CHECK(report.checked == 0);
  }
  SUBCASE("a corrupted gradient is caught") {
    ParameterStore store;
    store.add("x", Tensor(Shape{3}, {0.3, -0.8, 1.1}));
    LossBuilder build = [&](Tape& t) {
      Var x = t.parameter(store[0]);
      return probe(t, ops::elu(t, x), {1.0, 2.0, -1.0});
    };
    auto analytic = analytic_gradients(store, build);
    CHECK(compare_central_differences(store, build, analytic, 1e-5).max_relative_error < 1e-6);
    analytic[0].data[1] += 0.1;
    auto report = compare_central_differences(store, build, analytic, 1e-5);
    CHECK(report.max_relative_error > 1e-2);
    CHECK(report.worst_parameter == "x");
    CHECK(report.worst_index == 1);
  }
  SUBCASE("epsilon range") {
    ParameterStore store;
    store.add("x", Tensor::scalar(1.0));
    LossBuilder build = [&](Tape& t) { return t.parameter(store[0]); };
    auto analytic = analytic_gradients(store, build);
    CHECK_THROWS(compare_central_differences(store, build, analytic, 1e-2));
  }
}
