#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "duat/optimizer.hpp"
#include "duat/train.hpp"
#include "support.hpp"

using namespace duat;

namespace {

TrainConfig small_config() {
  TrainConfig c;
  c.heads = 2;
  c.head_dim = 8;
  c.fanout = 8;
  c.epochs = 20;
  c.dropout = 0.0;
  return c;
}

double mean(std::span<const EpochMetrics> rows) {
  double s = 0.0;
  for (const auto& r : rows) s += r.train_loss;
  return s / static_cast<double>(rows.size());
}

}  // namespace

TEST_CASE("momentum step examples") {
  std::vector<double> theta{1.0}, grad{1.0}, v{0.0};
  momentum_step(theta, grad, v, 0.1, 0.9);
  CHECK(v[0] == doctest::Approx(1.0));
  CHECK(theta[0] == doctest::Approx(0.9));
  momentum_step(theta, grad, v, 0.1, 0.9);
  CHECK(v[0] == doctest::Approx(1.9));
  CHECK(theta[0] == doctest::Approx(0.71));
}

TEST_CASE("momentum converges on a quadratic") {
  // f = 0.5 * theta^2, gradient theta.
  std::vector<double> theta{5.0}, grad{0.0}, v{0.0};
  int steps = 0;
  while (std::abs(theta[0]) >= 1e-3 && steps < 200) {
    grad[0] = theta[0];
    momentum_step(theta, grad, v, 0.1, 0.9);
    ++steps;
  }
  CHECK(std::abs(theta[0]) < 1e-3);
  CHECK(steps < 200);
}

TEST_CASE("lazy row updates match dense updates") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  std::bernoulli_distribution touch(0.3);
  Tensor init(Shape{6, 3});
  for (auto& x : init.data) x = nd(rng);

  ParameterStore lazy_store, dense_store;
  auto& pl = lazy_store.add("w", init);
  auto& pd = dense_store.add("w", init);
  MomentumOptimizer lazy(lazy_store, 0.05, 0.9, 1e-2, true);
  MomentumOptimizer dense(dense_store, 0.05, 0.9, 1e-2, false);

  for (int step = 0; step < 60; ++step) {
    std::vector<std::uint32_t> rows;
    for (std::uint32_t r = 0; r < 6; ++r) {
      if (touch(rng)) rows.push_back(r);
    }
    for (auto* p : {&pl, &pd}) {
      p->grad = Tensor(Shape{6, 3});
      p->mark_rows(rows);
    }
    for (auto r : rows) {
      for (std::size_t j = 0; j < 3; ++j) {
        const double g = nd(rng);
        pl.grad(r, j) = g;
        pd.grad(r, j) = g;
      }
    }
    lazy.step();
    dense.step();
  }
  lazy.flush();
  dense.flush();
  for (std::size_t i = 0; i < init.size(); ++i) {
    CHECK(pl.value.data[i] == doctest::Approx(pd.value.data[i]).epsilon(1e-10));
  }
}

TEST_CASE("training learns a separable corpus") {
  auto data = testing::synthetic_dataset(synthetic::separable(0), 5);
  auto result = train(small_config(), data);
  REQUIRE(result.history.size() == 20);
  CHECK(result.history.back().train_acc == 1.0);
  CHECK(result.history.back().test_acc == 1.0);
  std::span<const EpochMetrics> h(result.history);
  CHECK(mean(h.last(5)) < mean(h.first(5)));
}

TEST_CASE("zero learning rate leaves the model unchanged") {
  auto data = testing::synthetic_dataset(synthetic::separable(0), 5);
  auto cfg = small_config();
  cfg.lr = 0.0;
  cfg.l2 = 0.0;
  cfg.epochs = 3;
  cfg.dropout = 0.3;
  cfg.resample_each_epoch = false;
  auto trained = train(cfg, data);
  cfg.epochs = 1;
  auto fresh = train(cfg, data);
  for (std::size_t p = 0; p < fresh.model.parameters().size(); ++p) {
    CHECK(trained.model.parameters()[p].value.data == fresh.model.parameters()[p].value.data);
  }
  // Same batches, same samples, same dropout masks every epoch.
  for (const auto& e : trained.history) CHECK(e.train_loss == trained.history[0].train_loss);
}

TEST_CASE("training is deterministic for a fixed seed") {
  auto data = testing::synthetic_dataset(synthetic::topics(3, 60, 3), 5);
  auto cfg = small_config();
  cfg.epochs = 5;
  cfg.dropout = 0.3;
  cfg.subgraph_size = 40;
  auto a = train(cfg, data), b = train(cfg, data);
  CHECK(a.history == b.history);
  cfg.seed = 1;
  auto c = train(cfg, data);
  CHECK_FALSE(c.history == a.history);
}

TEST_CASE("validation holdout is scored separately") {
  auto data = testing::synthetic_dataset(synthetic::separable(0), 5);
  auto cfg = small_config();
  cfg.epochs = 3;
  CHECK_FALSE(train(cfg, data).val_acc.has_value());
  cfg.val_frac = 0.2;
  auto r = train(cfg, data);
  REQUIRE(r.val_acc.has_value());
  CHECK(*r.val_acc >= 0.0);
  CHECK(*r.val_acc <= 1.0);
}

TEST_CASE("evaluation examples") {
  auto data = testing::synthetic_dataset(synthetic::separable(0), 5);
  std::vector<NodeId> two{0, 1};  // labels alpha, beta
  auto cfg = small_config().model_config(data.features.dim(), 2);

  SUBCASE("a constant predictor scores one half on balanced labels") {
    DualAttentionModel m(cfg, 0);
    for (std::size_t p = 0; p < m.parameters().size(); ++p) {
      std::fill(m.parameters()[p].value.data.begin(), m.parameters()[p].value.data.end(), 0.0);
    }
    m.classifier_bias().value.data = {1.0, 0.0};
    CHECK(evaluate(m, data, two, EvalOptions{}) == 0.5);
  }
  SUBCASE("a trained model on separable data scores 1") {
    auto r = train(small_config(), data);
    CHECK(evaluate(r.model, data, Split::train, EvalOptions{8, 1, 7}) == 1.0);
  }
  SUBCASE("predictions do not depend on the batch size") {
    auto r = train(small_config(), data);
    auto ids = data.documents.ids(Split::test);
    CHECK(predict(r.model, data, ids, EvalOptions{8, 3, 1}) == predict(r.model, data, ids, EvalOptions{8, 3, 64}));
  }
  SUBCASE("empty document set") {
    DualAttentionModel m(cfg, 0);
    CHECK_THROWS(evaluate(m, data, std::span<const NodeId>{}, EvalOptions{}));
  }
}

TEST_CASE("one-hop sweep equals direct training") {
  auto data = testing::synthetic_dataset(synthetic::separable(0), 5);
  auto cfg = small_config();
  cfg.epochs = 4;
  const std::size_t hops[] = {1};
  auto rows = hop_sweep(cfg, data, hops);
  auto direct = train(cfg, data);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].train_acc == direct.history.back().train_acc);
  CHECK(rows[0].test_acc == direct.history.back().test_acc);
  CHECK(rows[0].train_loss == direct.history.back().train_loss);
  const std::size_t bad[] = {4};
  CHECK_THROWS(hop_sweep(cfg, data, bad));
}

TEST_CASE("uniform attention makes both arms agree on uniform-weight graphs") {
  std::mt19937_64 rng(5);
  Dataset data;
  data.graph = testing::random_graph(24, 3, rng, true);
  data.features = FeatureMatrix::identity(24);
  for (std::size_t i = 0; i < 24; ++i) {
    data.documents.labels.push_back(i % 2);
    data.documents.splits.push_back(i < 18 ? Split::train : Split::test);
  }
  data.documents.label_names = {"a", "b"};
  auto cfg = small_config();
  cfg.epochs = 5;
  cfg.hops = 2;
  cfg.uniform_attention = true;
  auto dual = train(cfg, data);
  cfg.arm = Arm::plain_convolution;
  cfg.uniform_attention = false;
  auto plain = train(cfg, data);
  for (std::size_t e = 0; e < 5; ++e) {
    CHECK(dual.history[e].train_loss == doctest::Approx(plain.history[e].train_loss).epsilon(1e-9));
    CHECK(dual.history[e].train_acc == plain.history[e].train_acc);
  }
}

TEST_CASE("learned attention beats edge-weight averaging on the co-occurrence corpus") {
  auto data = testing::synthetic_dataset(synthetic::cooccurrence(0), 5);
  auto cfg = small_config();
  cfg.fanout = 10;
  cfg.epochs = 30;
  const std::uint64_t seeds[] = {0, 1, 2};
  auto report = ablate(cfg, data, seeds);
  REQUIRE(report.rows.size() == 3);
  CHECK(report.mean_dual > report.mean_plain);
}

TEST_CASE("configuration and data errors") {
  auto data = testing::synthetic_dataset(synthetic::separable(0), 5);
  auto cfg = small_config();
  SUBCASE("empty train split") {
    for (auto& s : data.documents.splits) s = Split::test;
    CHECK_THROWS_WITH(train(cfg, data), "train split is empty");
  }
  SUBCASE("label table size mismatch") {
    data.documents.labels.pop_back();
    CHECK_THROWS_AS(train(cfg, data), std::invalid_argument);
  }
  SUBCASE("field names lead the message") {
    cfg.lr = -1.0;
    CHECK_THROWS_WITH(cfg.validate(), doctest::Contains("lr"));
    cfg = small_config();
    cfg.hops = 4;
    CHECK_THROWS_WITH(cfg.validate(), doctest::Contains("hops"));
    cfg = small_config();
    cfg.dropout = 1.0;
    CHECK_THROWS_WITH(cfg.validate(), doctest::Contains("dropout"));
  }
}
