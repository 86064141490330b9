#include "duat/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "duat/optimizer.hpp"

namespace duat {

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t a = 0, std::uint64_t b = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(a),
                    static_cast<std::uint32_t>(a >> 32), static_cast<std::uint32_t>(b)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

enum Stream : std::uint64_t { kInit = 1, kShuffle = 2, kSample = 3, kDropout = 4, kHoldout = 5 };

void require(bool ok, const char* field, const std::string& what) {
  if (!ok) throw std::invalid_argument(std::string(field) + ": " + what);
}

double squared_norm(const ParameterStore& store) {
  double s = 0.0;
  for (std::size_t p = 0; p < store.size(); ++p) {
    for (double v : store[p].value.data) s += v * v;
  }
  return s;
}

}  // namespace

void TrainConfig::validate() const {
  require(std::isfinite(lr) && lr >= 0.0, "lr", "must be a finite value >= 0");
  require(momentum >= 0.0 && momentum < 1.0, "momentum", "must be in [0, 1)");
  require(dropout >= 0.0 && dropout < 1.0, "dropout", "must be in [0, 1)");
  require(epochs >= 1, "epochs", "must be >= 1");
  require(heads >= 1, "heads", "must be >= 1");
  require(head_dim >= 1, "dim", "must be >= 1");
  require(hops >= 1 && hops <= 3, "hops", "must be 1, 2 or 3");
  require(fanout >= 1, "fanout", "must be >= 1");
  require(batch_size >= 1, "batch-size", "must be >= 1");
  require(subgraph_size == 0 || subgraph_size >= batch_size, "subgraph-size", "must be 0 or >= batch size");
  require(std::isfinite(l2) && l2 >= 0.0, "l2", "must be a finite value >= 0");
  require(std::isfinite(leaky_slope) && leaky_slope >= 0.0, "leaky-slope", "must be >= 0");
  require(val_frac >= 0.0 && val_frac < 1.0, "val-frac", "must be in [0, 1)");
  require(eval_batch_size >= 1, "eval-batch-size", "must be >= 1");
}

ModelConfig TrainConfig::model_config(std::size_t input_dim, std::size_t classes) const {
  ModelConfig mc;
  mc.input_dim = input_dim;
  mc.head_dim = head_dim;
  mc.heads = heads;
  mc.hops = hops;
  mc.classes = classes;
  mc.leaky_slope = leaky_slope;
  mc.activation = activation;
  mc.l2 = l2;
  mc.arm = arm;
  return mc;
}

EvalOptions eval_options(const TrainConfig& config) {
  return EvalOptions{config.fanout, config.seed + 1, config.eval_batch_size, config.uniform_attention};
}

std::vector<std::size_t> predict(const DualAttentionModel& model, const Dataset& data,
                                 std::span<const NodeId> centers, const EvalOptions& options) {
  std::vector<std::size_t> out(centers.size(), 0);
  const std::size_t batch = std::max<std::size_t>(1, options.batch_size);
  const auto n_batches = static_cast<std::ptrdiff_t>((centers.size() + batch - 1) / batch);
  const SamplingOptions sampling{options.fanout, model.config().hops, 0};
  ForwardOptions forward;
  forward.uniform_attention = options.uniform_attention;
  forward.uniform_hops = options.uniform_attention;
  std::exception_ptr failure;

#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t b = 0; b < n_batches; ++b) {
    try {
      const std::size_t lo = static_cast<std::size_t>(b) * batch;
      const std::size_t hi = std::min(centers.size(), lo + batch);
      auto sub = sample_k_hop(data.graph, centers.subspan(lo, hi - lo), sampling, options.seed);
      auto layout = SubgraphLayout::build(sub);
      Tape t;
      auto fwd = model_forward(t, model, data.features, layout, forward);
      auto pred = argmax_rows(t.value(fwd.logits));
      std::copy(pred.begin(), pred.end(), out.begin() + static_cast<std::ptrdiff_t>(lo));
    } catch (...) {
#pragma omp critical(duat_predict_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

double evaluate(const DualAttentionModel& model, const Dataset& data, std::span<const NodeId> docs,
                const EvalOptions& options) {
  if (docs.empty()) throw std::invalid_argument("evaluate: empty document set");
  auto pred = predict(model, data, docs, options);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < docs.size(); ++i) hits += pred[i] == data.documents.labels.at(docs[i]);
  return static_cast<double>(hits) / static_cast<double>(docs.size());
}

double evaluate(const DualAttentionModel& model, const Dataset& data, Split split, const EvalOptions& options) {
  auto ids = data.documents.ids(split);
  return evaluate(model, data, ids, options);
}

TrainResult train(const TrainConfig& config, const Dataset& data) {
  config.validate();
  data.validate();
  std::vector<NodeId> fit = data.documents.ids(Split::train);
  if (fit.empty()) throw std::invalid_argument("train split is empty");
  const std::vector<NodeId> test = data.documents.ids(Split::test);

  std::vector<NodeId> holdout;
  if (config.val_frac > 0.0) {
    std::mt19937_64 rng(derive_seed(config.seed, kHoldout));
    std::shuffle(fit.begin(), fit.end(), rng);
    auto n_val = static_cast<std::size_t>(std::llround(config.val_frac * static_cast<double>(fit.size())));
    n_val = std::min(n_val, fit.size() - 1);
    holdout.assign(fit.begin(), fit.begin() + static_cast<std::ptrdiff_t>(n_val));
    fit.erase(fit.begin(), fit.begin() + static_cast<std::ptrdiff_t>(n_val));
    std::sort(fit.begin(), fit.end());
    std::sort(holdout.begin(), holdout.end());
  }

  DualAttentionModel model(config.model_config(data.features.dim(), data.documents.num_classes()),
                           derive_seed(config.seed, kInit));
  ParameterStore& params = model.parameters();
  // d/dtheta of lambda * theta^2 is 2 lambda theta.
  MomentumOptimizer optimizer(params, config.lr, config.momentum, 2.0 * config.l2);

  const SamplingOptions sampling{config.fanout, config.hops, config.subgraph_size};
  const EvalOptions eval = eval_options(config);
  ForwardOptions fwd_opt;
  fwd_opt.train = true;
  fwd_opt.dropout = config.dropout;
  fwd_opt.uniform_attention = config.uniform_attention;
  fwd_opt.uniform_hops = config.uniform_attention;

  std::vector<NodeId> order = fit;
  if (!config.resample_each_epoch) {
    std::mt19937_64 rng(derive_seed(config.seed, kShuffle));
    std::shuffle(order.begin(), order.end(), rng);
  }

  TrainResult result{std::move(model), {}, std::nullopt};
  const DualAttentionModel& m = result.model;
  std::vector<std::size_t> rows, targets;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    const std::uint64_t round = config.resample_each_epoch ? epoch : 0;
    if (config.resample_each_epoch) {
      order = fit;
      std::mt19937_64 rng(derive_seed(config.seed, kShuffle, round));
      std::shuffle(order.begin(), order.end(), rng);
    }

    double loss_sum = 0.0;
    for (std::size_t lo = 0, b = 0; lo < order.size(); lo += config.batch_size, ++b) {
      const std::size_t hi = std::min(order.size(), lo + config.batch_size);
      std::span<const NodeId> centers(order.data() + lo, hi - lo);
      auto sub = sample_k_hop(data.graph, centers, sampling, derive_seed(config.seed, kSample, round, b));
      auto layout = SubgraphLayout::build(sub);

      Tape t;
      fwd_opt.dropout_seed = derive_seed(config.seed, kDropout, round, b);
      auto fwd = model_forward(t, m, data.features, layout, fwd_opt);
      rows.resize(centers.size());
      targets.resize(centers.size());
      for (std::size_t i = 0; i < centers.size(); ++i) {
        rows[i] = layout.center_local[i];
        targets[i] = data.documents.labels[centers[i]];
      }
      Var loss = ops::cross_entropy(t, fwd.logits, rows, targets);
      loss_sum += t.value(loss).data[0];
      t.backward(loss);
      optimizer.step();
    }
    optimizer.flush();

    EpochMetrics em;
    em.epoch = epoch;
    em.train_loss = loss_sum / static_cast<double>(fit.size()) + config.l2 * squared_norm(params);
    if (!std::isfinite(em.train_loss)) throw NumericError("non-finite training loss at epoch " + std::to_string(epoch));
    em.train_acc = evaluate(m, data, fit, eval);
    em.test_acc = test.empty() ? 0.0 : evaluate(m, data, test, eval);
    if (config.record_time) {
      em.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    result.history.push_back(em);
  }
  if (!holdout.empty()) result.val_acc = evaluate(m, data, holdout, eval);
  return result;
}

}  // namespace duat
