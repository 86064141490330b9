#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "duat/dataset.hpp"
#include "duat/metrics.hpp"
#include "duat/model.hpp"

namespace duat {

struct TrainConfig {
  double lr = 0.05;
  double momentum = 0.9;
  double dropout = 0.3;
  std::size_t epochs = 300;
  std::size_t heads = 8;
  std::size_t head_dim = 64;
  std::size_t hops = 1;
  std::size_t fanout = 70;
  std::size_t batch_size = 10;
  std::size_t subgraph_size = 200;  // distinct-node cap per batch; 0 = none
  double l2 = 5e-4;
  std::uint64_t seed = 0;
  double leaky_slope = 0.2;
  Activation activation = Activation::elu;
  Arm arm = Arm::dual_attention;
  /// Forces alpha = 1/|N| and q = 1/c in the dual arm.
  bool uniform_attention = false;
  /// Reshuffle and draw fresh subgraphs every epoch. When off, every epoch
  /// replays the batch order and samples of the first.
  bool resample_each_epoch = true;
  /// Fraction of train documents held out of the loss and scored separately.
  double val_frac = 0.0;
  std::size_t eval_batch_size = 256;
  bool record_time = false;

  /// Throws std::invalid_argument whose message starts with the field name.
  void validate() const;
  ModelConfig model_config(std::size_t input_dim, std::size_t classes) const;
};

struct EvalOptions {
  std::size_t fanout = 70;
  std::uint64_t seed = 1;
  std::size_t batch_size = 256;
  /// Scores with the same uniform attention the model was trained under.
  bool uniform_attention = false;
};

/// Predicted class per center: forward in eval mode (no dropout, no node
/// cap) over samples drawn with `options.seed`. Batches run in parallel;
/// each center has its own sampling stream, so results do not depend on the
/// batching or the thread count.
std::vector<std::size_t> predict(const DualAttentionModel& model, const Dataset& data,
                                 std::span<const NodeId> centers, const EvalOptions& options);

/// Fraction of `docs` whose prediction equals the label. Throws
/// std::invalid_argument on an empty list.
double evaluate(const DualAttentionModel& model, const Dataset& data, std::span<const NodeId> docs,
                const EvalOptions& options);
double evaluate(const DualAttentionModel& model, const Dataset& data, Split split, const EvalOptions& options);

EvalOptions eval_options(const TrainConfig& config);

struct TrainResult {
  DualAttentionModel model;
  MetricsHistory history;
  std::optional<double> val_acc;
};

/// Momentum-SGD over batches of train-document centers. Test documents stay
/// in the graph but never enter the loss.
TrainResult train(const TrainConfig& config, const Dataset& data);

struct SweepRow {
  std::size_t hops = 0;
  double train_acc = 0.0;
  double test_acc = 0.0;
  double train_loss = 0.0;
};

/// One model per hop count; every other setting (seed included) is shared.
std::vector<SweepRow> hop_sweep(const TrainConfig& config, const Dataset& data, std::span<const std::size_t> hops);

struct AblationRow {
  std::uint64_t seed = 0;
  double dual_acc = 0.0;
  double plain_acc = 0.0;
};

struct AblationReport {
  std::vector<AblationRow> rows;
  double mean_dual = 0.0;
  double mean_plain = 0.0;
};

/// Trains the dual-attention and plain-convolution arms with identical
/// hyperparameters for each seed.
AblationReport ablate(const TrainConfig& config, const Dataset& data, std::span<const std::uint64_t> seeds);

}  // namespace duat
