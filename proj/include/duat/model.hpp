#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "duat/features.hpp"
#include "duat/graph.hpp"
#include "duat/ops.hpp"
#include "duat/tape.hpp"

namespace duat {

enum class Activation : std::uint32_t { elu = 0, identity = 1 };
enum class Arm : std::uint32_t { dual_attention = 0, plain_convolution = 1 };

std::string_view to_string(Activation a);
std::string_view to_string(Arm a);

struct ModelConfig {
  std::size_t input_dim = 0;  // d
  std::size_t head_dim = 64;  // d'
  std::size_t heads = 8;      // M
  std::size_t hops = 1;       // c
  std::size_t classes = 2;    // F
  double leaky_slope = 0.2;
  Activation activation = Activation::elu;
  double l2 = 5e-4;
  Arm arm = Arm::dual_attention;
};

/// Fixed hop-attention weights: softmax over k = 1..c of 1 - (k-1)/c.
std::vector<double> hop_coefficients(std::size_t c);

/// Parameters of one dual-attention layer plus its softmax classifier.
///
/// Per head m: "transform.m" is the shared linear map stored as [d, d'] (the
/// transpose of W, so a node's transformed features are its feature row times
/// this matrix) and "attention.m" is the length-2d' vector a. The classifier
/// is "classifier.weight" [M*d', F] and "classifier.bias" [F]. All weights
/// start uniform in +-sqrt(6 / (fan_in + fan_out)); the bias starts at 0.
class DualAttentionModel {
 public:
  DualAttentionModel(const ModelConfig& config, std::uint64_t init_seed);

  const ModelConfig& config() const { return config_; }
  const std::vector<double>& hop_weights() const { return hop_weights_; }

  ParameterStore& parameters() { return *params_; }
  const ParameterStore& parameters() const { return *params_; }
  Parameter& transform(std::size_t head) const { return *transforms_.at(head); }
  Parameter& attention(std::size_t head) const { return *attentions_.at(head); }
  Parameter& classifier_weight() const { return *classifier_w_; }
  Parameter& classifier_bias() const { return *classifier_b_; }

 private:
  ModelConfig config_;
  std::vector<double> hop_weights_;
  std::unique_ptr<ParameterStore> params_;
  std::vector<Parameter*> transforms_;
  std::vector<Parameter*> attentions_;
  Parameter* classifier_w_ = nullptr;
  Parameter* classifier_b_ = nullptr;
};

/// A sampled subgraph re-indexed for batched evaluation: `nodes` lists each
/// distinct node once (centers first), and every hop becomes a slot list
/// where slot i pairs a center (left) with a sampled node (right), grouped
/// into one segment per center.
struct SubgraphLayout {
  struct Hop {
    IndexList left;
    IndexList right;
    OffsetList segments;
    std::shared_ptr<const std::vector<double>> edge_weights;
  };
  std::vector<NodeId> nodes;
  std::vector<std::uint32_t> center_local;
  std::vector<Hop> hops;

  static SubgraphLayout build(const SampledSubgraph& sub);
};

struct AttentionVars {
  Var scores;  // e, one per slot
  Var alpha;   // softmax of e within each center's segment
};

/// alpha for one hop: softmax_j LeakyReLU(a^T [h'_i || h'_j]).
AttentionVars connection_attention(Tape& t, Var transformed, Var attention, const SubgraphLayout::Hop& hop,
                                   double leaky_slope);

/// delta(sum_j alpha_ij h'_j) per center.
Var aggregate_hop(Tape& t, Var alpha, Var transformed, const SubgraphLayout::Hop& hop, Activation activation);

struct ForwardOptions {
  bool train = false;
  double dropout = 0.0;
  std::uint64_t dropout_seed = 0;
  /// Replaces learned attention by 1/|N| per neighborhood.
  bool uniform_attention = false;
  /// Replaces the hop coefficients by 1/c.
  bool uniform_hops = false;
};

struct ForwardResult {
  std::vector<std::vector<AttentionVars>> attention;  // [head][hop]; plain arm: alpha only
  std::vector<std::vector<Var>> hop_features;         // [head][hop] h^(k)
  std::vector<Var> mixed;                             // [head] h''
  Var concatenated;                                   // h_new, [centers, M*d']
  Var logits;                                         // [centers, F]
  Var probabilities;                                  // Z
};

ForwardResult dual_attention_forward(Tape& t, const DualAttentionModel& model, const FeatureMatrix& features,
                                     const SubgraphLayout& layout, const ForwardOptions& options);

/// Ablation arm: alpha is the sampled edge weights renormalized per
/// neighborhood and the hop mixture is uniform.
ForwardResult plain_convolution_forward(Tape& t, const DualAttentionModel& model, const FeatureMatrix& features,
                                        const SubgraphLayout& layout, const ForwardOptions& options);

/// Dispatches on model.config().arm.
ForwardResult model_forward(Tape& t, const DualAttentionModel& model, const FeatureMatrix& features,
                            const SubgraphLayout& layout, const ForwardOptions& options);

/// Summed cross-entropy over the labeled rows plus lambda * sum of squares of
/// every parameter in `params`.
Var classification_loss(Tape& t, Var logits, std::span<const std::size_t> rows,
                        std::span<const std::size_t> targets, double lambda, ParameterStore& params);

/// Row-wise argmax; ties go to the lowest class index.
std::vector<std::size_t> argmax_rows(const Tensor& scores);

/// Checkpoint: magic "DUAM", u32 version, then d, d', M, c, F, activation and
/// arm as u32, leaky slope and lambda as f64, then the embedded parameter file
/// bytes (length-prefixed); trailing CRC32.
void save_model(const DualAttentionModel& model, const std::string& path);
DualAttentionModel load_model(const std::string& path);
std::vector<std::uint8_t> encode_model(const DualAttentionModel& model);
DualAttentionModel decode_model(std::span<const std::uint8_t> bytes);

}  // namespace duat
