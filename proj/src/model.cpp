#include "duat/model.hpp"

#include <cmath>
#include <cstring>
#include <random>
#include <stdexcept>
#include <unordered_map>

#include "duat/binary_io.hpp"
#include "duat/checkpoint.hpp"

namespace duat {

std::string_view to_string(Activation a) { return a == Activation::elu ? "elu" : "identity"; }
std::string_view to_string(Arm a) { return a == Arm::dual_attention ? "dual-attention" : "plain-convolution"; }

std::vector<double> hop_coefficients(std::size_t c) {
  if (c < 1) throw std::invalid_argument("hop count must be >= 1");
  std::vector<double> q(c);
  double z = 0.0;
  for (std::size_t k = 1; k <= c; ++k) {
    q[k - 1] = std::exp(1.0 - static_cast<double>(k - 1) / static_cast<double>(c));
    z += q[k - 1];
  }
  for (double& v : q) v /= z;
  return q;
}

namespace {

Tensor glorot(Shape shape, std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Tensor t(std::move(shape));
  for (double& v : t.data) v = dist(rng);
  return t;
}

// Decorrelates dropout streams of different heads/hops under one seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (a * 1315423911ULL + b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Var activate(Tape& t, Var x, Activation a) { return a == Activation::elu ? ops::elu(t, x) : x; }

}  // namespace

DualAttentionModel::DualAttentionModel(const ModelConfig& config, std::uint64_t init_seed)
    : config_(config), params_(std::make_unique<ParameterStore>()) {
  if (config.input_dim == 0 || config.head_dim == 0 || config.heads == 0) {
    throw std::invalid_argument("model dimensions must be positive");
  }
  if (config.hops < 1 || config.hops > 3) throw std::invalid_argument("hop count must be in 1..3");
  if (config.classes < 2) throw std::invalid_argument("need at least 2 classes");
  hop_weights_ = hop_coefficients(config.hops);

  std::mt19937_64 rng(init_seed);
  const std::size_t d = config.input_dim, dp = config.head_dim, m = config.heads;
  for (std::size_t h = 0; h < m; ++h) {
    transforms_.push_back(&params_->add("transform." + std::to_string(h), glorot(Shape{d, dp}, d, dp, rng)));
    attentions_.push_back(&params_->add("attention." + std::to_string(h), glorot(Shape{2 * dp}, 2 * dp, 1, rng)));
  }
  classifier_w_ = &params_->add("classifier.weight", glorot(Shape{m * dp, config.classes}, m * dp, config.classes, rng));
  classifier_b_ = &params_->add("classifier.bias", Tensor(Shape{config.classes}));
}

SubgraphLayout SubgraphLayout::build(const SampledSubgraph& sub) {
  SubgraphLayout layout;
  std::unordered_map<NodeId, std::uint32_t> local;
  auto intern = [&](NodeId n) {
    auto [it, inserted] = local.emplace(n, static_cast<std::uint32_t>(layout.nodes.size()));
    if (inserted) layout.nodes.push_back(n);
    return it->second;
  };
  for (NodeId c : sub.centers) layout.center_local.push_back(intern(c));
  for (std::size_t k = 1; k <= sub.hops; ++k) {
    const std::size_t per = sub.slots_per_center(k);
    auto left = std::make_shared<std::vector<std::uint32_t>>();
    auto right = std::make_shared<std::vector<std::uint32_t>>();
    auto segs = std::make_shared<std::vector<std::size_t>>();
    auto weights = std::make_shared<std::vector<double>>(sub.hop_weights[k - 1]);
    left->reserve(sub.centers.size() * per);
    right->reserve(sub.centers.size() * per);
    segs->push_back(0);
    for (std::size_t c = 0; c < sub.centers.size(); ++c) {
      for (NodeId n : sub.block(c, k)) {
        left->push_back(layout.center_local[c]);
        right->push_back(intern(n));
      }
      segs->push_back(right->size());
    }
    layout.hops.push_back({std::move(left), std::move(right), std::move(segs), std::move(weights)});
  }
  return layout;
}

AttentionVars connection_attention(Tape& t, Var transformed, Var attention, const SubgraphLayout::Hop& hop,
                                   double leaky_slope) {
  Var raw = ops::pair_scores(t, transformed, attention, hop.left, hop.right);
  Var scores = ops::leaky_relu(t, raw, leaky_slope);
  return {scores, ops::segment_softmax(t, scores, hop.segments)};
}

Var aggregate_hop(Tape& t, Var alpha, Var transformed, const SubgraphLayout::Hop& hop, Activation activation) {
  return activate(t, ops::segment_weighted_sum(t, alpha, transformed, hop.right, hop.segments), activation);
}

namespace {

enum class Weighting { learned, uniform, edge };

Tensor fixed_weights(const SubgraphLayout::Hop& hop, Weighting mode) {
  const auto& segs = *hop.segments;
  Tensor w(Shape{hop.right->size()});
  for (std::size_t s = 0; s + 1 < segs.size(); ++s) {
    const std::size_t b = segs[s], e = segs[s + 1];
    double total = 0.0;
    if (mode == Weighting::edge) {
      for (std::size_t i = b; i < e; ++i) total += (*hop.edge_weights)[i];
    }
    for (std::size_t i = b; i < e; ++i) {
      w.data[i] = (mode == Weighting::edge && total > 0.0) ? (*hop.edge_weights)[i] / total
                                                            : 1.0 / static_cast<double>(e - b);
    }
  }
  return w;
}

ForwardResult run_forward(Tape& t, const DualAttentionModel& model, const FeatureMatrix& features,
                          const SubgraphLayout& layout, const ForwardOptions& opt, Weighting weighting,
                          bool uniform_hops) {
  const ModelConfig& cfg = model.config();
  if (features.dim() != cfg.input_dim) {
    throw ShapeError("feature dimension " + std::to_string(features.dim()) + " != model input dimension " +
                     std::to_string(cfg.input_dim));
  }
  if (layout.hops.size() > cfg.hops || layout.hops.empty()) {
    throw ShapeError("subgraph has " + std::to_string(layout.hops.size()) + " hops, model expects 1.." +
                     std::to_string(cfg.hops));
  }
  // A subgraph with fewer hops than the model uses the leading coefficients,
  // renormalized.
  const std::size_t c = layout.hops.size();
  std::vector<double> mixture(model.hop_weights().begin(), model.hop_weights().begin() + static_cast<std::ptrdiff_t>(c));
  if (uniform_hops) {
    std::fill(mixture.begin(), mixture.end(), 1.0 / static_cast<double>(c));
  } else if (c < cfg.hops) {
    double z = 0.0;
    for (double q : mixture) z += q;
    for (double& q : mixture) q /= z;
  }

  auto slice = features.gather(layout.nodes);
  Var x_values = t.constant(std::move(slice.values));
  x_values = ops::dropout(t, x_values, opt.dropout, opt.train, mix_seed(opt.dropout_seed, 0, 0));

  std::vector<Var> fixed;
  if (weighting != Weighting::learned) {
    for (const auto& hop : layout.hops) fixed.push_back(t.constant(fixed_weights(hop, weighting)));
  }

  ForwardResult r;
  for (std::size_t m = 0; m < cfg.heads; ++m) {
    Var transformed = ops::sparse_matmul(t, slice.structure, x_values, t.parameter(model.transform(m)));
    Var attention = weighting == Weighting::learned ? t.parameter(model.attention(m)) : Var{};
    std::vector<AttentionVars> att;
    std::vector<Var> hop_out;
    for (std::size_t k = 0; k < c; ++k) {
      AttentionVars av;
      if (weighting == Weighting::learned) {
        av = connection_attention(t, transformed, attention, layout.hops[k], cfg.leaky_slope);
      } else {
        av.alpha = fixed[k];
      }
      Var alpha = ops::dropout(t, av.alpha, opt.dropout, opt.train, mix_seed(opt.dropout_seed, m + 1, k + 1));
      hop_out.push_back(aggregate_hop(t, alpha, transformed, layout.hops[k], cfg.activation));
      att.push_back(av);
    }
    r.mixed.push_back(ops::weighted_sum(t, hop_out, mixture));
    r.attention.push_back(std::move(att));
    r.hop_features.push_back(std::move(hop_out));
  }
  r.concatenated = ops::concat_cols(t, r.mixed);
  r.logits = ops::affine(t, r.concatenated, t.parameter(model.classifier_weight()),
                         t.parameter(model.classifier_bias()));
  r.probabilities = ops::softmax_rows(t, r.logits);
  return r;
}

}  // namespace

ForwardResult dual_attention_forward(Tape& t, const DualAttentionModel& model, const FeatureMatrix& features,
                                     const SubgraphLayout& layout, const ForwardOptions& options) {
  return run_forward(t, model, features, layout, options,
                     options.uniform_attention ? Weighting::uniform : Weighting::learned, options.uniform_hops);
}

ForwardResult plain_convolution_forward(Tape& t, const DualAttentionModel& model, const FeatureMatrix& features,
                                        const SubgraphLayout& layout, const ForwardOptions& options) {
  return run_forward(t, model, features, layout, options, Weighting::edge, true);
}

ForwardResult model_forward(Tape& t, const DualAttentionModel& model, const FeatureMatrix& features,
                            const SubgraphLayout& layout, const ForwardOptions& options) {
  return model.config().arm == Arm::dual_attention
             ? dual_attention_forward(t, model, features, layout, options)
             : plain_convolution_forward(t, model, features, layout, options);
}

Var classification_loss(Tape& t, Var logits, std::span<const std::size_t> rows, std::span<const std::size_t> targets,
                        double lambda, ParameterStore& params) {
  Var ce = ops::cross_entropy(t, logits, rows, targets);
  if (lambda == 0.0) return ce;
  std::vector<Var> vars;
  for (std::size_t i = 0; i < params.size(); ++i) vars.push_back(t.parameter(params[i]));
  return ops::add(t, ce, ops::l2_penalty(t, vars, lambda));
}

std::vector<std::size_t> argmax_rows(const Tensor& scores) {
  std::vector<std::size_t> out(scores.rows());
  const std::size_t f = scores.row_width();
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < f; ++j) {
      if (scores.data[i * f + j] > scores.data[i * f + best]) best = j;
    }
    out[i] = best;
  }
  return out;
}

namespace {
constexpr char kModelMagic[4] = {'D', 'U', 'A', 'M'};
constexpr std::uint32_t kModelVersion = 1;
}  // namespace

std::vector<std::uint8_t> encode_model(const DualAttentionModel& model) {
  const ModelConfig& c = model.config();
  ByteWriter w;
  for (char ch : kModelMagic) w.u8(static_cast<std::uint8_t>(ch));
  w.u32(kModelVersion);
  for (auto v : {c.input_dim, c.head_dim, c.heads, c.hops, c.classes}) w.u32(static_cast<std::uint32_t>(v));
  w.u32(static_cast<std::uint32_t>(c.activation));
  w.u32(static_cast<std::uint32_t>(c.arm));
  w.f64(c.leaky_slope);
  w.f64(c.l2);
  const auto params = encode_parameters(model.parameters());
  w.u64(params.size());
  w.bytes(params);
  w.seal();
  return w.data();
}

DualAttentionModel decode_model(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kModelMagic, 4) != 0) {
    throw FormatError("malformed header: not a model checkpoint");
  }
  auto body = verify_crc_trailer(bytes);
  ByteReader r(body);
  r.bytes(4);
  if (r.u32() != kModelVersion) throw FormatError("malformed header: unsupported model checkpoint version");
  ModelConfig c;
  c.input_dim = r.u32();
  c.head_dim = r.u32();
  c.heads = r.u32();
  c.hops = r.u32();
  c.classes = r.u32();
  const std::uint32_t act = r.u32();
  const std::uint32_t arm = r.u32();
  if (act > 1 || arm > 1) throw FormatError("malformed header: unknown activation or arm");
  c.activation = static_cast<Activation>(act);
  c.arm = static_cast<Arm>(arm);
  c.leaky_slope = r.f64();
  c.l2 = r.f64();
  const std::uint64_t n = r.u64();
  if (n != r.remaining()) throw FormatError("truncated payload: parameter block");
  auto values = decode_parameters(r.bytes(n));
  DualAttentionModel model(c, 0);
  assign_parameters(model.parameters(), values);
  return model;
}

void save_model(const DualAttentionModel& model, const std::string& path) {
  write_file_bytes(path, encode_model(model));
}

DualAttentionModel load_model(const std::string& path) { return decode_model(read_file_bytes(path)); }

}  // namespace duat
