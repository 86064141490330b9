#include <random>
#include <stdexcept>
#include <unordered_set>

#include "duat/graph.hpp"

namespace duat {

std::size_t SampledSubgraph::slots_per_center(std::size_t hop) const {
  std::size_t s = 1;
  for (std::size_t k = 0; k < hop; ++k) s *= fanout;
  return s;
}

std::span<const NodeId> SampledSubgraph::block(std::size_t center_index, std::size_t hop) const {
  const std::size_t len = slots_per_center(hop);
  return std::span<const NodeId>(hop_nodes.at(hop - 1)).subspan(center_index * len, len);
}

std::span<const double> SampledSubgraph::block_weights(std::size_t center_index, std::size_t hop) const {
  const std::size_t len = slots_per_center(hop);
  return std::span<const double>(hop_weights.at(hop - 1)).subspan(center_index * len, len);
}

SampledSubgraph sample_k_hop(const TextGraph& graph, std::span<const NodeId> centers,
                             const SamplingOptions& options, std::uint64_t seed) {
  if (options.fanout < 1) throw std::invalid_argument("fanout must be >= 1");
  if (options.hops < 1 || options.hops > 3) throw std::invalid_argument("hops must be in 1..3");
  for (NodeId c : centers) {
    if (c >= graph.num_nodes()) throw std::out_of_range("center id " + std::to_string(c) + " out of range");
  }

  SampledSubgraph sub;
  sub.centers.assign(centers.begin(), centers.end());
  sub.hops = options.hops;
  sub.fanout = options.fanout;
  sub.seed = seed;

  std::vector<std::mt19937_64> rngs;
  rngs.reserve(centers.size());
  for (NodeId c : centers) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(c)};
    rngs.emplace_back(seq);
  }

  const std::size_t cap = options.max_distinct_nodes;
  std::unordered_set<NodeId> materialized;
  if (cap > 0) materialized.insert(centers.begin(), centers.end());

  std::vector<NodeId> previous(centers.begin(), centers.end());
  std::size_t prev_per_center = 1;
  for (std::size_t hop = 1; hop <= options.hops; ++hop) {
    const std::size_t per_center = prev_per_center * options.fanout;
    std::vector<NodeId> nodes(centers.size() * per_center);
    std::vector<double> weights(nodes.size());
    // Round-robin over centers so a distinct-node cap is shared fairly.
    for (std::size_t slot = 0; slot < per_center; ++slot) {
      for (std::size_t c = 0; c < centers.size(); ++c) {
        const NodeId parent = previous[c * prev_per_center + slot / options.fanout];
        auto list = graph.neighbors(parent);
        if (list.empty()) throw std::invalid_argument("node " + std::to_string(parent) + " has no neighbors");
        std::uniform_int_distribution<std::size_t> pick(0, list.size() - 1);
        Neighbor drawn = list[pick(rngs[c])];
        if (cap > 0 && !materialized.contains(drawn.id)) {
          if (materialized.size() >= cap) {
            drawn = {parent, graph.weight(parent, parent).value_or(1.0)};
          } else {
            materialized.insert(drawn.id);
          }
        }
        nodes[c * per_center + slot] = drawn.id;
        weights[c * per_center + slot] = drawn.weight;
      }
    }
    previous = nodes;
    prev_per_center = per_center;
    sub.hop_nodes.push_back(std::move(nodes));
    sub.hop_weights.push_back(std::move(weights));
  }
  return sub;
}

}  // namespace duat
