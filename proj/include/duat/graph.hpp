#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "duat/corpus.hpp"

namespace duat {

using NodeId = std::uint32_t;

/// Sliding-window co-occurrence counts over a corpus. Windows never cross
/// document boundaries and count word presence, not multiplicity.
class CooccurrenceStats {
 public:
  CooccurrenceStats() = default;
  CooccurrenceStats(std::size_t window_size, std::size_t vocab_size);

  std::size_t window_size() const { return window_size_; }
  std::uint64_t total_windows() const { return total_windows_; }
  std::uint64_t word_windows(std::size_t w) const { return word_windows_.at(w); }
  /// W(i,j); symmetric, 0 for unseen pairs and for i == j.
  std::uint64_t pair_windows(std::size_t i, std::size_t j) const;
  std::size_t vocab_size() const { return word_windows_.size(); }

  /// Pairs (i < j) with a nonzero count, sorted by (i, j).
  std::vector<std::pair<std::pair<std::size_t, std::size_t>, std::uint64_t>> sorted_pairs() const;

  /// Adds the counts of `other` (same window and vocabulary size).
  void merge(const CooccurrenceStats& other);

  // Accumulation interface used by collect_window_stats.
  void add_window(std::span<const std::uint32_t> unique_sorted_words);

 private:
  static std::uint64_t key(std::size_t i, std::size_t j) {
    return (static_cast<std::uint64_t>(i) << 32) | static_cast<std::uint64_t>(j);
  }
  std::size_t window_size_ = 0;
  std::uint64_t total_windows_ = 0;
  std::vector<std::uint64_t> word_windows_;
  std::unordered_map<std::uint64_t, std::uint64_t> pair_windows_;  // key(i<j)
};

/// Counts windows per document in parallel (OpenMP) with an order-independent
/// integer merge. `parallel=false` runs the serial reference loop.
CooccurrenceStats collect_window_stats(const Corpus& corpus, std::size_t window_size,
                                       bool parallel = true);

/// Natural-log PMI of two distinct words, or nullopt when W(i,j) == 0.
std::optional<double> pmi(const CooccurrenceStats& stats, std::size_t i, std::size_t j);

/// n_ij * ln(|D| / df(word)); 0 when the word does not occur in the document.
double tf_idf(const Corpus& corpus, std::size_t doc_id, std::size_t word);

struct Neighbor {
  NodeId id;
  double weight;
  bool operator==(const Neighbor&) const = default;
};

/// Heterogeneous document/word graph stored as a neighbor index. Documents
/// occupy ids 0..n_docs-1, words n_docs..n_docs+n_words-1. Every node holds a
/// self-loop of weight 1; neighbor lists are sorted by id.
class TextGraph {
 public:
  TextGraph() = default;
  TextGraph(std::size_t n_docs, std::size_t n_words, std::vector<std::size_t> offsets,
            std::vector<Neighbor> neighbors);

  std::size_t num_docs() const { return n_docs_; }
  std::size_t num_words() const { return n_words_; }
  std::size_t num_nodes() const { return n_docs_ + n_words_; }
  std::size_t num_entries() const { return neighbors_.size(); }

  std::span<const Neighbor> neighbors(NodeId node) const {
    return {neighbors_.data() + offsets_[node], offsets_[node + 1] - offsets_[node]};
  }
  NodeId word_node(std::size_t word) const { return static_cast<NodeId>(n_docs_ + word); }
  bool is_doc(NodeId node) const { return node < n_docs_; }
  /// Weight of the (node, neighbor) entry, or nullopt when absent.
  std::optional<double> weight(NodeId node, NodeId neighbor) const;

  bool operator==(const TextGraph&) const = default;

 private:
  std::size_t n_docs_ = 0;
  std::size_t n_words_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<Neighbor> neighbors_;
};

/// Builds the adjacency: self-loops (1), word-word PMI when > 0, and
/// symmetric doc-word TF-IDF when > 0.
TextGraph build_graph(const Corpus& corpus, const CooccurrenceStats& stats);

/// Binary format (little-endian): magic "DUAG", u32 version, u32 n_docs,
/// u32 n_words, then per node u32 count and count x (u32 id, f32 weight),
/// then a CRC32 of all preceding bytes.
std::vector<std::uint8_t> encode_graph(const TextGraph& graph);
TextGraph decode_graph(std::span<const std::uint8_t> bytes);
void save_graph(const TextGraph& graph, const std::string& path);
TextGraph load_graph(const std::string& path);

/// Fixed-fanout k-hop sample around a set of centers.
///
/// hop_nodes[k-1] is center-major: center c owns the contiguous block
/// [c * fanout^k, (c+1) * fanout^k). Within a block, entry p was drawn from
/// the neighbor list of hop k-1 entry p / fanout (hop 0 is the center).
/// hop_weights holds the graph weight of the edge each entry was drawn along.
struct SampledSubgraph {
  std::vector<NodeId> centers;
  std::size_t hops = 0;
  std::size_t fanout = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<NodeId>> hop_nodes;
  std::vector<std::vector<double>> hop_weights;

  std::size_t slots_per_center(std::size_t hop) const;
  std::span<const NodeId> block(std::size_t center_index, std::size_t hop) const;
  std::span<const double> block_weights(std::size_t center_index, std::size_t hop) const;
};

struct SamplingOptions {
  std::size_t fanout = 70;
  std::size_t hops = 1;
  /// Cap on distinct nodes materialized for the whole call (centers
  /// included); 0 disables it. Once reached, a draw that would introduce a
  /// new node falls back to the parent node through its self-loop.
  std::size_t max_distinct_nodes = 0;
};

/// Draws uniformly with replacement from each parent's neighbor list
/// (self-loop included). Each center uses its own generator derived from
/// (seed, center id), so a center's sample does not depend on its batch
/// unless the distinct-node cap intervenes.
SampledSubgraph sample_k_hop(const TextGraph& graph, std::span<const NodeId> centers,
                             const SamplingOptions& options, std::uint64_t seed);

}  // namespace duat
