#pragma once

#include <cmath>
#include <string>

#include "duat/graph.hpp"
#include "oracles/dense_graph_oracle.hpp"

namespace testing {

/// Largest |A_ij - oracle_ij| over all node pairs, or +inf when the node
/// universes disagree.
inline double graph_mismatch(const duat::Corpus& corpus, const duat::TextGraph& g, const oracle::DenseGraph& o) {
  if (g.num_docs() != o.n_docs || g.num_words() != o.words.size()) return INFINITY;
  for (std::size_t w = 0; w < o.words.size(); ++w) {
    if (corpus.vocabulary.word(w) != o.words[w]) return INFINITY;
  }
  double worst = 0.0;
  for (duat::NodeId i = 0; i < g.num_nodes(); ++i) {
    for (duat::NodeId j = 0; j < g.num_nodes(); ++j) {
      const double got = g.weight(i, j).value_or(0.0);
      const bool stored = g.weight(i, j).has_value();
      // An absent entry must be a zero of the oracle and vice versa.
      if (stored != (o.a[i][j] != 0.0)) return INFINITY;
      worst = std::max(worst, std::abs(got - o.a[i][j]));
    }
  }
  return worst;
}

}  // namespace testing
