#pragma once

// Dense adjacency built straight from the piecewise edge definition:
//   A_ij = PMI(i,j)      words i, j with PMI > 0
//        = TF-IDF(i,j)   document i, word j (and the symmetric entry)
//        = 1             i == j
//        = 0             otherwise
// Words are indexed in lexicographic order after the documents.

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "window_oracle.hpp"

namespace oracle {

struct DenseGraph {
  std::size_t n_docs = 0;
  std::vector<std::string> words;
  std::vector<std::vector<double>> a;
};

inline DenseGraph dense_graph(const std::vector<std::vector<std::string>>& docs, std::size_t window) {
  DenseGraph g;
  g.n_docs = docs.size();
  std::set<std::string> vocab;
  for (const auto& d : docs) vocab.insert(d.begin(), d.end());
  g.words.assign(vocab.begin(), vocab.end());
  const std::size_t n = g.n_docs + g.words.size();
  g.a.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) g.a[i][i] = 1.0;

  const WindowCounts wc = count_windows(docs, window);
  const double total = static_cast<double>(wc.total);
  for (std::size_t i = 0; i < g.words.size(); ++i) {
    for (std::size_t j = 0; j < g.words.size(); ++j) {
      if (i == j) continue;
      const double wij = static_cast<double>(wc.pair_count(g.words[i], g.words[j]));
      if (wij == 0.0) continue;
      const double pij = wij / total;
      const double pi = static_cast<double>(wc.word.at(g.words[i])) / total;
      const double pj = static_cast<double>(wc.word.at(g.words[j])) / total;
      const double v = std::log(pij / (pi * pj));
      if (v > 0.0) g.a[g.n_docs + i][g.n_docs + j] = v;
    }
  }

  std::map<std::string, double> df;
  for (const auto& d : docs) {
    for (const auto& w : std::set<std::string>(d.begin(), d.end())) df[w] += 1.0;
  }
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (std::size_t j = 0; j < g.words.size(); ++j) {
      double tf = 0.0;
      for (const auto& t : docs[d]) tf += t == g.words[j] ? 1.0 : 0.0;
      const double v = tf * std::log(static_cast<double>(docs.size()) / df[g.words[j]]);
      if (v > 0.0) g.a[d][g.n_docs + j] = g.a[g.n_docs + j][d] = v;
    }
  }
  return g;
}

}  // namespace oracle
