#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "duat/corpus.hpp"
#include "duat/dataset.hpp"
#include "duat/graph.hpp"
#include "duat/synthetic.hpp"

namespace testing {

namespace fs = std::filesystem;

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("duat_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

inline void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << body;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Lowercasing and punctuation stripping only, so one-letter toy words survive.
inline duat::CleaningRules plain_rules() { return duat::CleaningRules{}; }

/// Corpus from raw lines; every document goes to `split`, labels alternate.
inline duat::Corpus toy_corpus(const std::vector<std::string>& texts, std::size_t min_freq = 1) {
  std::vector<std::string> meta;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    meta.push_back(std::to_string(i) + "\ttrain\t" + (i % 2 ? "odd" : "even"));
  }
  return duat::make_corpus(texts, meta, plain_rules(), min_freq);
}

/// Random toy corpus: up to `max_docs` documents over a `max_words` alphabet.
inline std::vector<std::string> random_texts(std::mt19937_64& rng, std::size_t max_docs, std::size_t max_words,
                                             std::size_t max_len = 30) {
  std::uniform_int_distribution<std::size_t> docs(2, max_docs), words(2, max_words), len(1, max_len);
  const std::size_t n_docs = docs(rng), n_words = words(rng);
  std::uniform_int_distribution<std::size_t> pick(0, n_words - 1);
  std::vector<std::string> texts;
  for (std::size_t d = 0; d < n_docs; ++d) {
    std::string t;
    const std::size_t n = len(rng);
    for (std::size_t k = 0; k < n; ++k) t += (k ? " w" : "w") + std::to_string(pick(rng));
    texts.push_back(t);
  }
  return texts;
}

inline std::vector<std::vector<std::string>> token_lists(const duat::Corpus& c) {
  std::vector<std::vector<std::string>> out;
  for (const auto& d : c.documents) out.push_back(d.tokens);
  return out;
}

/// Symmetric random graph over `n` document nodes: self-loops of weight 1
/// plus up to `extra` random neighbors per node. Edge weights are drawn from
/// [0.2, 2) unless `uniform_weights`, in which case every entry weighs 1.
inline duat::TextGraph random_graph(std::size_t n, std::size_t extra, std::mt19937_64& rng,
                                    bool uniform_weights = false) {
  std::vector<std::map<duat::NodeId, double>> adj(n);
  std::uniform_int_distribution<duat::NodeId> pick(0, static_cast<duat::NodeId>(n - 1));
  std::uniform_real_distribution<double> weight(0.2, 2.0);
  for (duat::NodeId i = 0; i < n; ++i) {
    adj[i][i] = 1.0;
    for (std::size_t e = 0; e < extra; ++e) {
      const duat::NodeId j = pick(rng);
      if (j == i) continue;
      const double w = uniform_weights ? 1.0 : weight(rng);
      adj[i][j] = w;
      adj[j][i] = w;
    }
  }
  std::vector<std::size_t> offsets{0};
  std::vector<duat::Neighbor> nb;
  for (const auto& row : adj) {
    for (const auto& [j, w] : row) nb.push_back({j, w});
    offsets.push_back(nb.size());
  }
  return duat::TextGraph(n, 0, offsets, nb);
}

/// Dataset from a generated corpus with no stop-word filtering.
inline duat::Dataset synthetic_dataset(const duat::synthetic::RawCorpus& raw, std::size_t window,
                                       std::size_t min_freq = 1) {
  return duat::build_dataset(duat::make_corpus(raw.texts, raw.meta, plain_rules(), min_freq), window);
}

}  // namespace testing
