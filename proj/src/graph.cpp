#include "duat/graph.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace duat {

CooccurrenceStats::CooccurrenceStats(std::size_t window_size, std::size_t vocab_size)
    : window_size_(window_size), word_windows_(vocab_size, 0) {}

std::uint64_t CooccurrenceStats::pair_windows(std::size_t i, std::size_t j) const {
  if (i == j) return 0;
  if (i > j) std::swap(i, j);
  auto it = pair_windows_.find(key(i, j));
  return it == pair_windows_.end() ? 0 : it->second;
}

std::vector<std::pair<std::pair<std::size_t, std::size_t>, std::uint64_t>>
CooccurrenceStats::sorted_pairs() const {
  std::vector<std::pair<std::pair<std::size_t, std::size_t>, std::uint64_t>> out;
  out.reserve(pair_windows_.size());
  for (const auto& [k, count] : pair_windows_) {
    out.push_back({{static_cast<std::size_t>(k >> 32), static_cast<std::size_t>(k & 0xffffffffu)}, count});
  }
  std::sort(out.begin(), out.end());
  return out;
}

void CooccurrenceStats::merge(const CooccurrenceStats& other) {
  if (other.window_size_ != window_size_ || other.word_windows_.size() != word_windows_.size()) {
    throw std::invalid_argument("cannot merge co-occurrence stats of different shapes");
  }
  total_windows_ += other.total_windows_;
  for (std::size_t w = 0; w < word_windows_.size(); ++w) word_windows_[w] += other.word_windows_[w];
  for (const auto& [k, count] : other.pair_windows_) pair_windows_[k] += count;
}

void CooccurrenceStats::add_window(std::span<const std::uint32_t> words) {
  ++total_windows_;
  for (std::size_t a = 0; a < words.size(); ++a) {
    ++word_windows_[words[a]];
    for (std::size_t b = a + 1; b < words.size(); ++b) ++pair_windows_[key(words[a], words[b])];
  }
}

namespace {

void count_document(const Document& doc, const Vocabulary& vocab, std::size_t window,
                    CooccurrenceStats& out, std::vector<std::uint32_t>& ids,
                    std::vector<std::uint32_t>& scratch) {
  ids.clear();
  for (const auto& tok : doc.tokens) ids.push_back(static_cast<std::uint32_t>(vocab.index(tok)));
  const std::size_t len = ids.size();
  const std::size_t n_windows = len > window ? len - window + 1 : 1;
  const std::size_t span_len = std::min(window, len);
  for (std::size_t start = 0; start < n_windows; ++start) {
    scratch.assign(ids.begin() + static_cast<std::ptrdiff_t>(start),
                   ids.begin() + static_cast<std::ptrdiff_t>(start + span_len));
    std::sort(scratch.begin(), scratch.end());
    scratch.erase(std::unique(scratch.begin(), scratch.end()), scratch.end());
    out.add_window(scratch);
  }
}

}  // namespace

CooccurrenceStats collect_window_stats(const Corpus& corpus, std::size_t window_size, bool parallel) {
  if (window_size < 1) throw std::invalid_argument("window_size must be >= 1");
  const std::size_t v = corpus.vocabulary.size();
  const auto& docs = corpus.documents;
  if (!parallel) {
    CooccurrenceStats stats(window_size, v);
    std::vector<std::uint32_t> ids, scratch;
    for (const auto& doc : docs) count_document(doc, corpus.vocabulary, window_size, stats, ids, scratch);
    return stats;
  }

  const int threads = omp_get_max_threads();
  std::vector<CooccurrenceStats> partial(static_cast<std::size_t>(threads),
                                         CooccurrenceStats(window_size, v));
#pragma omp parallel num_threads(threads)
  {
    auto& local = partial[static_cast<std::size_t>(omp_get_thread_num())];
    std::vector<std::uint32_t> ids, scratch;
#pragma omp for schedule(dynamic, 16)
    for (std::size_t d = 0; d < docs.size(); ++d) {
      count_document(docs[d], corpus.vocabulary, window_size, local, ids, scratch);
    }
  }
  CooccurrenceStats stats(window_size, v);
  for (const auto& p : partial) stats.merge(p);
  return stats;
}

std::optional<double> pmi(const CooccurrenceStats& stats, std::size_t i, std::size_t j) {
  const auto joint = stats.pair_windows(i, j);
  if (joint == 0) return std::nullopt;
  const double w = static_cast<double>(stats.total_windows());
  const double p_ij = static_cast<double>(joint) / w;
  const double p_i = static_cast<double>(stats.word_windows(i)) / w;
  const double p_j = static_cast<double>(stats.word_windows(j)) / w;
  return std::log(p_ij / (p_i * p_j));
}

double tf_idf(const Corpus& corpus, std::size_t doc_id, std::size_t word) {
  const auto& target = corpus.vocabulary.word(word);
  const auto& tokens = corpus.documents.at(doc_id).tokens;
  const auto n = static_cast<double>(std::count(tokens.begin(), tokens.end(), target));
  if (n == 0.0) return 0.0;
  const double n_docs = static_cast<double>(corpus.documents.size());
  return n * std::log(n_docs / static_cast<double>(corpus.vocabulary.doc_freq(word)));
}

TextGraph::TextGraph(std::size_t n_docs, std::size_t n_words, std::vector<std::size_t> offsets,
                     std::vector<Neighbor> neighbors)
    : n_docs_(n_docs), n_words_(n_words), offsets_(std::move(offsets)), neighbors_(std::move(neighbors)) {
  if (offsets_.size() != n_docs_ + n_words_ + 1 || offsets_.front() != 0 ||
      offsets_.back() != neighbors_.size()) {
    throw std::invalid_argument("TextGraph offsets do not match node/entry counts");
  }
  for (std::size_t i = 0; i + 1 < offsets_.size(); ++i) {
    if (offsets_[i] > offsets_[i + 1]) throw std::invalid_argument("TextGraph offsets not monotone");
  }
  for (const auto& nb : neighbors_) {
    if (nb.id >= num_nodes()) throw std::invalid_argument("TextGraph neighbor id out of range");
  }
}

std::optional<double> TextGraph::weight(NodeId node, NodeId neighbor) const {
  auto list = neighbors(node);
  auto it = std::lower_bound(list.begin(), list.end(), neighbor,
                             [](const Neighbor& n, NodeId id) { return n.id < id; });
  if (it == list.end() || it->id != neighbor) return std::nullopt;
  return it->weight;
}

TextGraph build_graph(const Corpus& corpus, const CooccurrenceStats& stats) {
  const std::size_t n_docs = corpus.documents.size();
  const std::size_t n_words = corpus.vocabulary.size();
  if (stats.vocab_size() != n_words) {
    throw std::invalid_argument("co-occurrence stats were computed for a different vocabulary");
  }
  const std::size_t n = n_docs + n_words;
  std::vector<std::vector<Neighbor>> adj(n);
  for (std::size_t i = 0; i < n; ++i) adj[i].push_back({static_cast<NodeId>(i), 1.0});

  for (const auto& [pair, count] : stats.sorted_pairs()) {
    (void)count;
    const auto weight = pmi(stats, pair.first, pair.second);
    if (weight && *weight > 0.0) {
      const auto a = static_cast<NodeId>(n_docs + pair.first);
      const auto b = static_cast<NodeId>(n_docs + pair.second);
      adj[a].push_back({b, *weight});
      adj[b].push_back({a, *weight});
    }
  }

  const double total_docs = static_cast<double>(n_docs);
  for (const auto& doc : corpus.documents) {
    std::map<std::size_t, std::size_t> counts;
    for (const auto& tok : doc.tokens) ++counts[corpus.vocabulary.index(tok)];
    for (const auto& [word, tf] : counts) {
      const double idf = std::log(total_docs / static_cast<double>(corpus.vocabulary.doc_freq(word)));
      const double weight = static_cast<double>(tf) * idf;
      if (weight > 0.0) {
        const auto d = static_cast<NodeId>(doc.id);
        const auto w = static_cast<NodeId>(n_docs + word);
        adj[d].push_back({w, weight});
        adj[w].push_back({d, weight});
      }
    }
  }

  std::vector<std::size_t> offsets{0};
  offsets.reserve(n + 1);
  std::vector<Neighbor> flat;
  for (auto& list : adj) {
    std::sort(list.begin(), list.end(), [](const Neighbor& a, const Neighbor& b) { return a.id < b.id; });
    flat.insert(flat.end(), list.begin(), list.end());
    offsets.push_back(flat.size());
  }
  return TextGraph(n_docs, n_words, std::move(offsets), std::move(flat));
}

}  // namespace duat
