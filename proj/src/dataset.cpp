#include "duat/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace duat {

std::vector<NodeId> DocumentTable::ids(Split s) const {
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < splits.size(); ++i) {
    if (splits[i] == s) out.push_back(static_cast<NodeId>(i));
  }
  return out;
}

DocumentTable DocumentTable::from_corpus(const Corpus& corpus) {
  DocumentTable t;
  t.label_names = corpus.labels;
  for (const auto& d : corpus.documents) {
    t.labels.push_back(d.label);
    t.splits.push_back(d.split);
  }
  return t;
}

void save_document_table(const DocumentTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  for (std::size_t i = 0; i < table.size(); ++i) {
    out << i << '\t' << to_string(table.splits[i]) << '\t' << table.label_names.at(table.labels[i]) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

DocumentTable load_document_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CorpusError(CorpusError::Kind::io, "cannot open " + path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  const std::size_t n = lines.size();
  DocumentTable t;
  t.labels.assign(n, 0);
  t.splits.assign(n, Split::train);
  std::vector<bool> seen(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    std::istringstream ss(lines[i]);
    std::string id_str, split, label;
    if (!std::getline(ss, id_str, '\t') || !std::getline(ss, split, '\t') || !std::getline(ss, label)) {
      throw CorpusError(CorpusError::Kind::malformed_record, path + " line " + std::to_string(i + 1));
    }
    std::size_t id = 0;
    try {
      id = std::stoull(id_str);
    } catch (const std::exception&) {
      throw CorpusError(CorpusError::Kind::malformed_record, path + " line " + std::to_string(i + 1) + ": bad id");
    }
    if (id >= n) throw CorpusError(CorpusError::Kind::id_out_of_range, path + ": id " + id_str);
    if (seen[id]) throw CorpusError(CorpusError::Kind::duplicate_id, path + ": duplicate id " + id_str);
    seen[id] = true;
    if (split == "train") {
      t.splits[id] = Split::train;
    } else if (split == "test") {
      t.splits[id] = Split::test;
    } else {
      throw CorpusError(CorpusError::Kind::unknown_split, path + ": unknown split '" + split + "'");
    }
    auto it = std::find(t.label_names.begin(), t.label_names.end(), label);
    if (it == t.label_names.end()) {
      t.label_names.push_back(label);
      it = t.label_names.end() - 1;
    }
    t.labels[id] = static_cast<std::size_t>(it - t.label_names.begin());
  }
  return t;
}

void Dataset::validate() const {
  if (features.rows() != graph.num_nodes()) {
    throw std::invalid_argument("feature rows (" + std::to_string(features.rows()) + ") != graph nodes (" +
                                std::to_string(graph.num_nodes()) + ")");
  }
  if (documents.size() != graph.num_docs()) {
    throw std::invalid_argument("document table size (" + std::to_string(documents.size()) +
                                ") != graph documents (" + std::to_string(graph.num_docs()) + ")");
  }
  if (documents.num_classes() < 2) throw std::invalid_argument("need at least 2 classes");
}

Dataset build_dataset(const Corpus& corpus, std::size_t window_size) {
  auto stats = collect_window_stats(corpus, window_size);
  Dataset d{build_graph(corpus, stats), {}, DocumentTable::from_corpus(corpus)};
  d.features = FeatureMatrix::identity(d.graph.num_nodes());
  return d;
}

}  // namespace duat
