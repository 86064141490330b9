#pragma once

#include <string>
#include <vector>

#include "duat/corpus.hpp"
#include "duat/features.hpp"
#include "duat/graph.hpp"

namespace duat {

/// Per-document labels and splits, indexed by document node id.
struct DocumentTable {
  std::vector<std::size_t> labels;
  std::vector<Split> splits;
  std::vector<std::string> label_names;

  std::size_t size() const { return labels.size(); }
  std::size_t num_classes() const { return label_names.size(); }
  std::vector<NodeId> ids(Split s) const;

  static DocumentTable from_corpus(const Corpus& corpus);
};

/// Writes `id<TAB>split<TAB>label` lines (the meta-file format).
void save_document_table(const DocumentTable& table, const std::string& path);
DocumentTable load_document_table(const std::string& path);

/// Everything training needs: the graph, node features and document labels.
struct Dataset {
  TextGraph graph;
  FeatureMatrix features;
  DocumentTable documents;

  /// Throws std::invalid_argument when the pieces disagree in size.
  void validate() const;
};

/// Graph over `corpus` with the given window, one-hot features and the
/// corpus labels.
Dataset build_dataset(const Corpus& corpus, std::size_t window_size);

}  // namespace duat
