#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace duat::synthetic {

/// Raw text and meta lines in the on-disk corpus format.
struct RawCorpus {
  std::vector<std::string> texts;
  std::vector<std::string> meta;

  void save(const std::string& texts_path, const std::string& meta_path) const;
};

/// 40 documents, two classes with disjoint vocabularies, 30 train / 10 test.
RawCorpus separable(std::uint64_t seed = 0);

/// Two classes. Each document holds three single-occurrence cue words from a
/// small class-specific pool (so cues co-occur only with cues of their own
/// class) and two label-free rare words repeated six times each. TF-IDF puts
/// most edge weight on the rare words; the label lives in the cue
/// neighborhood.
RawCorpus cooccurrence(std::uint64_t seed, std::size_t n_docs = 80);

/// `n_docs` documents over `classes` overlapping topics (each topic has a
/// preferred word range plus shared background words), roughly 70/30 split.
RawCorpus topics(std::uint64_t seed, std::size_t n_docs, std::size_t classes);

}  // namespace duat::synthetic
