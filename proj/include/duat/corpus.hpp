#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace duat {

enum class Split : std::uint8_t { train, test };

std::string_view to_string(Split s);

/// Text cleaning applied before vocabulary construction.
///
/// Defaults: ASCII lowercasing, every byte that is not [A-Za-z0-9] becomes a
/// token separator (so "well-known" yields "well" and "known", and "don't"
/// yields "don" and "t"), then tokens in the stop-word set are dropped.
struct CleaningRules {
  bool lowercase = true;
  bool strip_punctuation = true;
  std::unordered_set<std::string> stop_words;

  /// Rules with the bundled 179-word English stop list.
  static CleaningRules english();
  /// Same rules, stop words read from a file with one word per line.
  static CleaningRules with_stop_word_file(const std::string& path);
};

/// The bundled stop-word list, in file order.
const std::vector<std::string>& bundled_stop_words();

std::vector<std::string> clean_and_tokenize(std::string_view raw, const CleaningRules& rules);

struct Document {
  std::size_t id = 0;
  std::vector<std::string> tokens;
  std::size_t label = 0;
  Split split = Split::train;
};

class Vocabulary {
 public:
  Vocabulary() = default;
  /// Words must be unique; indices follow the given order.
  Vocabulary(std::vector<std::string> words, std::vector<std::size_t> doc_freq,
             std::vector<std::size_t> occurrences);

  std::size_t size() const { return words_.size(); }
  bool contains(std::string_view w) const;
  /// Throws std::out_of_range for unknown words.
  std::size_t index(std::string_view w) const;
  const std::string& word(std::size_t i) const { return words_.at(i); }
  const std::vector<std::string>& words() const { return words_; }
  std::size_t doc_freq(std::size_t i) const { return doc_freq_.at(i); }
  std::size_t occurrences(std::size_t i) const { return occurrences_.at(i); }

 private:
  std::vector<std::string> words_;
  std::vector<std::size_t> doc_freq_;
  std::vector<std::size_t> occurrences_;
  std::unordered_map<std::string, std::size_t> index_;
};

class CorpusError : public std::runtime_error {
 public:
  enum class Kind {
    io,
    line_count_mismatch,
    malformed_record,
    unknown_split,
    duplicate_id,
    id_out_of_range,
    empty_vocabulary,
    too_few_labels,
  };
  CorpusError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct Corpus {
  std::vector<Document> documents;  // documents[i].id == i
  Vocabulary vocabulary;
  std::vector<std::string> labels;  // first-appearance order

  std::size_t num_classes() const { return labels.size(); }
  std::vector<std::size_t> ids_in(Split s) const;
};

/// Keeps words whose document frequency is at least `min_freq`, sorted
/// lexicographically, and removes every other token from `documents`.
/// Throws CorpusError(empty_vocabulary) when nothing survives.
Vocabulary build_vocabulary(std::vector<Document>& documents, std::size_t min_freq);

/// Reads `texts_path` (one document per line) and `meta_path`
/// (`id<TAB>split<TAB>label` per line, same line count). Line i of the meta
/// file describes line i of the texts file; ids must be a permutation of
/// 0..N-1.
Corpus load_corpus(const std::string& texts_path, const std::string& meta_path,
                   const CleaningRules& rules, std::size_t min_freq);

/// Same as load_corpus, from in-memory lines.
Corpus make_corpus(const std::vector<std::string>& texts, const std::vector<std::string>& meta_lines,
                   const CleaningRules& rules, std::size_t min_freq);

/// Canonical text form used for determinism checks.
std::string serialize_corpus(const Corpus& corpus);

}  // namespace duat
