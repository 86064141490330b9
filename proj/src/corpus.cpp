#include "duat/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace duat {

namespace detail {
extern const char* const kBundledStopWords;
}

std::string_view to_string(Split s) { return s == Split::train ? "train" : "test"; }

namespace {

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.emplace_back(line);
    start = end + 1;
  }
  return lines;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError(CorpusError::Kind::io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return split_lines(ss.str());
}

bool is_ascii_alnum(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

}  // namespace

const std::vector<std::string>& bundled_stop_words() {
  static const std::vector<std::string> words = [] {
    std::vector<std::string> out;
    for (auto& line : split_lines(detail::kBundledStopWords)) {
      if (!line.empty()) out.push_back(line);
    }
    return out;
  }();
  return words;
}

CleaningRules CleaningRules::english() {
  CleaningRules rules;
  const auto& words = bundled_stop_words();
  rules.stop_words.insert(words.begin(), words.end());
  return rules;
}

CleaningRules CleaningRules::with_stop_word_file(const std::string& path) {
  CleaningRules rules;
  for (auto& line : read_lines(path)) {
    if (!line.empty()) rules.stop_words.insert(line);
  }
  return rules;
}

std::vector<std::string> clean_and_tokenize(std::string_view raw, const CleaningRules& rules) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      if (!rules.stop_words.contains(current)) tokens.push_back(current);
      current.clear();
    }
  };
  for (unsigned char c : raw) {
    const bool separator = rules.strip_punctuation ? !is_ascii_alnum(c) : is_space(c);
    if (separator) {
      flush();
      continue;
    }
    if (rules.lowercase && c >= 'A' && c <= 'Z') c = static_cast<unsigned char>(c - 'A' + 'a');
    current.push_back(static_cast<char>(c));
  }
  flush();
  return tokens;
}

Vocabulary::Vocabulary(std::vector<std::string> words, std::vector<std::size_t> doc_freq,
                       std::vector<std::size_t> occurrences)
    : words_(std::move(words)), doc_freq_(std::move(doc_freq)), occurrences_(std::move(occurrences)) {
  if (doc_freq_.size() != words_.size() || occurrences_.size() != words_.size()) {
    throw std::invalid_argument("vocabulary statistics size mismatch");
  }
  index_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!index_.emplace(words_[i], i).second) {
      throw std::invalid_argument("duplicate vocabulary word: " + words_[i]);
    }
  }
}

bool Vocabulary::contains(std::string_view w) const { return index_.contains(std::string(w)); }

std::size_t Vocabulary::index(std::string_view w) const {
  auto it = index_.find(std::string(w));
  if (it == index_.end()) throw std::out_of_range("word not in vocabulary: " + std::string(w));
  return it->second;
}

std::vector<std::size_t> Corpus::ids_in(Split s) const {
  std::vector<std::size_t> ids;
  for (const auto& d : documents) {
    if (d.split == s) ids.push_back(d.id);
  }
  return ids;
}

Vocabulary build_vocabulary(std::vector<Document>& documents, std::size_t min_freq) {
  if (min_freq < 1) throw std::invalid_argument("min_freq must be >= 1");
  std::map<std::string, std::pair<std::size_t, std::size_t>> stats;  // df, occurrences
  for (const auto& doc : documents) {
    std::set<std::string_view> seen;
    for (const auto& tok : doc.tokens) {
      auto& entry = stats[tok];
      entry.second += 1;
      if (seen.insert(tok).second) entry.first += 1;
    }
  }
  std::vector<std::string> words;
  std::vector<std::size_t> df;
  std::vector<std::size_t> occ;
  for (auto& [word, s] : stats) {
    if (s.first >= min_freq) {
      words.push_back(word);
      df.push_back(s.first);
      occ.push_back(s.second);
    }
  }
  if (words.empty()) {
    throw CorpusError(CorpusError::Kind::empty_vocabulary,
                      "no word reaches min_freq=" + std::to_string(min_freq));
  }
  Vocabulary vocab(std::move(words), std::move(df), std::move(occ));
  for (auto& doc : documents) {
    std::erase_if(doc.tokens, [&](const std::string& t) { return !vocab.contains(t); });
  }
  return vocab;
}

Corpus make_corpus(const std::vector<std::string>& texts, const std::vector<std::string>& meta_lines,
                   const CleaningRules& rules, std::size_t min_freq) {
  using Kind = CorpusError::Kind;
  if (texts.size() != meta_lines.size()) {
    throw CorpusError(Kind::line_count_mismatch,
                      "line-count mismatch: " + std::to_string(texts.size()) + " text lines vs " +
                          std::to_string(meta_lines.size()) + " meta lines");
  }
  const std::size_t n = texts.size();
  Corpus corpus;
  corpus.documents.resize(n);
  std::vector<bool> filled(n, false);
  std::unordered_map<std::string, std::size_t> label_index;

  for (std::size_t line = 0; line < n; ++line) {
    const std::string& rec = meta_lines[line];
    const std::string where = "meta line " + std::to_string(line + 1);
    auto t1 = rec.find('\t');
    auto t2 = t1 == std::string::npos ? std::string::npos : rec.find('\t', t1 + 1);
    if (t2 == std::string::npos || rec.find('\t', t2 + 1) != std::string::npos) {
      throw CorpusError(Kind::malformed_record, where + ": expected id<TAB>split<TAB>label");
    }
    const std::string id_str = rec.substr(0, t1);
    const std::string split_str = rec.substr(t1 + 1, t2 - t1 - 1);
    const std::string label = rec.substr(t2 + 1);

    std::size_t id = 0;
    std::size_t consumed = 0;
    try {
      id = std::stoull(id_str, &consumed);
    } catch (const std::exception&) {
      consumed = 0;
    }
    if (consumed == 0 || consumed != id_str.size()) {
      throw CorpusError(Kind::malformed_record, where + ": bad id '" + id_str + "'");
    }
    if (id >= n) {
      throw CorpusError(Kind::id_out_of_range,
                        where + ": id " + id_str + " outside 0.." + std::to_string(n - 1));
    }
    if (filled[id]) throw CorpusError(Kind::duplicate_id, where + ": duplicate id " + id_str);
    Split split;
    if (split_str == "train") {
      split = Split::train;
    } else if (split_str == "test") {
      split = Split::test;
    } else {
      throw CorpusError(Kind::unknown_split, where + ": unknown split '" + split_str + "'");
    }
    if (label.empty()) throw CorpusError(Kind::malformed_record, where + ": empty label");

    auto [it, inserted] = label_index.emplace(label, corpus.labels.size());
    if (inserted) corpus.labels.push_back(label);

    Document& doc = corpus.documents[id];
    doc.id = id;
    doc.split = split;
    doc.label = it->second;
    doc.tokens = clean_and_tokenize(texts[line], rules);
    filled[id] = true;
  }
  if (corpus.labels.size() < 2) {
    throw CorpusError(Kind::too_few_labels, "corpus needs at least 2 labels, found " +
                                                std::to_string(corpus.labels.size()));
  }
  corpus.vocabulary = build_vocabulary(corpus.documents, min_freq);
  return corpus;
}

Corpus load_corpus(const std::string& texts_path, const std::string& meta_path,
                   const CleaningRules& rules, std::size_t min_freq) {
  return make_corpus(read_lines(texts_path), read_lines(meta_path), rules, min_freq);
}

std::string serialize_corpus(const Corpus& corpus) {
  std::ostringstream out;
  out << "labels";
  for (const auto& l : corpus.labels) out << '\t' << l;
  out << "\nvocabulary " << corpus.vocabulary.size() << '\n';
  for (std::size_t i = 0; i < corpus.vocabulary.size(); ++i) {
    out << corpus.vocabulary.word(i) << '\t' << corpus.vocabulary.doc_freq(i) << '\t'
        << corpus.vocabulary.occurrences(i) << '\n';
  }
  out << "documents " << corpus.documents.size() << '\n';
  for (const auto& d : corpus.documents) {
    out << d.id << '\t' << to_string(d.split) << '\t' << d.label << '\t';
    for (std::size_t i = 0; i < d.tokens.size(); ++i) out << (i ? " " : "") << d.tokens[i];
    out << '\n';
  }
  return out.str();
}

}  // namespace duat
