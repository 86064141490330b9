#include "duat/synthetic.hpp"

#include <fstream>
#include <random>
#include <stdexcept>

namespace duat::synthetic {

namespace {

std::string meta_line(std::size_t id, bool train, const std::string& label) {
  return std::to_string(id) + (train ? "\ttrain\t" : "\ttest\t") + label;
}

void append(std::string& text, const std::string& word) {
  if (!text.empty()) text += ' ';
  text += word;
}

}  // namespace

void RawCorpus::save(const std::string& texts_path, const std::string& meta_path) const {
  std::ofstream t(texts_path, std::ios::trunc), m(meta_path, std::ios::trunc);
  if (!t || !m) throw std::runtime_error("cannot write synthetic corpus");
  for (const auto& s : texts) t << s << '\n';
  for (const auto& s : meta) m << s << '\n';
}

RawCorpus separable(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> word(0, 9);
  RawCorpus c;
  for (std::size_t i = 0; i < 40; ++i) {
    const bool cls = i % 2 == 1;
    std::string text;
    for (int k = 0; k < 12; ++k) append(text, (cls ? "zeph" : "kol") + std::to_string(word(rng)));
    c.texts.push_back(text);
    c.meta.push_back(meta_line(i, i < 30, cls ? "beta" : "alpha"));
  }
  return c;
}

RawCorpus cooccurrence(std::uint64_t seed, std::size_t n_docs) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> cue(0, 3);
  std::uniform_int_distribution<int> rare(0, 39);
  RawCorpus c;
  for (std::size_t i = 0; i < n_docs; ++i) {
    const int cls = static_cast<int>(i % 2);
    const std::string tag = cls ? "vo" : "ru";
    std::string text;
    // Rare label-free words repeated often: they get the heaviest TF-IDF
    // edges while cue words, shared across a class, get light ones.
    for (int k = 0; k < 2; ++k) {
      const std::string w = "rare" + std::to_string(rare(rng));
      for (int r = 0; r < 6; ++r) append(text, w);
      append(text, tag + "cue" + std::to_string(cue(rng)));
    }
    append(text, tag + "cue" + std::to_string(cue(rng)));
    c.texts.push_back(text);
    c.meta.push_back(meta_line(i, i < n_docs * 6 / 10, cls ? "vo" : "ru"));
  }
  return c;
}

RawCorpus topics(std::uint64_t seed, std::size_t n_docs, std::size_t classes) {
  if (classes < 2) throw std::invalid_argument("topics: need at least 2 classes");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> length(15, 40);
  std::uniform_int_distribution<int> topic_word(0, 24);
  std::uniform_int_distribution<int> background(0, 59);
  std::bernoulli_distribution on_topic(0.45);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RawCorpus c;
  for (std::size_t i = 0; i < n_docs; ++i) {
    const std::size_t cls = i % classes;
    std::string text;
    const int n = length(rng);
    for (int k = 0; k < n; ++k) {
      if (on_topic(rng)) {
        append(text, "topic" + std::to_string(cls) + "w" + std::to_string(topic_word(rng)));
      } else {
        append(text, "bg" + std::to_string(background(rng)));
      }
    }
    c.texts.push_back(text);
    c.meta.push_back(meta_line(i, u(rng) < 0.7, "class" + std::to_string(cls)));
  }
  return c;
}

}  // namespace duat::synthetic
