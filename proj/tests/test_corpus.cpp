#include <map>
#include <sstream>

#include "doctest.h"
#include "duat/corpus.hpp"
#include "support.hpp"

using namespace duat;

TEST_CASE("tokenizer lowercases, strips punctuation and drops stop words") {
  const auto rules = CleaningRules::english();
  CHECK(clean_and_tokenize("The Cat sat.", rules) == std::vector<std::string>{"cat", "sat"});
  CHECK(clean_and_tokenize("", rules).empty());
  CHECK(clean_and_tokenize("   \t ", rules).empty());
}

TEST_CASE("hyphens and apostrophes split words before stop-word matching") {
  const auto rules = CleaningRules::english();
  CHECK(clean_and_tokenize("trade-deficit", rules) == std::vector<std::string>{"trade", "deficit"});
  // "don't" -> "don" + "t", both on the stop list.
  CHECK(clean_and_tokenize("don't stop", rules) == std::vector<std::string>{"stop"});
}

TEST_CASE("bundled stop list has 179 entries") { CHECK(bundled_stop_words().size() == 179); }

TEST_CASE("tokenizer agrees with the reference script on the 200-line sample") {
  const std::string dir = std::string(DUAT_SOURCE_DIR) + "/tests/data/";
  const std::string sample = testing::read_text(dir + "sample200.txt");
  std::istringstream expected(testing::read_text(dir + "sample200.expected.tsv"));

  std::vector<std::size_t> want_lengths;
  std::map<std::string, std::size_t> want_totals;
  bool in_words = false;
  for (std::string line; std::getline(expected, line);) {
    if (line == "#words") {
      in_words = true;
      continue;
    }
    const auto tab = line.find('\t');
    const auto n = std::stoul(line.substr(tab + 1));
    if (in_words) {
      want_totals[line.substr(0, tab)] = n;
    } else {
      want_lengths.push_back(n);
    }
  }
  REQUIRE(want_lengths.size() == 200);

  const auto rules = CleaningRules::english();
  std::vector<std::size_t> got_lengths;
  std::map<std::string, std::size_t> got_totals;
  std::istringstream in(sample);
  for (std::string line; std::getline(in, line);) {
    auto toks = clean_and_tokenize(line, rules);
    got_lengths.push_back(toks.size());
    for (auto& t : toks) ++got_totals[t];
  }
  CHECK(got_lengths == want_lengths);
  CHECK(got_totals == want_totals);
}

TEST_CASE("re-tokenizing a clean stream is idempotent") {
  const auto rules = CleaningRules::english();
  const auto once = clean_and_tokenize("Oil PRICES fell; the U.S. trade-deficit widened!", rules);
  std::string joined;
  for (const auto& t : once) joined += t + " ";
  CHECK(clean_and_tokenize(joined, rules) == once);
}

TEST_CASE("vocabulary filters by document frequency") {
  auto c1 = testing::toy_corpus({"a b", "a c"}, 1);
  CHECK(c1.vocabulary.words() == std::vector<std::string>{"a", "b", "c"});
  auto c2 = testing::toy_corpus({"a b", "a c"}, 2);
  CHECK(c2.vocabulary.words() == std::vector<std::string>{"a"});
  CHECK(c2.documents[0].tokens == std::vector<std::string>{"a"});
  CHECK(c2.vocabulary.doc_freq(0) == 2);

  // Document frequency, not raw count: "b" occurs 3 times but in one document.
  auto c3 = testing::toy_corpus({"b b b a", "a c"}, 2);
  CHECK(c3.vocabulary.words() == std::vector<std::string>{"a"});
  CHECK_THROWS_AS(testing::toy_corpus({"x", "y"}, 2), CorpusError);
}

TEST_CASE("vocabulary is a bijection and respects min_freq") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto texts = testing::random_texts(rng, 8, 10);
    Corpus c;
    try {
      c = testing::toy_corpus(texts, 2);
    } catch (const CorpusError&) {
      continue;
    }
    for (std::size_t i = 0; i < c.vocabulary.size(); ++i) {
      CHECK(c.vocabulary.index(c.vocabulary.word(i)) == i);
      CHECK(c.vocabulary.doc_freq(i) >= 2);
    }
  }
}

TEST_CASE("corpus loading") {
  testing::TempDir tmp;
  const auto texts = tmp.file("c.texts.txt"), meta = tmp.file("c.meta.tsv");

  SUBCASE("valid records") {
    testing::write_text(texts, "profits rose\nwheat crop fell\n");
    testing::write_text(meta, "0\ttrain\tearn\n1\ttest\tgrain\n");
    auto c = load_corpus(texts, meta, CleaningRules::english(), 1);
    REQUIRE(c.documents.size() == 2);
    CHECK(c.documents[0].id == 0);
    CHECK(c.documents[0].split == Split::train);
    CHECK(c.labels[c.documents[0].label] == "earn");
    CHECK(c.documents[0].tokens == std::vector<std::string>{"profits", "rose"});
    CHECK(c.documents[1].split == Split::test);
    CHECK(c.ids_in(Split::test) == std::vector<std::size_t>{1});
  }
  SUBCASE("meta line i describes text line i") {
    testing::write_text(texts, "wheat crop\nprofits rose\n");
    testing::write_text(meta, "1\ttrain\tgrain\n0\ttest\tearn\n");
    auto c = load_corpus(texts, meta, CleaningRules::english(), 1);
    CHECK(c.documents[1].tokens == std::vector<std::string>{"wheat", "crop"});
    CHECK(c.labels[c.documents[0].label] == "earn");
  }
  SUBCASE("line-count mismatch") {
    testing::write_text(texts, "a\nb\nc\n");
    testing::write_text(meta, "0\ttrain\tx\n1\ttrain\ty\n");
    try {
      load_corpus(texts, meta, testing::plain_rules(), 1);
      FAIL("expected an error");
    } catch (const CorpusError& e) {
      CHECK(e.kind() == CorpusError::Kind::line_count_mismatch);
    }
  }
  SUBCASE("unknown split") {
    testing::write_text(texts, "a\nb\n");
    testing::write_text(meta, "0\ttrain\tx\n1\tdev\ty\n");
    CHECK_THROWS_AS(load_corpus(texts, meta, testing::plain_rules(), 1), CorpusError);
  }
  SUBCASE("duplicate id") {
    testing::write_text(texts, "a\nb\n");
    testing::write_text(meta, "0\ttrain\tx\n0\ttrain\ty\n");
    CHECK_THROWS_AS(load_corpus(texts, meta, testing::plain_rules(), 1), CorpusError);
  }
  SUBCASE("malformed record") {
    testing::write_text(texts, "a\nb\n");
    testing::write_text(meta, "0 train x\n1\ttrain\ty\n");
    CHECK_THROWS_AS(load_corpus(texts, meta, testing::plain_rules(), 1), CorpusError);
  }
  SUBCASE("fewer than two labels") {
    testing::write_text(texts, "a\nb\n");
    testing::write_text(meta, "0\ttrain\tx\n1\ttest\tx\n");
    CHECK_THROWS_AS(load_corpus(texts, meta, testing::plain_rules(), 1), CorpusError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_corpus(tmp.file("none"), meta, testing::plain_rules(), 1), CorpusError);
  }
  SUBCASE("custom stop-word file") {
    testing::write_text(texts, "profits rose\nwheat fell\n");
    testing::write_text(meta, "0\ttrain\tearn\n1\ttest\tgrain\n");
    testing::write_text(tmp.file("stop.txt"), "rose\nfell\n");
    auto c = load_corpus(texts, meta, CleaningRules::with_stop_word_file(tmp.file("stop.txt")), 1);
    CHECK(c.vocabulary.words() == std::vector<std::string>{"profits", "wheat"});
  }
}

TEST_CASE("corpus construction is deterministic") {
  const std::string dir = std::string(DUAT_SOURCE_DIR) + "/tests/data/";
  auto a = load_corpus(dir + "toy.texts.txt", dir + "toy.meta.tsv", CleaningRules::english(), 2);
  auto b = load_corpus(dir + "toy.texts.txt", dir + "toy.meta.tsv", CleaningRules::english(), 2);
  CHECK(serialize_corpus(a) == serialize_corpus(b));
  CHECK(a.documents.size() == 40);
  CHECK(a.num_classes() == 2);
}
