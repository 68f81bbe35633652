#include <doctest.h>

#include <algorithm>

#include "helpers.hpp"
#include "topicmine/corpus.hpp"
#include "topicmine/corpus_io.hpp"
#include "topicmine/error.hpp"
#include "topicmine/random.hpp"

using namespace topicmine;

TEST_SUITE("corpus") {

TEST_CASE("tokenize splits words and drops punctuation") {
  CHECK(tokenize("Good phone, great battery!") == TokenSeq{"good", "phone", "great", "battery"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("  ...  !!").empty());
}

TEST_CASE("tokenize splits CJK per character") {
  CHECK(tokenize("很好123 ok") == TokenSeq{"很", "好", "123", "ok"});
}

TEST_CASE("tokenize keeps apostrophes and decimal points inside words") {
  CHECK(tokenize("Don't pay 9.99 dollars.") == TokenSeq{"don't", "pay", "9.99", "dollars"});
}

TEST_CASE("tokenize lowercases beyond ASCII") {
  CHECK(tokenize("ÉCOLE Ärger ΑΒΓ") == TokenSeq{"école", "ärger", "αβγ"});
}

TEST_CASE("invalid UTF-8 names the byte offset") {
  const std::string bad = std::string("ok ") + '\xff' + "x";
  try {
    tokenize(bad);
    FAIL("expected an error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("byte offset 3") != std::string::npos);
  }
}

TEST_CASE("custom tokenizer replaces the built-in rules") {
  TokenizerConfig cfg;
  cfg.custom = [](std::string_view s) { return TokenSeq{std::string(s)}; };
  CHECK(tokenize("A B", cfg) == TokenSeq{"a b"});
  cfg.lowercase = false;
  CHECK(tokenize("A B", cfg) == TokenSeq{"A B"});
}

TEST_CASE("remove_stopwords") {
  const StopwordSet stop = {"the", "is"};
  CHECK(remove_stopwords({"the", "battery", "is", "good"}, stop) == TokenSeq{"battery", "good"});
  CHECK(remove_stopwords({"a", "b"}, {}) == TokenSeq{"a", "b"});
  CHECK(remove_stopwords({"the", "the"}, {"the"}).empty());
}

TEST_CASE("remove_stopwords output is an ordered subsequence without stopwords") {
  Rng rng(5);
  const std::vector<std::string> pool = {"a", "b", "c", "d", "e"};
  for (int trial = 0; trial < 200; ++trial) {
    TokenSeq in;
    for (int i = 0; i < 12; ++i) in.push_back(pool[rng.below(pool.size())]);
    StopwordSet stop;
    for (const auto& w : pool) {
      if (rng.uniform() < 0.4) stop.insert(w);
    }
    const TokenSeq out = remove_stopwords(in, stop);
    auto it = in.begin();
    for (const auto& w : out) {
      CHECK(stop.count(w) == 0);
      it = std::find(it, in.end(), w);
      REQUIRE(it != in.end());
      ++it;
    }
    const auto kept = std::count_if(in.begin(), in.end(), [&](const auto& w) { return stop.count(w) == 0; });
    CHECK(out.size() == static_cast<std::size_t>(kept));
  }
}

TEST_CASE("build_vocabulary thresholds and orders") {
  const std::vector<TokenSeq> docs = {{"a", "b", "a"}, {"a"}};
  const Vocabulary v = build_vocabulary(docs, 2);
  CHECK(v.size() == 1);
  CHECK(v.surface(0) == "a");
  CHECK(v.count(0) == 3);
  CHECK(v.find("b") == -1);

  const Vocabulary all = build_vocabulary(docs, 1);
  CHECK(all.size() == 2);

  const std::vector<TokenSeq> tie = {{"y", "x", "y", "x", "x", "y", "y", "x", "x", "y"}};
  const Vocabulary t = build_vocabulary(tie, 1);
  CHECK(t.find("x") == 0);
  CHECK(t.find("y") == 1);
}

TEST_CASE("build_vocabulary errors") {
  const std::vector<TokenSeq> docs = {{"a"}, {"b"}};
  CHECK_THROWS_WITH_AS(build_vocabulary(docs, 2), "vocabulary empty after filtering", InputError);
  CHECK_THROWS_AS(build_vocabulary(docs, 0), ConfigError);
}

TEST_CASE("vocabulary is a bijection and respects min_count") {
  Rng rng(11);
  std::vector<TokenSeq> docs(30);
  for (auto& d : docs) {
    for (int i = 0; i < 20; ++i) d.push_back("w" + std::to_string(rng.below(40)));
  }
  for (std::int64_t mc : {1, 2, 5, 10}) {
    const Vocabulary v = build_vocabulary(docs, mc);
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto id = static_cast<TokenId>(i);
      CHECK(v.find(v.surface(id)) == id);
      CHECK(v.count(id) >= mc);
      if (i > 0) CHECK(v.count(id - 1) >= v.count(id));
    }
  }
}

TEST_CASE("vocabulary is independent of document order") {
  std::vector<TokenSeq> docs = {{"b", "a", "c"}, {"c", "c"}, {"a", "d"}, {"d", "b", "b"}};
  const Vocabulary v1 = build_vocabulary(docs, 1);
  std::reverse(docs.begin(), docs.end());
  CHECK(build_vocabulary(docs, 1) == v1);
}

TEST_CASE("encode_corpus drops out-of-vocabulary tokens and keeps empty docs") {
  const std::vector<TokenSeq> docs = {{"a", "z", "a"}, {}, {"z"}};
  const std::vector<std::string> ids = {"x", "y", "w"};
  const Vocabulary v({"a"}, {2}, 1);
  const Corpus c = encode_corpus(docs, ids, v);
  CHECK(c.docs[0] == std::vector<TokenId>{0, 0});
  CHECK(c.doc_length(0) == 2);
  CHECK(c.num_docs() == 3);
  CHECK(c.empty_docs() == std::vector<std::size_t>{1, 2});
  CHECK(c.total_tokens() == 2);
}

TEST_CASE("decode inverts encode on in-vocabulary documents") {
  const std::vector<TokenSeq> docs = {{"battery", "good", "battery"}, {"screen", "good"}};
  const Corpus c = test::corpus_of(docs);
  CHECK(decode(c, 0) == docs[0]);
  CHECK(decode(c, 1) == docs[1]);
}

TEST_CASE("corpus subset keeps ids aligned") {
  const Corpus c = test::corpus_of({{"a"}, {"b", "b"}, {"c"}});
  const std::vector<std::size_t> pick = {2, 0};
  const Corpus s = c.subset(pick);
  CHECK(s.doc_ids == std::vector<std::string>{"d2", "d0"});
  CHECK(s.vocab == c.vocab);
}

TEST_CASE("JSON lines ingestion") {
  const auto docs = parse_documents("{\"id\":\"r1\",\"text\":\"Great price\"}\n\n{\"id\":\"r2\",\"text\":\"\"}\n",
                                    CorpusFormat::json_lines);
  REQUIRE(docs.size() == 2);
  CHECK(docs[0].id == "r1");
  CHECK(docs[0].raw == "Great price");
  CHECK(docs[1].raw.empty());
}

TEST_CASE("JSON lines errors name the line") {
  CHECK_THROWS_WITH_AS(parse_documents("{\"id\":\"a\",\"text\":\"x\"}\n{oops\n", CorpusFormat::json_lines),
                       doctest::Contains("line 2"), InputError);
  CHECK_THROWS_WITH_AS(parse_documents("{\"id\":\"a\",\"text\":\"x\"}\n{\"id\":\"a\",\"text\":\"y\"}\n",
                                       CorpusFormat::json_lines),
                       doctest::Contains("duplicate"), InputError);
  CHECK_THROWS_AS(parse_documents("{\"id\":\"a\"}\n", CorpusFormat::json_lines), InputError);
}

TEST_CASE("plain text ingestion assigns line ids") {
  const auto docs = parse_documents("first doc\nsecond doc\n", CorpusFormat::plain_text);
  REQUIRE(docs.size() == 2);
  CHECK(docs[0].id == "doc-1");
  CHECK(docs[1].id == "doc-2");
}

TEST_CASE("stopword files skip comments and lowercase entries") {
  const StopwordSet s = parse_stopwords("# comment\nThe\n\nIS\n");
  CHECK(s == StopwordSet{"the", "is"});
  CHECK(default_stopwords().count("the") == 1);
}

TEST_CASE("vocabulary and corpus files round trip") {
  const Corpus c = test::corpus_of({{"a", "b", "a"}, {}, {"b", "c"}});
  const Vocabulary v = parse_vocabulary(format_vocabulary(c.vocab));
  CHECK(v.surfaces() == c.vocab.surfaces());
  CHECK(v.counts() == c.vocab.counts());
  const Corpus back = parse_corpus(format_corpus(c), v);
  CHECK(back.docs == c.docs);
  CHECK(back.doc_ids == c.doc_ids);
}

}  // TEST_SUITE
