#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace topicmine {

using TokenId = std::int32_t;
using TokenSeq = std::vector<std::string>;
using StopwordSet = std::set<std::string, std::less<>>;

/// Replaces the built-in tokenizer when set. Receives the raw text.
using TokenizerFn = std::function<TokenSeq(std::string_view)>;

struct TokenizerConfig {
  bool lowercase = true;
  TokenizerFn custom;
};

struct Document {
  std::string id;
  std::string raw;
  TokenSeq tokens;
};

class Vocabulary {
 public:
  Vocabulary() = default;
  /// Entries must already be in id order; validates the bijection.
  Vocabulary(std::vector<std::string> surfaces, std::vector<std::int64_t> counts,
             std::int64_t min_count);

  std::size_t size() const { return surface_of_.size(); }
  const std::string& surface(TokenId id) const { return surface_of_.at(static_cast<std::size_t>(id)); }
  std::int64_t count(TokenId id) const { return count_of_.at(static_cast<std::size_t>(id)); }
  /// -1 when the surface is not in the vocabulary.
  TokenId find(std::string_view surface) const;
  bool contains(std::string_view surface) const { return find(surface) >= 0; }
  std::int64_t min_count() const { return min_count_; }

  const std::vector<std::string>& surfaces() const { return surface_of_; }
  const std::vector<std::int64_t>& counts() const { return count_of_; }

  bool operator==(const Vocabulary&) const = default;

 private:
  std::vector<std::string> surface_of_;
  std::vector<std::int64_t> count_of_;
  std::map<std::string, TokenId, std::less<>> id_of_;
  std::int64_t min_count_ = 1;
};

struct Corpus {
  std::vector<std::string> doc_ids;
  std::vector<std::vector<TokenId>> docs;
  Vocabulary vocab;

  std::size_t num_docs() const { return docs.size(); }
  std::size_t doc_length(std::size_t m) const { return docs[m].size(); }
  std::size_t vocab_size() const { return vocab.size(); }
  std::size_t total_tokens() const;
  /// Documents left with no in-vocabulary tokens.
  std::vector<std::size_t> empty_docs() const;
  bool is_empty_doc(std::size_t m) const { return docs[m].empty(); }

  /// Documents at the given indices, sharing this corpus's vocabulary.
  Corpus subset(std::span<const std::size_t> indices) const;

  bool operator==(const Corpus&) const = default;
};

/// Decodes UTF-8 into code points. Throws InputError naming the byte offset
/// of the first invalid sequence.
std::vector<char32_t> decode_utf8(std::string_view text);
void append_utf8(std::string& out, char32_t cp);

/// Lowercased word tokens; punctuation dropped, CJK split per character.
TokenSeq tokenize(std::string_view raw, const TokenizerConfig& rules = {});

TokenSeq remove_stopwords(const TokenSeq& tokens, const StopwordSet& stopwords);

/// Ids by descending corpus frequency, ties by surface string.
Vocabulary build_vocabulary(std::span<const TokenSeq> docs, std::int64_t min_count);

/// Out-of-vocabulary tokens are dropped; documents that end up empty are kept.
Corpus encode_corpus(std::span<const TokenSeq> docs, std::span<const std::string> doc_ids,
                     const Vocabulary& vocab);

TokenSeq decode(const Corpus& corpus, std::size_t m);

/// tokenize + remove_stopwords over raw documents.
std::vector<TokenSeq> preprocess(std::span<const Document> docs, const StopwordSet& stopwords,
                                 const TokenizerConfig& rules = {});

}  // namespace topicmine
