#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "topicmine/corpus.hpp"

namespace topicmine::test {

/// Corpus over every distinct token (min_count 1), ids "d0", "d1", ...
inline Corpus corpus_of(const std::vector<TokenSeq>& docs) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < docs.size(); ++i) ids.push_back("d" + std::to_string(i));
  return encode_corpus(docs, ids, build_vocabulary(docs, 1));
}

/// Corpus whose ids are given directly; surfaces are "t<id>".
inline Corpus corpus_of_ids(const std::vector<std::vector<TokenId>>& docs, std::size_t vocab_size) {
  std::vector<std::string> surfaces;
  std::vector<std::int64_t> counts(vocab_size, 0);
  for (std::size_t v = 0; v < vocab_size; ++v) surfaces.push_back("t" + std::to_string(v));
  for (const auto& d : docs) {
    for (auto id : d) ++counts[static_cast<std::size_t>(id)];
  }
  Corpus c;
  c.vocab = Vocabulary(surfaces, counts, 0);
  c.docs = docs;
  for (std::size_t i = 0; i < docs.size(); ++i) c.doc_ids.push_back("d" + std::to_string(i));
  return c;
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& name)
      : path_(std::filesystem::temp_directory_path() / ("topicmine-test-" + name)) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::string str(const std::string& leaf) const { return (path_ / leaf).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace topicmine::test
