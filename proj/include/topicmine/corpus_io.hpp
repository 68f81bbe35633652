#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "topicmine/corpus.hpp"

namespace topicmine {

enum class CorpusFormat { auto_detect, json_lines, plain_text };

/// JSON lines ({"id","text"} per line) or plain text (one document per line,
/// ids "doc-<line>"). auto_detect picks JSON lines for .jsonl/.ndjson files.
std::vector<Document> read_documents(const std::filesystem::path& path,
                                     CorpusFormat format = CorpusFormat::auto_detect);
std::vector<Document> parse_documents(const std::string& text, CorpusFormat format);

/// One token per line, "#" comments ignored, entries lowercased.
StopwordSet read_stopwords(const std::filesystem::path& path);
StopwordSet parse_stopwords(const std::string& text);

/// Small English default list for review-style text.
const StopwordSet& default_stopwords();

/// TSV: id, surface, count; sorted by id.
std::string format_vocabulary(const Vocabulary& vocab);
/// The recovered min_count is the smallest stored count.
Vocabulary parse_vocabulary(const std::string& text);

/// Encoded corpus: "<doc-id>\t<length>\t<space-separated ids>" per line.
std::string format_corpus(const Corpus& corpus);
Corpus parse_corpus(const std::string& text, Vocabulary vocab);

}  // namespace topicmine
