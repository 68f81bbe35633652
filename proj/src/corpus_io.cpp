#include "topicmine/corpus_io.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "topicmine/error.hpp"
#include "topicmine/io_util.hpp"

namespace topicmine {

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  for (auto& l : lines) {
    if (!l.empty() && l.back() == '\r') l.pop_back();
  }
  return lines;
}

}  // namespace

std::vector<Document> parse_documents(const std::string& text, CorpusFormat format) {
  std::vector<Document> docs;
  std::set<std::string, std::less<>> seen;
  const auto lines = lines_of(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    Document d;
    if (format == CorpusFormat::json_lines) {
      if (lines[i].find_first_not_of(" \t") == std::string::npos) continue;
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(lines[i]);
      } catch (const nlohmann::json::parse_error& e) {
        throw InputError(fmt::format("line {}: malformed JSON ({})", line_no, e.what()));
      }
      if (!j.is_object() || !j.contains("id") || !j.contains("text") || !j["id"].is_string() ||
          !j["text"].is_string()) {
        throw InputError(
            fmt::format("line {}: expected object with string fields \"id\" and \"text\"", line_no));
      }
      d.id = j["id"].get<std::string>();
      d.raw = j["text"].get<std::string>();
    } else {
      d.id = fmt::format("doc-{}", line_no);
      d.raw = lines[i];
    }
    try {
      decode_utf8(d.raw);
    } catch (const InputError& e) {
      throw InputError(fmt::format("line {}: {}", line_no, e.what()));
    }
    if (!seen.insert(d.id).second) {
      throw InputError(fmt::format("line {}: duplicate document id '{}'", line_no, d.id));
    }
    docs.push_back(std::move(d));
  }
  return docs;
}

std::vector<Document> read_documents(const std::filesystem::path& path, CorpusFormat format) {
  if (format == CorpusFormat::auto_detect) {
    const auto ext = path.extension().string();
    format = (ext == ".jsonl" || ext == ".ndjson") ? CorpusFormat::json_lines
                                                   : CorpusFormat::plain_text;
  }
  return parse_documents(read_file(path), format);
}

StopwordSet parse_stopwords(const std::string& text) {
  StopwordSet out;
  for (const auto& line : lines_of(text)) {
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t");
    // Lowercase with the tokenizer's rules so matching agrees with tokens.
    for (auto& t : tokenize(line.substr(first, last - first + 1))) out.insert(t);
  }
  return out;
}

StopwordSet read_stopwords(const std::filesystem::path& path) {
  return parse_stopwords(read_file(path));
}

const StopwordSet& default_stopwords() {
  static const StopwordSet words = {
      "a",     "about", "after", "again", "all",   "also",  "am",    "an",    "and",  "any",
      "are",   "as",    "at",    "be",    "been",  "but",   "by",    "can",   "could", "did",
      "do",    "does",  "for",   "from",  "get",   "got",   "had",   "has",   "have", "he",
      "her",   "him",   "his",   "how",   "i",     "if",    "in",    "into",  "is",   "it",
      "its",   "just",  "me",    "more",  "my",    "no",    "not",   "of",    "on",   "one",
      "or",    "our",   "out",   "she",   "so",    "some",  "than",  "that",  "the",  "their",
      "them",  "then",  "there", "these", "they",  "this",  "to",    "too",   "up",   "us",
      "very",  "was",   "we",    "were",  "what",  "when",  "which", "while", "who",  "will",
      "with",  "would", "you",   "your",  "really", "much", "quite", "bit",   "it's", "i'm"};
  return words;
}

std::string format_vocabulary(const Vocabulary& vocab) {
  std::string out;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    const auto id = static_cast<TokenId>(i);
    out += fmt::format("{}\t{}\t{}\n", i, vocab.surface(id), vocab.count(id));
  }
  return out;
}

Vocabulary parse_vocabulary(const std::string& text) {
  std::vector<std::string> surfaces;
  std::vector<std::int64_t> counts;
  const auto lines = lines_of(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto cols = split(lines[i], '\t');
    if (cols.size() != 3) throw InputError(fmt::format("vocabulary line {}: expected 3 columns", i + 1));
    if (parse_int(cols[0]) != static_cast<long long>(i)) {
      throw InputError(fmt::format("vocabulary line {}: ids must be dense and sorted", i + 1));
    }
    surfaces.push_back(cols[1]);
    counts.push_back(parse_int(cols[2]));
  }
  if (surfaces.empty()) throw InputError("vocabulary empty");
  const std::int64_t min_count = std::max<std::int64_t>(1, *std::min_element(counts.begin(), counts.end()));
  return Vocabulary(std::move(surfaces), std::move(counts), min_count);
}

std::string format_corpus(const Corpus& corpus) {
  std::string out;
  for (std::size_t m = 0; m < corpus.num_docs(); ++m) {
    out += corpus.doc_ids[m];
    out += fmt::format("\t{}\t", corpus.docs[m].size());
    for (std::size_t n = 0; n < corpus.docs[m].size(); ++n) {
      if (n) out += ' ';
      out += fmt::format("{}", corpus.docs[m][n]);
    }
    out += '\n';
  }
  return out;
}

Corpus parse_corpus(const std::string& text, Vocabulary vocab) {
  Corpus c;
  c.vocab = std::move(vocab);
  const auto V = static_cast<long long>(c.vocab.size());
  const auto lines = lines_of(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto cols = split(lines[i], '\t');
    if (cols.size() != 3) throw InputError(fmt::format("corpus line {}: expected 3 columns", i + 1));
    std::vector<TokenId> ids;
    if (!cols[2].empty()) {
      for (const auto& tok : split(cols[2], ' ')) {
        const long long id = parse_int(tok);
        if (id < 0 || id >= V) {
          throw InputError(fmt::format("corpus line {}: token id {} outside vocabulary", i + 1, id));
        }
        ids.push_back(static_cast<TokenId>(id));
      }
    }
    if (parse_int(cols[1]) != static_cast<long long>(ids.size())) {
      throw InputError(fmt::format("corpus line {}: length column disagrees with ids", i + 1));
    }
    c.doc_ids.push_back(cols[0]);
    c.docs.push_back(std::move(ids));
  }
  return c;
}

}  // namespace topicmine
