#include "topicmine/corpus.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include <fmt/format.h>

#include "topicmine/error.hpp"

namespace topicmine {

namespace {

bool is_cjk(char32_t c) {
  return (c >= 0x4E00 && c <= 0x9FFF) || (c >= 0x3400 && c <= 0x4DBF) ||
         (c >= 0x20000 && c <= 0x2A6DF) || (c >= 0xF900 && c <= 0xFAFF) ||
         (c >= 0x3040 && c <= 0x30FF) || (c >= 0xAC00 && c <= 0xD7AF);
}

bool is_ascii_alnum(char32_t c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

bool is_digit(char32_t c) { return c >= '0' && c <= '9'; }

// Separators, punctuation and symbols outside ASCII.
bool is_non_ascii_separator(char32_t c) {
  return (c >= 0x80 && c <= 0xBF && c != 0xAA && c != 0xB5 && c != 0xBA) || c == 0xD7 ||
         c == 0xF7 || (c >= 0x2000 && c <= 0x2BFF) || (c >= 0x3000 && c <= 0x303F) ||
         (c >= 0xFE30 && c <= 0xFE4F) || (c >= 0xFF00 && c <= 0xFF0F) ||
         (c >= 0xFF1A && c <= 0xFF20) || (c >= 0xFF3B && c <= 0xFF40) ||
         (c >= 0xFF5B && c <= 0xFF65) || (c >= 0xFFF0 && c <= 0xFFFF) ||
         (c >= 0x1F000 && c <= 0x1FAFF) || (c >= 0xE000 && c <= 0xF8FF);
}

bool is_word_char(char32_t c) {
  if (c < 0x80) return is_ascii_alnum(c);
  return !is_non_ascii_separator(c) && !is_cjk(c);
}

char32_t to_lower(char32_t c) {
  if (c >= 'A' && c <= 'Z') return c + 32;
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 0x20;
  if (c >= 0x100 && c <= 0x17F && c % 2 == 0 && c != 0x130) return c + 1;
  if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2) return c + 0x20;
  if (c >= 0x410 && c <= 0x42F) return c + 0x20;
  if (c >= 0x400 && c <= 0x40F) return c + 0x50;
  return c;
}

bool is_apostrophe(char32_t c) { return c == '\'' || c == 0x2019; }

}  // namespace

std::vector<char32_t> decode_utf8(std::string_view text) {
  std::vector<char32_t> out;
  out.reserve(text.size());
  const auto* p = reinterpret_cast<const unsigned char*>(text.data());
  const std::size_t n = text.size();
  std::size_t i = 0;
  auto fail = [&](std::size_t at) {
    throw InputError(fmt::format("invalid UTF-8 at byte offset {}", at));
  };
  while (i < n) {
    const unsigned char b = p[i];
    std::size_t len = 0;
    char32_t cp = 0;
    char32_t min = 0;
    if (b < 0x80) {
      out.push_back(b);
      ++i;
      continue;
    } else if ((b & 0xE0) == 0xC0) {
      len = 2, cp = b & 0x1F, min = 0x80;
    } else if ((b & 0xF0) == 0xE0) {
      len = 3, cp = b & 0x0F, min = 0x800;
    } else if ((b & 0xF8) == 0xF0) {
      len = 4, cp = b & 0x07, min = 0x10000;
    } else {
      fail(i);
    }
    if (i + len > n) fail(i);
    for (std::size_t k = 1; k < len; ++k) {
      if ((p[i + k] & 0xC0) != 0x80) fail(i);
      cp = (cp << 6) | (p[i + k] & 0x3F);
    }
    if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) fail(i);
    out.push_back(cp);
    i += len;
  }
  return out;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

TokenSeq tokenize(std::string_view raw, const TokenizerConfig& rules) {
  // Validate even when a custom tokenizer takes over.
  const std::vector<char32_t> cps = decode_utf8(raw);
  if (rules.custom) {
    TokenSeq out = rules.custom(raw);
    std::erase_if(out, [](const std::string& t) { return t.empty(); });
    if (rules.lowercase) {
      for (auto& t : out) {
        std::string low;
        for (char32_t c : decode_utf8(t)) append_utf8(low, to_lower(c));
        t = std::move(low);
      }
    }
    return out;
  }

  TokenSeq out;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) out.push_back(std::move(current));
    current.clear();
  };
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const char32_t c = rules.lowercase ? to_lower(cps[i]) : cps[i];
    if (is_cjk(c)) {
      flush();
      append_utf8(current, c);
      flush();
    } else if (is_word_char(c)) {
      append_utf8(current, c);
    } else {
      // Word-internal apostrophes ("don't") and decimal points ("3.5") stay.
      const bool has_next = i + 1 < cps.size();
      const bool mid_letter = is_apostrophe(c) && !current.empty() && has_next &&
                              is_word_char(cps[i + 1]) && !is_digit(cps[i + 1]) &&
                              !is_digit(cps[i - 1]);
      const bool mid_num = c == '.' && !current.empty() && has_next && is_digit(cps[i - 1]) &&
                           is_digit(cps[i + 1]);
      if (mid_letter || mid_num) {
        append_utf8(current, c);
      } else {
        flush();
      }
    }
  }
  flush();
  return out;
}

TokenSeq remove_stopwords(const TokenSeq& tokens, const StopwordSet& stopwords) {
  TokenSeq out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (!stopwords.contains(t)) out.push_back(t);
  }
  return out;
}

Vocabulary::Vocabulary(std::vector<std::string> surfaces, std::vector<std::int64_t> counts,
                       std::int64_t min_count)
    : surface_of_(std::move(surfaces)), count_of_(std::move(counts)), min_count_(min_count) {
  if (surface_of_.size() != count_of_.size()) {
    throw InputError("vocabulary surfaces and counts differ in length");
  }
  for (std::size_t i = 0; i < surface_of_.size(); ++i) {
    if (surface_of_[i].empty()) throw InputError(fmt::format("empty surface for id {}", i));
    if (count_of_[i] < min_count_) {
      throw InputError(fmt::format("count of '{}' below min_count {}", surface_of_[i], min_count_));
    }
    const auto [it, inserted] = id_of_.emplace(surface_of_[i], static_cast<TokenId>(i));
    if (!inserted) throw InputError(fmt::format("duplicate vocabulary entry '{}'", surface_of_[i]));
  }
}

TokenId Vocabulary::find(std::string_view surface) const {
  const auto it = id_of_.find(surface);
  return it == id_of_.end() ? -1 : it->second;
}

Vocabulary build_vocabulary(std::span<const TokenSeq> docs, std::int64_t min_count) {
  if (min_count < 1) throw ConfigError("min_count must be >= 1");
  std::unordered_map<std::string, std::int64_t> counts;
  for (const auto& doc : docs) {
    for (const auto& t : doc) ++counts[t];
  }
  std::vector<std::pair<std::string, std::int64_t>> kept;
  for (auto& [surface, c] : counts) {
    if (c >= min_count) kept.emplace_back(surface, c);
  }
  if (kept.empty()) throw InputError("vocabulary empty after filtering");
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::vector<std::string> surfaces;
  std::vector<std::int64_t> freq;
  for (auto& [s, c] : kept) {
    surfaces.push_back(s);
    freq.push_back(c);
  }
  return Vocabulary(std::move(surfaces), std::move(freq), min_count);
}

Corpus encode_corpus(std::span<const TokenSeq> docs, std::span<const std::string> doc_ids,
                     const Vocabulary& vocab) {
  if (docs.size() != doc_ids.size()) {
    throw InputError(fmt::format("{} documents but {} ids", docs.size(), doc_ids.size()));
  }
  Corpus c;
  c.vocab = vocab;
  c.doc_ids.assign(doc_ids.begin(), doc_ids.end());
  c.docs.reserve(docs.size());
  for (const auto& doc : docs) {
    std::vector<TokenId> ids;
    ids.reserve(doc.size());
    for (const auto& t : doc) {
      if (const TokenId id = vocab.find(t); id >= 0) ids.push_back(id);
    }
    c.docs.push_back(std::move(ids));
  }
  return c;
}

TokenSeq decode(const Corpus& corpus, std::size_t m) {
  TokenSeq out;
  for (TokenId id : corpus.docs.at(m)) out.push_back(corpus.vocab.surface(id));
  return out;
}

std::size_t Corpus::total_tokens() const {
  return std::accumulate(docs.begin(), docs.end(), std::size_t{0},
                         [](std::size_t acc, const auto& d) { return acc + d.size(); });
}

std::vector<std::size_t> Corpus::empty_docs() const {
  std::vector<std::size_t> out;
  for (std::size_t m = 0; m < docs.size(); ++m) {
    if (docs[m].empty()) out.push_back(m);
  }
  return out;
}

Corpus Corpus::subset(std::span<const std::size_t> indices) const {
  Corpus out;
  out.vocab = vocab;
  for (std::size_t m : indices) {
    out.doc_ids.push_back(doc_ids.at(m));
    out.docs.push_back(docs.at(m));
  }
  return out;
}

std::vector<TokenSeq> preprocess(std::span<const Document> docs, const StopwordSet& stopwords,
                                 const TokenizerConfig& rules) {
  std::vector<TokenSeq> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(remove_stopwords(tokenize(d.raw, rules), stopwords));
  return out;
}

}  // namespace topicmine
