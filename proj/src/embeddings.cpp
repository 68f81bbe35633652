#include "topicmine/embeddings.hpp"

#include <limits>
#include <map>
#include <unordered_map>

#include <fmt/format.h>

#include "topicmine/error.hpp"
#include "topicmine/io_util.hpp"

namespace topicmine {

std::vector<std::size_t> EmbeddingSet::flagged_docs() const {
  std::vector<std::size_t> out;
  for (std::size_t m = 0; m < token_vectors.size(); ++m) {
    if (token_vectors[m].rows() == 0) out.push_back(m);
  }
  return out;
}

EmbeddingSet embed_corpus(const EncoderParams& params, const Corpus& corpus) {
  if (params.config.vocab_size != corpus.vocab_size()) {
    throw InputError(fmt::format("encoder vocabulary {} does not match corpus vocabulary {}",
                                 params.config.vocab_size, corpus.vocab_size()));
  }
  const auto d = static_cast<Eigen::Index>(params.config.dim);
  const std::size_t chunk = params.config.max_len;
  EmbeddingSet e;
  e.dim = params.config.dim;
  e.doc_ids = corpus.doc_ids;
  e.source = EmbeddingSource::trained_encoder;
  e.doc_vectors.resize(static_cast<Eigen::Index>(corpus.num_docs()), d);
  for (std::size_t m = 0; m < corpus.num_docs(); ++m) {
    const auto& doc = corpus.docs[m];
    Matrix vectors(static_cast<Eigen::Index>(doc.size()), d);
    for (std::size_t start = 0; start < doc.size(); start += chunk) {
      const std::size_t len = std::min(chunk, doc.size() - start);
      const Encoding enc = encode(params, std::span(doc).subspan(start, len));
      vectors.middleRows(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(len)) = enc.hidden;
    }
    e.doc_vectors.row(static_cast<Eigen::Index>(m)) = pool_document(vectors);
    e.token_vectors.push_back(std::move(vectors));
  }
  return e;
}

std::string format_keyed_vectors(const KeyedVectors& kv) {
  std::string out = fmt::format("dim={} count={}\n", kv.dim, kv.keys.size());
  for (std::size_t i = 0; i < kv.keys.size(); ++i) {
    out += kv.keys[i];
    for (Eigen::Index j = 0; j < kv.rows.cols(); ++j) {
      out += ' ';
      out += format_double(kv.rows(static_cast<Eigen::Index>(i), j));
    }
    out += '\n';
  }
  return out;
}

KeyedVectors parse_keyed_vectors(const std::string& text) {
  auto lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw InputError("embedding file: missing header");
  KeyedVectors kv;
  long long count = 0;
  {
    const auto head = split(lines[0], ' ');
    if (head.size() != 2 || !head[0].starts_with("dim=") || !head[1].starts_with("count=")) {
      throw InputError("embedding file line 1: expected \"dim=<d> count=<n>\"");
    }
    const long long dim = parse_int(std::string_view(head[0]).substr(4));
    count = parse_int(std::string_view(head[1]).substr(6));
    if (dim <= 0 || count < 0) throw InputError("embedding file line 1: bad dim or count");
    kv.dim = static_cast<std::size_t>(dim);
  }
  const auto d = static_cast<Eigen::Index>(kv.dim);
  kv.rows.resize(count, d);
  for (long long r = 0; r < count; ++r) {
    const std::size_t line_idx = static_cast<std::size_t>(r) + 1;
    if (line_idx >= lines.size()) {
      throw InputError(fmt::format("embedding file: parse error at row {} (header count {}, file has {} rows)",
                                   r + 1, count, lines.size() - 1));
    }
    const auto fields = split(lines[line_idx], ' ');
    if (fields.size() != kv.dim + 1) {
      throw InputError(fmt::format("embedding file line {}: expected key and {} values, got {} fields",
                                   line_idx + 1, kv.dim, fields.size()));
    }
    kv.keys.push_back(fields[0]);
    for (Eigen::Index j = 0; j < d; ++j) {
      try {
        kv.rows(r, j) = parse_double(fields[static_cast<std::size_t>(j) + 1]);
      } catch (const InputError& e) {
        throw InputError(fmt::format("embedding file line {}: {}", line_idx + 1, e.what()));
      }
    }
  }
  if (lines.size() > static_cast<std::size_t>(count) + 1) {
    throw InputError(fmt::format("embedding file: {} rows beyond header count {}",
                                 lines.size() - 1 - static_cast<std::size_t>(count), count));
  }
  return kv;
}

std::string format_doc_vectors(const EmbeddingSet& e) {
  return format_keyed_vectors({e.dim, e.doc_ids, e.doc_vectors});
}

std::string format_token_vectors(const EmbeddingSet& e) {
  KeyedVectors kv;
  kv.dim = e.dim;
  Eigen::Index total = 0;
  for (const auto& t : e.token_vectors) total += t.rows();
  kv.rows.resize(total, static_cast<Eigen::Index>(e.dim));
  Eigen::Index r = 0;
  for (std::size_t m = 0; m < e.token_vectors.size(); ++m) {
    for (Eigen::Index n = 0; n < e.token_vectors[m].rows(); ++n, ++r) {
      kv.keys.push_back(fmt::format("{}:{}", e.doc_ids[m], n));
      kv.rows.row(r) = e.token_vectors[m].row(n);
    }
  }
  return format_keyed_vectors(kv);
}

void export_embeddings(const EmbeddingSet& e, const std::filesystem::path& doc_path,
                       const std::optional<std::filesystem::path>& token_path) {
  write_file_atomic(doc_path, format_doc_vectors(e));
  if (token_path) write_file_atomic(*token_path, format_token_vectors(e));
}

EmbeddingSet import_embeddings(const std::string& doc_text, const Corpus& corpus,
                               const std::optional<std::string>& token_text) {
  const KeyedVectors docs = parse_keyed_vectors(doc_text);
  std::unordered_map<std::string, Eigen::Index> row_of;
  for (std::size_t i = 0; i < docs.keys.size(); ++i) {
    if (!row_of.emplace(docs.keys[i], static_cast<Eigen::Index>(i)).second) {
      throw InputError(fmt::format("embedding file: duplicate document id '{}'", docs.keys[i]));
    }
  }
  EmbeddingSet e;
  e.dim = docs.dim;
  e.source = EmbeddingSource::file;
  e.doc_ids = corpus.doc_ids;
  e.doc_vectors.resize(static_cast<Eigen::Index>(corpus.num_docs()), static_cast<Eigen::Index>(e.dim));
  for (std::size_t m = 0; m < corpus.num_docs(); ++m) {
    const auto it = row_of.find(corpus.doc_ids[m]);
    if (it == row_of.end()) {
      throw InputError(fmt::format("embedding file has no vector for document '{}'", corpus.doc_ids[m]));
    }
    e.doc_vectors.row(static_cast<Eigen::Index>(m)) = docs.rows.row(it->second);
  }
  if (docs.keys.size() != corpus.num_docs()) {
    throw InputError(fmt::format("embedding file has {} document vectors for {} documents",
                                 docs.keys.size(), corpus.num_docs()));
  }
  if (!token_text) return e;

  const KeyedVectors toks = parse_keyed_vectors(*token_text);
  if (toks.dim != e.dim) {
    throw InputError(fmt::format("token vectors have dim {} but document vectors dim {}", toks.dim, e.dim));
  }
  std::unordered_map<std::string, std::vector<std::pair<long long, Eigen::Index>>> by_doc;
  for (std::size_t i = 0; i < toks.keys.size(); ++i) {
    const auto colon = toks.keys[i].rfind(':');
    if (colon == std::string::npos) {
      throw InputError(fmt::format("token vector line {}: key '{}' is not <doc-id>:<position>", i + 2,
                                   toks.keys[i]));
    }
    by_doc[toks.keys[i].substr(0, colon)].emplace_back(
        parse_int(std::string_view(toks.keys[i]).substr(colon + 1)), static_cast<Eigen::Index>(i));
  }
  for (std::size_t m = 0; m < corpus.num_docs(); ++m) {
    const auto& id = corpus.doc_ids[m];
    const auto n = static_cast<Eigen::Index>(corpus.doc_length(m));
    Matrix vectors(n, static_cast<Eigen::Index>(e.dim));
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    const auto it = by_doc.find(id);
    const std::size_t have = it == by_doc.end() ? 0 : it->second.size();
    if (have != static_cast<std::size_t>(n)) {
      throw InputError(fmt::format("document '{}' has {} tokens but {} token vectors", id, n, have));
    }
    if (it != by_doc.end()) {
      for (const auto& [pos, row] : it->second) {
        if (pos < 0 || pos >= n || seen[static_cast<std::size_t>(pos)]) {
          throw InputError(fmt::format("document '{}': bad or repeated token position {}", id, pos));
        }
        seen[static_cast<std::size_t>(pos)] = true;
        vectors.row(pos) = toks.rows.row(row);
      }
    }
    e.token_vectors.push_back(std::move(vectors));
  }
  return e;
}

EmbeddingSet import_embeddings(const std::filesystem::path& doc_path, const Corpus& corpus,
                               const std::optional<std::filesystem::path>& token_path) {
  std::optional<std::string> token_text;
  if (token_path) token_text = read_file(*token_path);
  return import_embeddings(read_file(doc_path), corpus, token_text);
}

KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, std::size_t max_iter) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (k == 0) throw ConfigError("k must be at least 1");
  if (k > n) throw ConfigError(fmt::format("k = {} exceeds the {} points to cluster", k, n));
  Rng rng(seed);
  const auto K = static_cast<Eigen::Index>(k);
  KMeansResult r;
  r.centroids.resize(K, points.cols());

  // k-means++ seeding
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::size_t pick = rng.below(n);
  for (Eigen::Index c = 0; c < K; ++c) {
    r.centroids.row(c) = points.row(static_cast<Eigen::Index>(pick));
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], (points.row(static_cast<Eigen::Index>(i)) - r.centroids.row(c)).squaredNorm());
      total += d2[i];
    }
    if (c + 1 < K) pick = total > 0.0 ? rng.categorical(d2) : rng.below(n);
  }

  r.assignment.assign(n, k);  // sentinel: nothing assigned yet
  for (r.iterations = 0; r.iterations < max_iter;) {
    ++r.iterations;
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (Eigen::Index c = 0; c < K; ++c) {
        const double dist = (points.row(static_cast<Eigen::Index>(i)) - r.centroids.row(c)).squaredNorm();
        if (dist < best_d) best_d = dist, best = static_cast<std::size_t>(c);
      }
      if (r.assignment[i] != best) changed = true;
      r.assignment[i] = best;
    }
    if (!changed) {
      r.converged = true;
      break;
    }
    Matrix sums = Matrix::Zero(K, points.cols());
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums.row(static_cast<Eigen::Index>(r.assignment[i])) += points.row(static_cast<Eigen::Index>(i));
      ++sizes[r.assignment[i]];
    }
    for (Eigen::Index c = 0; c < K; ++c) {
      const auto size = sizes[static_cast<std::size_t>(c)];
      if (size > 0) r.centroids.row(c) = sums.row(c) / static_cast<double>(size);
    }
    // Empty clusters move to the point farthest from its own centroid.
    for (Eigen::Index c = 0; c < K; ++c) {
      if (sizes[static_cast<std::size_t>(c)] > 0) continue;
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double dist = (points.row(static_cast<Eigen::Index>(i)) -
                             r.centroids.row(static_cast<Eigen::Index>(r.assignment[i])))
                                .squaredNorm();
        if (dist > far_d) far_d = dist, far = i;
      }
      r.centroids.row(c) = points.row(static_cast<Eigen::Index>(far));
      ++r.reseeds;
    }
  }
  return r;
}

SenseAssignment cluster_tokens(const EmbeddingSet& e, std::size_t k, std::uint64_t seed) {
  if (!e.has_token_vectors()) throw ConfigError("sense clustering needs token vectors");
  Eigen::Index total = 0;
  for (const auto& t : e.token_vectors) total += t.rows();
  if (k == 0) throw ConfigError("target senses must be at least 1");
  if (static_cast<Eigen::Index>(k) > total) {
    throw ConfigError(fmt::format("{} senses requested but only {} token occurrences", k, total));
  }
  Matrix all(total, static_cast<Eigen::Index>(e.dim));
  Eigen::Index r = 0;
  for (const auto& t : e.token_vectors) {
    all.middleRows(r, t.rows()) = t;
    r += t.rows();
  }
  SenseAssignment out;
  out.k = k;
  out.clustering = kmeans(all, k, seed);
  std::size_t i = 0;
  for (const auto& t : e.token_vectors) {
    std::vector<std::size_t> s;
    for (Eigen::Index n = 0; n < t.rows(); ++n) s.push_back(out.clustering.assignment[i++]);
    out.senses.push_back(std::move(s));
  }
  return out;
}

Corpus refine_corpus(const Corpus& corpus, const SenseAssignment& senses) {
  if (senses.senses.size() != corpus.num_docs()) {
    throw InputError(fmt::format("sense assignment covers {} documents, corpus has {}",
                                 senses.senses.size(), corpus.num_docs()));
  }
  // Most frequent surface per sense, ties to the smaller token id.
  std::vector<std::map<TokenId, std::size_t>> surface_counts(senses.k);
  for (std::size_t m = 0; m < corpus.num_docs(); ++m) {
    if (senses.senses[m].size() != corpus.doc_length(m)) {
      throw InputError(fmt::format("document '{}': {} senses for {} tokens", corpus.doc_ids[m],
                                   senses.senses[m].size(), corpus.doc_length(m)));
    }
    for (std::size_t n = 0; n < corpus.doc_length(m); ++n) {
      ++surface_counts[senses.senses[m][n]][corpus.docs[m][n]];
    }
  }
  std::vector<std::string> label(senses.k);
  for (std::size_t s = 0; s < senses.k; ++s) {
    TokenId best = -1;
    std::size_t best_n = 0;
    for (const auto& [id, n] : surface_counts[s]) {
      if (n > best_n) best = id, best_n = n;
    }
    if (best >= 0) label[s] = fmt::format("{}#{}", corpus.vocab.surface(best), s);
  }
  std::vector<TokenSeq> docs;
  for (std::size_t m = 0; m < corpus.num_docs(); ++m) {
    TokenSeq seq;
    for (std::size_t s : senses.senses[m]) seq.push_back(label[s]);
    docs.push_back(std::move(seq));
  }
  const Vocabulary vocab = build_vocabulary(docs, 1);
  return encode_corpus(docs, corpus.doc_ids, vocab);
}

}  // namespace topicmine
