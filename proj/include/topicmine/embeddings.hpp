#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "topicmine/corpus.hpp"
#include "topicmine/encoder.hpp"

namespace topicmine {

enum class EmbeddingSource { trained_encoder, file };

struct EmbeddingSet {
  std::size_t dim = 0;
  std::vector<std::string> doc_ids;
  Matrix doc_vectors;  // M x dim
  /// Per document, one row per token occurrence. Empty when only document
  /// vectors were provided.
  std::vector<Matrix> token_vectors;
  EmbeddingSource source = EmbeddingSource::trained_encoder;

  std::size_t num_docs() const { return doc_ids.size(); }
  bool has_token_vectors() const { return !token_vectors.empty(); }
  /// Documents whose pooled vector is zero because they have no tokens.
  std::vector<std::size_t> flagged_docs() const;
};

/// Contextual vectors for every token (documents longer than max_len are
/// encoded chunk by chunk) and their mean-pooled document vectors.
EmbeddingSet embed_corpus(const EncoderParams& params, const Corpus& corpus);

// Exchange format: "dim=<d> count=<n>" then n lines "<key> <v1> ... <vd>".
// Document files are keyed by doc id, token files by "<doc-id>:<position>".
struct KeyedVectors {
  std::size_t dim = 0;
  std::vector<std::string> keys;
  Matrix rows;
};

std::string format_keyed_vectors(const KeyedVectors& kv);
KeyedVectors parse_keyed_vectors(const std::string& text);

std::string format_doc_vectors(const EmbeddingSet& e);
std::string format_token_vectors(const EmbeddingSet& e);

void export_embeddings(const EmbeddingSet& e, const std::filesystem::path& doc_path,
                       const std::optional<std::filesystem::path>& token_path = std::nullopt);

/// Aligns file rows with the corpus by document id. Missing documents or a
/// token count that differs from the document length raise an InputError
/// naming the document.
EmbeddingSet import_embeddings(const std::string& doc_text, const Corpus& corpus,
                               const std::optional<std::string>& token_text = std::nullopt);
EmbeddingSet import_embeddings(const std::filesystem::path& doc_path, const Corpus& corpus,
                               const std::optional<std::filesystem::path>& token_path = std::nullopt);

struct KMeansResult {
  Matrix centroids;
  std::vector<std::size_t> assignment;
  std::size_t iterations = 0;
  bool converged = false;
  std::size_t reseeds = 0;
};

/// k-means++ seeding, at most max_iter Lloyd steps, stop when assignments
/// are stable. Empty clusters are re-seeded at the point farthest from its
/// centroid.
KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed,
                    std::size_t max_iter = 100);

/// Sense id for every token occurrence, per document.
struct SenseAssignment {
  std::size_t k = 0;
  std::vector<std::vector<std::size_t>> senses;
  KMeansResult clustering;
};

SenseAssignment cluster_tokens(const EmbeddingSet& e, std::size_t k, std::uint64_t seed);

/// Corpus over sense tokens labelled "<most frequent surface>#<sense>".
Corpus refine_corpus(const Corpus& corpus, const SenseAssignment& senses);

}  // namespace topicmine
