#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "topicmine/corpus.hpp"
#include "topicmine/random.hpp"

namespace topicmine {

using Matrix = Eigen::MatrixXd;

struct LdaConfig {
  std::size_t topics = 1;
  double alpha = 50.0;  // per-topic pseudo-count on theta
  double beta = 0.01;   // per-word pseudo-count on phi
  std::size_t iterations = 500;
  std::size_t burn_in = 0;
  /// Average the estimators over post-burn-in sweeps instead of using the
  /// final state. Topic labels can switch between sweeps, so this is off
  /// by default.
  bool average_after_burn_in = false;
  std::uint64_t seed = 42;

  /// alpha = 50 / K, beta = 0.01.
  static LdaConfig defaults(std::size_t topics);
  void validate() const;
  bool operator==(const LdaConfig&) const = default;
};

/// Collapsed Gibbs state: per-token assignments and the count matrices
/// derived from them.
struct LdaModel {
  LdaConfig config;
  std::size_t num_topics = 0;
  std::size_t vocab_size = 0;
  std::vector<std::vector<std::int32_t>> z;
  std::vector<std::int64_t> n_mk;  // M x K, row-major
  std::vector<std::int64_t> n_kv;  // K x V, row-major
  std::vector<std::int64_t> n_k;
  std::vector<std::int64_t> n_m;

  Matrix theta_sum, phi_sum;  // post-burn-in accumulators
  std::size_t samples = 0;

  std::size_t num_docs() const { return n_m.size(); }
  std::int64_t doc_topic(std::size_t m, std::size_t k) const { return n_mk[m * num_topics + k]; }
  std::int64_t topic_word(std::size_t k, std::size_t v) const { return n_kv[k * vocab_size + v]; }
  std::int64_t total_tokens() const;
};

/// Uniform random assignment of every token position.
LdaModel init_assignments(const Corpus& corpus, const LdaConfig& config, Rng& rng);

/// Resamples every position once, in document then position order.
void gibbs_sweep(LdaModel& model, const Corpus& corpus, Rng& rng);

/// Checks the three count identities and that counts match z. Returns a
/// description of the first violation.
std::optional<std::string> audit_counts(const LdaModel& model, const Corpus& corpus);

LdaModel fit(const Corpus& corpus, const LdaConfig& config);

/// Dirichlet-smoothed estimators from the counts (or post-burn-in averages).
Matrix estimate_theta(const LdaModel& model);
Matrix estimate_phi(const LdaModel& model);
Matrix theta_from_counts(const LdaModel& model);
Matrix phi_from_counts(const LdaModel& model);

/// log p(w, z | alpha, beta) with theta and phi integrated out.
double collapsed_log_likelihood(const LdaModel& model);

/// Renames topic k to perm[k] in z and every count matrix.
LdaModel relabel_topics(const LdaModel& model, std::span<const std::size_t> perm);

struct Keyword {
  TokenId id = 0;
  std::string word;
  double prob = 0.0;
};

struct TopicKeywords {
  std::size_t topic_index = 0;
  std::vector<Keyword> keywords;
  std::string label;  // left empty; filled in by a human reader
  bool truncated = false;
};

/// Highest-phi words for a topic, ties broken by ascending token id.
TopicKeywords top_keywords(const Matrix& phi, const Vocabulary& vocab, std::size_t topic,
                           std::size_t top_n);
TopicKeywords top_keywords(const LdaModel& model, const Vocabulary& vocab, std::size_t topic,
                           std::size_t top_n);
std::vector<TopicKeywords> topic_report(const LdaModel& model, const Vocabulary& vocab,
                                        std::size_t top_n);
std::string format_topic_report(std::span<const TopicKeywords> report);

struct HeldOutTheta {
  Matrix theta;
  bool converged = true;  // false when no fold-in sweep was run
};

/// Gibbs fold-in with the topic-word counts frozen.
HeldOutTheta infer_held_out(const LdaModel& model, const Corpus& held_out,
                            std::size_t fold_in_iterations, std::uint64_t seed);

enum class HeldOutEvaluation {
  /// Fold in on every held-out token and score the same tokens.
  full_document,
  /// Fold in on even positions, score odd positions.
  document_completion,
};

struct TopicSweepConfig {
  std::size_t k_min = 1;
  std::size_t k_max = 14;
  LdaConfig base;           // topics ignored; alpha rescaled per K when scale_alpha
  bool scale_alpha = true;  // alpha = 50 / K
  double split_ratio = 0.8;  // training share
  std::size_t fold_in_iterations = 50;
  HeldOutEvaluation evaluation = HeldOutEvaluation::document_completion;
  std::size_t jobs = 1;
};

struct TopicSweepPoint {
  std::size_t topics = 0;
  double perplexity = 0.0;
};

struct TopicSweepResult {
  std::vector<TopicSweepPoint> curve;
  std::size_t best_topics = 0;
  std::vector<std::size_t> train_docs, held_out_docs;
};

/// Seeded train/held-out split by documents.
void split_documents(std::size_t num_docs, double split_ratio, std::uint64_t seed,
                     std::vector<std::size_t>& train, std::vector<std::size_t>& held_out);

/// Held-out perplexity of a fitted model.
double held_out_perplexity(const LdaModel& model, const Corpus& held_out,
                           std::size_t fold_in_iterations, HeldOutEvaluation evaluation,
                           std::uint64_t seed);

/// Perplexity curve over K in [k_min, k_max]; best K is the argmin, ties to
/// the smaller K.
TopicSweepResult select_topic_count(const Corpus& corpus, const TopicSweepConfig& config);
std::string format_sweep_csv(const TopicSweepResult& result);

// Model file: one JSON header line (config, V, M, K, checksums), then M
// rows of doc-topic counts and K rows of topic-word counts.
std::string format_model(const LdaModel& model);
LdaModel parse_model(const std::string& text);

}  // namespace topicmine
