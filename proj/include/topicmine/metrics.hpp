#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "topicmine/corpus.hpp"
#include "topicmine/lda.hpp"

namespace topicmine {

struct WindowMode {
  enum class Kind { document, sliding };
  Kind kind = Kind::document;
  std::size_t width = 0;

  static WindowMode document() { return {}; }
  static WindowMode sliding(std::size_t width) { return {Kind::sliding, width}; }
  /// "doc" or "slide:N".
  static WindowMode parse(std::string_view text);
  std::string to_string() const;
  bool operator==(const WindowMode&) const = default;
};

/// Window counts for a restricted keyword set. Each window contributes at
/// most once per token and once per unordered pair.
struct CooccurrenceStats {
  WindowMode mode;
  std::int64_t n_windows = 0;
  std::map<TokenId, std::int64_t> doc_freq;
  std::map<std::pair<TokenId, TokenId>, std::int64_t> pair_freq;  // key.first < key.second

  std::int64_t freq(TokenId w) const;
  std::int64_t joint(TokenId a, TokenId b) const;
};

/// Document mode: one window per document. Sliding mode: every width-w span
/// (step 1); documents no longer than w form a single window.
CooccurrenceStats count_cooccurrence(const Corpus& corpus, WindowMode mode,
                                     std::span<const TokenId> keywords);

struct UMass {
  double sum = 0.0;
  double mean = 0.0;
  bool defined = true;  // false when fewer than two usable keywords
  std::size_t skipped = 0;  // keywords with zero frequency
};

/// Sum over t = 2..T, l < t of log2((N(w_t, w_l) + smoothing) / N(w_l)).
UMass tc_umass(const CooccurrenceStats& stats, std::span<const TokenId> keywords,
               double smoothing = 1.0);

/// ln(p(a,b) / (p(a) p(b))) over window frequencies; -inf when the pair
/// never co-occurs.
double pmi(const CooccurrenceStats& stats, TokenId a, TokenId b);
/// PMI / -ln p(a,b), in [-1, 1]; -1 for zero co-occurrence, +1 when the
/// pair fills every window.
double npmi(const CooccurrenceStats& stats, TokenId a, TokenId b);

struct CvScore {
  double paper = 0.0;  // pairwise NPMI sum divided by |W|
  double mean = 0.0;   // pairwise NPMI mean
  bool defined = true;
};

CvScore c_v_score(const CooccurrenceStats& stats, std::span<const TokenId> keywords);

/// exp(-sum_d sum_n ln sum_k theta[d][k] phi[k][w] / total tokens).
double perplexity(const Matrix& theta, const Matrix& phi, const Corpus& corpus);

struct CoherenceSettings {
  std::size_t top_t = 10;
  WindowMode umass_window = WindowMode::document();
  WindowMode cv_window = WindowMode::sliding(10);
  double smoothing = 1.0;
};

struct TopicCoherence {
  std::size_t topic_index = 0;
  std::vector<TokenId> keywords;
  double u_mass_sum = 0.0, u_mass_mean = 0.0, c_v_paper = 0.0, c_v_mean = 0.0;
  bool u_mass_defined = true, c_v_defined = true;
};

struct CoherenceReport {
  std::vector<TopicCoherence> topics;
  double u_mass_sum = 0.0, u_mass_mean = 0.0, c_v_paper = 0.0, c_v_mean = 0.0;
  CoherenceSettings settings;
};

/// Scores explicit keyword lists (one per topic).
CoherenceReport coherence_report(std::span<const std::vector<TokenId>> topic_keywords,
                                 const Corpus& corpus, const CoherenceSettings& settings);
/// Scores the model's top_t keywords per topic.
CoherenceReport coherence_report(const LdaModel& model, const Corpus& corpus,
                                 const CoherenceSettings& settings);

std::string format_coherence_report(const CoherenceReport& report, const Vocabulary& vocab);

}  // namespace topicmine
