#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "topicmine/encoder.hpp"
#include "topicmine/lda.hpp"
#include "topicmine/metrics.hpp"
#include "topicmine/projection.hpp"

namespace topicmine {

/// Every tunable of a run. Serialized verbatim into the run directory.
struct RunConfig {
  // corpus
  std::string input;
  std::string stopwords;  // empty: built-in list
  std::int64_t min_count = 2;
  // encoder
  double mask_rate = 0.15;
  std::string strategy = "pure-mask";
  std::size_t dim = 64;
  std::size_t heads = 4;
  std::size_t layers = 2;
  std::size_t max_len = 128;
  std::size_t steps = 200;
  std::size_t batch_size = 16;
  double learning_rate = 0.05;
  std::string from_file;        // external document vectors
  std::string from_file_tokens;  // external token vectors
  std::size_t senses = 0;       // 0: LDA on words; otherwise sense clusters
  // lda
  std::size_t k = 0;  // 0: take K* from the sweep
  std::size_t kmin = 1;
  std::size_t kmax = 14;
  std::optional<double> alpha;  // unset: 50 / K
  double beta = 0.01;
  std::size_t iters = 500;
  std::size_t burn_in = 0;
  bool average = false;
  std::size_t fold_in = 50;
  double split_ratio = 0.8;
  // evaluation
  std::size_t top_t = 10;
  std::string window = "slide:10";
  // projection
  double lambda = 1.0;
  double tsne_perplexity = 30.0;
  std::size_t tsne_iters = 1000;
  double tsne_learning_rate = 200.0;
  // run
  std::uint64_t seed = 42;
  std::size_t jobs = 1;
  std::string out = "run";

  /// Throws ConfigError on the first invalid field.
  void validate() const;

  EncoderConfig encoder_config(std::size_t vocab_size) const;
  TrainConfig train_config() const;
  LdaConfig lda_config(std::size_t topics) const;
  TopicSweepConfig sweep_config() const;
  CoherenceSettings coherence_settings() const;
  TsneSettings tsne_settings() const;
};

nlohmann::ordered_json to_json(const RunConfig& c);
/// Unknown keys and type mismatches raise ConfigError.
RunConfig run_config_from_json(const nlohmann::json& j, RunConfig base = {});

}  // namespace topicmine
