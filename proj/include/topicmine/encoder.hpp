#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "topicmine/corpus.hpp"
#include "topicmine/random.hpp"

namespace topicmine {

using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

// Masked-language-model encoder: a small pre-norm transformer trained from
// scratch. Token ids 0..V-1 are vocabulary entries; V is [MASK] and V+1 is
// [PAD]. The output projection shares the first V rows of the token
// embedding.

enum class MaskStrategy { pure_mask, bert_80_10_10 };
enum class Replacement : std::uint8_t { masked, random, kept };

MaskStrategy parse_mask_strategy(std::string_view name);
std::string_view to_string(MaskStrategy s);

struct MaskedBatch {
  /// Padded to a common width with pad_id.
  std::vector<std::vector<TokenId>> sequences;
  std::vector<std::size_t> lengths;
  std::vector<std::vector<std::size_t>> mask_positions;
  std::vector<std::vector<TokenId>> labels;
  std::vector<std::vector<Replacement>> replacement_kinds;
  TokenId mask_id = 0;
  TokenId pad_id = 0;

  std::size_t num_masked() const;
};

/// Selects each non-padding position independently with probability
/// mask_rate. Throws ConfigError when mask_rate is outside [0, 1].
MaskedBatch mask_tokens(std::span<const std::vector<TokenId>> sequences, std::size_t vocab_size,
                        double mask_rate, MaskStrategy strategy, Rng& rng);
MaskedBatch mask_tokens(std::span<const std::vector<TokenId>> sequences, std::size_t vocab_size,
                        double mask_rate, MaskStrategy strategy, std::uint64_t seed);

struct EncoderConfig {
  std::size_t vocab_size = 0;
  std::size_t dim = 64;
  std::size_t heads = 4;
  std::size_t layers = 2;
  std::size_t max_len = 128;
  std::size_t ffn_dim = 0;  // 0 means 4 * dim
  double init_std = 0.02;

  std::size_t ffn() const { return ffn_dim ? ffn_dim : 4 * dim; }
  TokenId mask_id() const { return static_cast<TokenId>(vocab_size); }
  TokenId pad_id() const { return static_cast<TokenId>(vocab_size + 1); }
  void validate() const;
  bool operator==(const EncoderConfig&) const = default;
};

struct EncoderLayer {
  Matrix wq, wk, wv, wo;  // dim x dim
  Matrix bq, bk, bv, bo;  // 1 x dim
  Matrix w1, b1;          // dim x ffn, 1 x ffn
  Matrix w2, b2;          // ffn x dim, 1 x dim
  Matrix ln1_gain, ln1_bias, ln2_gain, ln2_bias;
};

struct EncoderParams {
  EncoderConfig config;
  Matrix token_embedding;     // (V + 2) x dim
  Matrix position_embedding;  // max_len x dim
  std::vector<EncoderLayer> layers;
  Matrix final_gain, final_bias;  // 1 x dim
  Matrix output_bias;             // 1 x V

  /// Every tensor in a fixed order, with a stable name.
  std::vector<std::pair<std::string, Matrix*>> tensors();
  std::vector<std::pair<std::string, const Matrix*>> tensors() const;
  std::size_t parameter_count() const;
  bool all_finite() const;
};

EncoderParams init_params(const EncoderConfig& config, std::uint64_t seed);
EncoderParams zeros_like(const EncoderParams& params);

struct Encoding {
  Matrix hidden;                           // n x dim contextual vectors
  std::vector<std::size_t> predicted_at;   // positions holding [MASK]
  Matrix probabilities;                    // one row over V per predicted position
};

/// Contextual vectors for every position plus a distribution over the
/// vocabulary for each [MASK] position. Throws ConfigError past max_len.
Encoding encode(const EncoderParams& params, std::span<const TokenId> ids);

/// Cross-entropy summed over predicted positions (natural log). Label
/// probabilities below 1e-12 are clamped and counted in `clamped`.
double mlm_loss(const Matrix& probabilities, std::span<const TokenId> labels,
                std::size_t* clamped = nullptr);

/// Summed loss over the batch; when grad is non-null, adds grad_scale times
/// the loss gradient into it.
double mlm_loss_and_gradient(const EncoderParams& params, const MaskedBatch& batch,
                             EncoderParams* grad, double grad_scale = 1.0,
                             std::size_t* clamped = nullptr);

struct TrainConfig {
  double mask_rate = 0.15;
  MaskStrategy strategy = MaskStrategy::pure_mask;
  std::size_t steps = 200;
  std::size_t batch_size = 16;
  double learning_rate = 0.05;
  std::uint64_t seed = 42;
};

struct TrainResult {
  EncoderParams params;
  /// Raw summed loss of each step's batch.
  std::vector<double> loss_history;
  std::size_t clamped = 0;
};

/// Plain SGD on the per-batch mean loss. Throws NumericalError on a
/// non-finite loss.
TrainResult train(const Corpus& corpus, const EncoderConfig& model, const TrainConfig& config);

/// Splits documents longer than max_len into consecutive chunks.
std::vector<std::vector<TokenId>> training_sequences(const Corpus& corpus, std::size_t max_len);

/// Mean of the rows; zero vector for an empty document.
RowVector pool_document(const Matrix& token_vectors);

std::string format_params(const EncoderParams& params);
EncoderParams parse_params(const std::string& text);

}  // namespace topicmine
