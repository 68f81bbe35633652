#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "topicmine/embeddings.hpp"

namespace topicmine {

/// [L2-normalized document embedding ; lambda * theta_d].
struct FusionVector {
  std::string doc_id;
  RowVector vector;
  double lambda = 1.0;
  bool zero_embedding = false;
};

std::vector<FusionVector> fuse_vectors(const EmbeddingSet& embeddings, const Matrix& theta,
                                       double lambda);
Matrix stack_vectors(std::span<const FusionVector> fused);

struct TsneSettings {
  double perplexity = 30.0;
  std::size_t iterations = 1000;
  double learning_rate = 200.0;
  double exaggeration = 12.0;
  std::size_t exaggeration_iterations = 250;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  std::size_t momentum_switch = 250;
  double init_std = 1e-4;
  std::size_t kl_every = 10;
  std::uint64_t seed = 42;
};

struct Affinities {
  Matrix conditional;  // row i: p_{j|i}, sums to 1
  Matrix joint;        // (P + P^T) / 2M, sums to 1
  std::vector<double> entropy;
  std::vector<std::size_t> unconverged;  // bandwidth search hit the step limit
};

/// Gaussian conditionals over squared distances, bandwidth chosen by
/// bisection so each row's entropy equals ln(perplexity).
Affinities compute_affinities(const Matrix& points, double perplexity);

/// Student-t (one degree of freedom) similarities normalized to sum 1.
Matrix student_t_affinities(const Matrix& embedding);

/// KL(P || Q) over entries with p > 0.
double kl_divergence(const Matrix& p, const Matrix& q);

struct Projection2D {
  Matrix points;  // M x 2
  std::vector<double> kl_history;
  std::vector<std::size_t> kl_iterations;
  std::vector<std::size_t> unconverged_bandwidths;
  std::size_t jittered = 0;
  TsneSettings settings;
};

/// Exact O(M^2) t-SNE. Throws ConfigError when M < 4 or
/// perplexity > (M - 1) / 3; NumericalError on a non-finite gradient.
Projection2D tsne(const Matrix& vectors, const TsneSettings& settings);

/// Argmax of each theta row, ties to the lowest topic index.
std::vector<std::size_t> dominant_topics(const Matrix& theta);

/// Mean silhouette in [-1, 1]; 0 when fewer than two labels are present.
double silhouette(const Matrix& points, std::span<const std::size_t> labels);

/// "doc_id,x,y,dominant_topic" rows sorted by doc_id, 6 fractional digits.
std::string format_points_csv(std::span<const std::string> doc_ids, const Matrix& points,
                              std::span<const std::size_t> dominant);

struct PointRow {
  std::string doc_id;
  double x = 0.0, y = 0.0;
  std::size_t dominant_topic = 0;
};
std::vector<PointRow> parse_points_csv(const std::string& text);

/// Scatter plot, one circle per point coloured by dominant topic.
std::string format_points_svg(const Matrix& points, std::span<const std::size_t> dominant);

}  // namespace topicmine
