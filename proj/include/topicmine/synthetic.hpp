#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "topicmine/corpus.hpp"
#include "topicmine/lda.hpp"

namespace topicmine {

struct PlantedSpec {
  std::size_t topics = 3;
  std::size_t vocab_size = 40;
  std::size_t docs = 500;
  std::size_t doc_length = 50;
  /// Symmetric Dirichlet concentration for document mixtures.
  double doc_concentration = 0.2;
  /// Each topic owns a contiguous block of V/K words; in-block words get
  /// Dirichlet weight `anchor_weight`, the rest `background_weight`.
  double anchor_weight = 1.0;
  double background_weight = 0.01;
  std::uint64_t seed = 1;
};

/// Corpus sampled from a known LDA model. Vocabulary ids equal the planted
/// word indices (surfaces "w00", "w01", ...).
struct PlantedCorpus {
  Corpus corpus;
  Matrix theta;  // M x K
  Matrix phi;    // K x V
  std::vector<std::vector<std::size_t>> z;
};

PlantedCorpus make_planted_corpus(const PlantedSpec& spec);

/// Minimum over topic permutations of the mean L1 distance between matched
/// rows of two K x V matrices. Exhaustive, so K should stay small.
double best_permutation_l1(const Matrix& truth, const Matrix& estimate);

/// JSON-lines review corpus with three planted aspects (logistics, price,
/// quality) mixed with filler and stopwords.
std::string make_sample_reviews(std::size_t docs, std::uint64_t seed);

}  // namespace topicmine
