#include <doctest.h>

#include <cmath>
#include <numeric>

#include "helpers.hpp"
#include "topicmine/encoder.hpp"
#include "topicmine/error.hpp"

using namespace topicmine;

namespace {

Corpus memorizable_corpus() {
  std::vector<TokenSeq> docs(200, TokenSeq{"the", "phone", "battery", "lasts", "all", "day"});
  return test::corpus_of(docs);
}

// Relative error; magnitudes below the floor are treated as zero.
double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-5});
}

}  // namespace

TEST_SUITE("encoder") {

TEST_CASE("rate 1 under pure-mask masks every position") {
  const std::vector<std::vector<TokenId>> seqs = {{0, 1, 2}};
  const MaskedBatch b = mask_tokens(seqs, 3, 1.0, MaskStrategy::pure_mask, 1);
  CHECK(b.mask_positions[0] == std::vector<std::size_t>{0, 1, 2});
  CHECK(b.labels[0] == std::vector<TokenId>{0, 1, 2});
  for (auto id : b.sequences[0]) CHECK(id == b.mask_id);
}

TEST_CASE("mask rate outside [0,1] is a config error") {
  const std::vector<std::vector<TokenId>> seqs = {{0, 1}};
  CHECK_THROWS_AS(mask_tokens(seqs, 2, 1.5, MaskStrategy::pure_mask, 1), ConfigError);
  CHECK_THROWS_AS(mask_tokens(seqs, 2, -0.1, MaskStrategy::pure_mask, 1), ConfigError);
}

TEST_CASE("masking count over 10000 tokens lies within binomial 3 sigma") {
  std::vector<std::vector<TokenId>> seqs(100, std::vector<TokenId>(100));
  for (auto& s : seqs) std::iota(s.begin(), s.end(), 0);
  const MaskedBatch b = mask_tokens(seqs, 100, 0.15, MaskStrategy::pure_mask, 42);
  CHECK(b.num_masked() >= 1393);
  CHECK(b.num_masked() <= 1607);
}

TEST_CASE("bert-80-10-10 replacement proportions") {
  std::vector<std::vector<TokenId>> seqs(200, std::vector<TokenId>(100, 3));
  const MaskedBatch b = mask_tokens(seqs, 50, 0.5, MaskStrategy::bert_80_10_10, 9);
  std::size_t masked = 0, random = 0, kept = 0;
  for (std::size_t s = 0; s < seqs.size(); ++s) {
    for (std::size_t i = 0; i < b.mask_positions[s].size(); ++i) {
      const auto pos = b.mask_positions[s][i];
      switch (b.replacement_kinds[s][i]) {
        case Replacement::masked:
          ++masked;
          CHECK(b.sequences[s][pos] == b.mask_id);
          break;
        case Replacement::random:
          ++random;
          CHECK(b.sequences[s][pos] < 50);
          break;
        case Replacement::kept:
          ++kept;
          CHECK(b.sequences[s][pos] == 3);
          break;
      }
    }
  }
  const double n = static_cast<double>(b.num_masked());
  CHECK(std::abs(masked / n - 0.8) < 3 * std::sqrt(0.8 * 0.2 / n));
  CHECK(std::abs(random / n - 0.1) < 3 * std::sqrt(0.1 * 0.9 / n));
  CHECK(std::abs(kept / n - 0.1) < 3 * std::sqrt(0.1 * 0.9 / n));
}

TEST_CASE("masking never selects padding") {
  const std::vector<std::vector<TokenId>> seqs = {{1, 2}, {1, 2, 3, 4, 5}, {4}};
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const MaskedBatch b = mask_tokens(seqs, 6, 0.5, MaskStrategy::bert_80_10_10, seed);
    for (std::size_t s = 0; s < seqs.size(); ++s) {
      CHECK(b.mask_positions[s].size() == b.labels[s].size());
      for (std::size_t i = 0; i < b.mask_positions[s].size(); ++i) {
        const auto pos = b.mask_positions[s][i];
        REQUIRE(pos < b.lengths[s]);
        CHECK(b.labels[s][i] == seqs[s][pos]);
      }
      for (std::size_t pos = b.lengths[s]; pos < b.sequences[s].size(); ++pos) {
        CHECK(b.sequences[s][pos] == b.pad_id);
      }
    }
  }
}

TEST_CASE("mlm_loss examples") {
  Matrix uniform = Matrix::Constant(1, 4, 0.25);
  const std::vector<TokenId> l0 = {2};
  CHECK(mlm_loss(uniform, l0) == doctest::Approx(std::log(4.0)).epsilon(1e-12));

  Matrix perfect = Matrix::Zero(1, 4);
  perfect(0, 1) = 1.0;
  const std::vector<TokenId> l1 = {1};
  CHECK(mlm_loss(perfect, l1) == 0.0);

  Matrix two(2, 4);
  two << 0.5, 0.5, 0.0, 0.0, 0.25, 0.25, 0.25, 0.25;
  const std::vector<TokenId> l2 = {0, 3};
  CHECK(mlm_loss(two, l2) == doctest::Approx(std::log(2.0) + std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("mlm_loss clamps zero probabilities and counts them") {
  Matrix p = Matrix::Zero(1, 3);
  p(0, 0) = 1.0;
  const std::vector<TokenId> l = {2};
  std::size_t clamped = 0;
  CHECK(mlm_loss(p, l, &clamped) == doctest::Approx(-std::log(1e-12)));
  CHECK(clamped == 1);
}

TEST_CASE("mlm_loss over a batch equals the sum over single positions") {
  EncoderConfig cfg{.vocab_size = 12, .dim = 8, .heads = 2, .layers = 1, .max_len = 16};
  const EncoderParams p = init_params(cfg, 4);
  std::vector<TokenId> ids = {1, 12, 3, 12, 12, 7};  // 12 is [MASK]
  const Encoding e = encode(p, ids);
  const std::vector<TokenId> labels = {2, 5, 9};
  double singles = 0.0;
  for (Eigen::Index r = 0; r < e.probabilities.rows(); ++r) {
    const std::vector<TokenId> one = {labels[static_cast<std::size_t>(r)]};
    singles += mlm_loss(e.probabilities.row(r), one);
  }
  CHECK(mlm_loss(e.probabilities, labels) == singles);
}

TEST_CASE("encode shapes, normalization and determinism") {
  EncoderConfig cfg{.vocab_size = 10, .dim = 16, .heads = 4, .layers = 2, .max_len = 8};
  const EncoderParams p = init_params(cfg, 1);
  const std::vector<TokenId> ids = {0, 10, 3, 10, 9};
  const Encoding e = encode(p, ids);
  CHECK(e.hidden.rows() == 5);
  CHECK(e.hidden.cols() == 16);
  CHECK(e.predicted_at == std::vector<std::size_t>{1, 3});
  for (Eigen::Index r = 0; r < e.probabilities.rows(); ++r) {
    CHECK(std::abs(e.probabilities.row(r).sum() - 1.0) <= 1e-9);
    CHECK(e.probabilities.row(r).minCoeff() >= 0.0);
  }
  const Encoding again = encode(p, ids);
  CHECK(again.hidden == e.hidden);
  const std::vector<TokenId> too_long(9, 1);
  CHECK_THROWS_WITH_AS(encode(p, too_long), doctest::Contains("8"), ConfigError);
}

TEST_CASE("fresh parameters predict a near-uniform distribution") {
  const std::size_t V = 30;
  EncoderConfig cfg{.vocab_size = V};
  const std::vector<TokenId> ids = {3, 7, static_cast<TokenId>(V), 11, 2};
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Encoding e = encode(init_params(cfg, seed), ids);
    const auto row = e.probabilities.row(0);
    const double entropy = -(row.array() * row.array().log()).sum();
    CHECK(std::abs(entropy - std::log(double(V))) <= 0.01 * std::log(double(V)));
  }
}

TEST_CASE("analytic gradient matches central finite differences") {
  EncoderConfig cfg{.vocab_size = 20, .dim = 8, .heads = 2, .layers = 2, .max_len = 16, .init_std = 0.5};
  EncoderParams p = init_params(cfg, 3);
  const std::vector<std::vector<TokenId>> seqs = {
      {1, 2, 3, 4, 5, 6, 7}, {8, 9, 10, 11}, {12, 13, 14, 15, 16, 17, 18, 19, 0}};
  for (auto strategy : {MaskStrategy::pure_mask, MaskStrategy::bert_80_10_10}) {
    const MaskedBatch batch = mask_tokens(seqs, 20, 0.4, strategy, 5);
    REQUIRE(batch.num_masked() > 0);
    EncoderParams grad = zeros_like(p);
    mlm_loss_and_gradient(p, batch, &grad);
    auto values = p.tensors();
    const auto grads = grad.tensors();
    double worst = 0.0;
    std::string worst_name;
    const double h = 1e-5;
    for (std::size_t t = 0; t < values.size(); ++t) {
      Matrix& m = *values[t].second;
      for (Eigen::Index i = 0; i < m.size(); ++i) {
        const double orig = m.data()[i];
        m.data()[i] = orig + h;
        const double up = mlm_loss_and_gradient(p, batch, nullptr);
        m.data()[i] = orig - h;
        const double down = mlm_loss_and_gradient(p, batch, nullptr);
        m.data()[i] = orig;
        const double err = relative_error((up - down) / (2 * h), grads[t].second->data()[i]);
        if (err > worst) {
          worst = err;
          worst_name = values[t].first;
        }
      }
    }
    INFO("worst tensor: " << worst_name);
    CHECK(worst <= 1e-4);
  }
}

TEST_CASE("training is deterministic and zero steps keep the initialization") {
  const Corpus c = test::corpus_of({{"a", "b", "c", "d"}, {"b", "c", "a"}, {"d", "a"}});
  EncoderConfig cfg{.vocab_size = c.vocab_size(), .dim = 8, .heads = 2, .layers = 1, .max_len = 8};
  TrainConfig tc{.steps = 10, .batch_size = 2};
  const TrainResult a = train(c, cfg, tc);
  const TrainResult b = train(c, cfg, tc);
  CHECK(a.loss_history.size() == 10);
  CHECK(a.loss_history == b.loss_history);
  CHECK(format_params(a.params) == format_params(b.params));

  tc.steps = 0;
  const TrainResult none = train(c, cfg, tc);
  CHECK(none.loss_history.empty());
  CHECK(format_params(none.params) == format_params(init_params(cfg, derive_seed(tc.seed, 0))));
}

TEST_CASE("training on a memorizable corpus halves the loss") {
  const Corpus c = memorizable_corpus();
  const TrainResult r = train(c, EncoderConfig{.vocab_size = c.vocab_size()}, TrainConfig{});
  REQUIRE(r.loss_history.size() == 200);
  CHECK(r.loss_history.back() <= 0.5 * r.loss_history.front());
}

TEST_CASE("training preconditions") {
  const Corpus one = test::corpus_of({{"a", "a"}});
  CHECK_THROWS_AS(train(one, EncoderConfig{.vocab_size = 1}, TrainConfig{}), ConfigError);
  const Corpus c = test::corpus_of({{"a", "b"}});
  CHECK_THROWS_AS(train(c, EncoderConfig{.vocab_size = 2}, TrainConfig{.mask_rate = 0.0}), ConfigError);
}

TEST_CASE("divergent training aborts with the step index") {
  const Corpus c = memorizable_corpus();
  try {
    train(c, EncoderConfig{.vocab_size = c.vocab_size(), .dim = 8, .heads = 2, .layers = 1},
          TrainConfig{.steps = 50, .learning_rate = 1e300});
    FAIL("expected a numerical abort");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("step") != std::string::npos);
    CHECK(e.exit_code() == ExitCode::numerical_abort);
  }
}

TEST_CASE("pool_document") {
  Matrix one(1, 2);
  one << 3, -1;
  CHECK(pool_document(one) == RowVector(one.row(0)));
  Matrix sym(2, 2);
  sym << 1, 2, -1, -2;
  CHECK(pool_document(sym).isZero());
  Matrix three(3, 2);
  three << 1, 0, 0, 1, 2, 2;
  CHECK(pool_document(three).isApprox(RowVector::Ones(2)));
  CHECK(pool_document(Matrix(0, 4)).size() == 4);
  CHECK(pool_document(Matrix(0, 4)).isZero());
}

TEST_CASE("parameters round trip through text") {
  EncoderConfig cfg{.vocab_size = 7, .dim = 8, .heads = 2, .layers = 2, .max_len = 6};
  const EncoderParams p = init_params(cfg, 2);
  const EncoderParams q = parse_params(format_params(p));
  CHECK(q.config == p.config);
  const auto a = p.tensors();
  const auto b = q.tensors();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(*a[i].second == *b[i].second);
}

}  // TEST_SUITE
