#include <doctest.h>

#include <cmath>

#include "topicmine/error.hpp"
#include "topicmine/projection.hpp"
#include "topicmine/random.hpp"

using namespace topicmine;

namespace {

Matrix gaussian_clouds(std::size_t per_cloud, std::size_t dim, double separation, std::uint64_t seed,
                       std::vector<std::size_t>& labels) {
  Rng rng(seed);
  Matrix x(static_cast<Eigen::Index>(2 * per_cloud), static_cast<Eigen::Index>(dim));
  labels.clear();
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const std::size_t cloud = static_cast<std::size_t>(i) / per_cloud;
    labels.push_back(cloud);
    for (Eigen::Index c = 0; c < x.cols(); ++c) x(i, c) = rng.normal() + (c == 0 && cloud ? separation : 0.0);
  }
  return x;
}

EmbeddingSet embeddings_of(const Matrix& rows) {
  EmbeddingSet e;
  e.dim = static_cast<std::size_t>(rows.cols());
  e.doc_vectors = rows;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) e.doc_ids.push_back("d" + std::to_string(i));
  return e;
}

TsneSettings small_data(std::uint64_t seed) {
  TsneSettings s;
  s.perplexity = 5;
  s.seed = seed;
  return s;
}

}  // namespace

TEST_SUITE("projection") {

TEST_CASE("fusion arithmetic") {
  Matrix e(1, 2);
  e << 3, 4;
  Matrix theta(1, 2);
  theta << 1, 0;
  const auto f = fuse_vectors(embeddings_of(e), theta, 1.0);
  REQUIRE(f.size() == 1);
  RowVector expect(4);
  expect << 0.6, 0.8, 1.0, 0.0;
  CHECK(f[0].vector.isApprox(expect, 1e-15));
  CHECK_FALSE(f[0].zero_embedding);

  const auto zero_weight = fuse_vectors(embeddings_of(e), theta, 0.0);
  CHECK(zero_weight[0].vector.tail(2).isZero());
}

TEST_CASE("fusion invariants") {
  Rng rng(3);
  Matrix e(20, 5), theta(20, 3);
  for (Eigen::Index i = 0; i < 20; ++i) {
    for (Eigen::Index c = 0; c < 5; ++c) e(i, c) = i == 7 ? 0.0 : rng.normal();
    const auto t = rng.dirichlet(3, 0.5);
    for (Eigen::Index k = 0; k < 3; ++k) theta(i, k) = t[static_cast<std::size_t>(k)];
  }
  for (double lambda : {0.0, 0.5, 1.0, 3.0}) {
    const auto f = fuse_vectors(embeddings_of(e), theta, lambda);
    for (std::size_t i = 0; i < f.size(); ++i) {
      CHECK(f[i].vector.size() == 8);
      CHECK(std::abs(f[i].vector.tail(3).sum() - lambda) <= 1e-9);
      if (i == 7) {
        CHECK(f[i].zero_embedding);
        CHECK(f[i].vector.head(5).isZero());
      } else {
        CHECK(std::abs(f[i].vector.head(5).norm() - 1.0) <= 1e-12);
      }
    }
  }
  CHECK_THROWS_AS(fuse_vectors(embeddings_of(e), theta.topRows(3), 1.0), InputError);
  CHECK_THROWS_AS(fuse_vectors(embeddings_of(e), theta, -1.0), ConfigError);
}

TEST_CASE("affinity normalization and bandwidth search") {
  std::vector<std::size_t> labels;
  const Matrix x = gaussian_clouds(30, 6, 5.0, 4, labels);
  const Affinities a = compute_affinities(x, 12.0);
  for (Eigen::Index i = 0; i < a.conditional.rows(); ++i) {
    CHECK(std::abs(a.conditional.row(i).sum() - 1.0) <= 1e-6);
    CHECK(a.conditional(i, i) == 0.0);
  }
  CHECK(std::abs(a.joint.sum() - 1.0) <= 1e-9);
  CHECK((a.joint - a.joint.transpose()).cwiseAbs().maxCoeff() == 0.0);
  for (std::size_t i = 0; i < a.entropy.size(); ++i) {
    const bool flagged = std::find(a.unconverged.begin(), a.unconverged.end(), i) != a.unconverged.end();
    if (!flagged) CHECK(std::abs(a.entropy[i] - std::log(12.0)) <= 1e-5);
  }
  CHECK(a.unconverged.empty());

  const Matrix q = student_t_affinities(x.leftCols(2));
  CHECK(std::abs(q.sum() - 1.0) <= 1e-9);
  CHECK(kl_divergence(a.joint, a.joint) == doctest::Approx(0.0));
  CHECK(kl_divergence(a.joint, q) >= 0.0);
}

TEST_CASE("perplexity bound and minimum size") {
  const Matrix ten = Matrix::Random(10, 3);
  CHECK_THROWS_AS(tsne(ten, TsneSettings{}), ConfigError);
  CHECK_THROWS_AS(tsne(Matrix::Random(3, 2), TsneSettings{.perplexity = 0.5}), ConfigError);
}

TEST_CASE("KL decreases for every seed and stays non-negative") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::vector<std::size_t> labels;
    const Matrix x = gaussian_clouds(25, 10, 3.0 + static_cast<double>(seed % 4), seed, labels);
    const Projection2D p = tsne(x, small_data(seed));
    REQUIRE(p.kl_history.size() >= 2);
    CHECK(p.kl_history.back() < p.kl_history.front());
    for (double kl : p.kl_history) CHECK(kl >= 0.0);
    CHECK(p.points.allFinite());
  }
}

TEST_CASE("recorded KL matches a direct evaluation") {
  std::vector<std::size_t> labels;
  const Matrix x = gaussian_clouds(20, 5, 4.0, 1, labels);
  const TsneSettings s = small_data(1);
  const Projection2D p = tsne(x, s);
  CHECK(p.kl_iterations.front() == 0);
  CHECK(p.kl_iterations[1] == 10);
  CHECK(p.kl_iterations.back() == s.iterations);
  const Affinities a = compute_affinities(x, s.perplexity);
  CHECK(p.kl_history.back() == doctest::Approx(kl_divergence(a.joint, student_t_affinities(p.points))).epsilon(1e-12));
}

TEST_CASE("two separated clouds stay apart") {
  std::vector<std::size_t> labels;
  const Matrix x = gaussian_clouds(50, 20, 10.0, 8, labels);
  const Projection2D p = tsne(x, TsneSettings{});
  CHECK(silhouette(p.points, labels) > 0.3);
}

TEST_CASE("t-SNE is deterministic and jitters duplicates") {
  std::vector<std::size_t> labels;
  Matrix x = gaussian_clouds(15, 4, 4.0, 2, labels);
  x.row(3) = x.row(4);
  const Projection2D a = tsne(x, small_data(5));
  const Projection2D b = tsne(x, small_data(5));
  CHECK(a.points == b.points);
  CHECK(a.jittered == 1);
}

TEST_CASE("dominant topic ties go to the lowest index") {
  Matrix theta(3, 3);
  theta << 0.2, 0.4, 0.4, 0.5, 0.25, 0.25, 1.0 / 3, 1.0 / 3, 1.0 / 3;
  CHECK(dominant_topics(theta) == std::vector<std::size_t>{1, 0, 0});
}

TEST_CASE("silhouette") {
  Matrix pts(4, 2);
  pts << 0, 0, 0, 1, 10, 0, 10, 1;
  const std::vector<std::size_t> good = {0, 0, 1, 1};
  const double s = silhouette(pts, good);
  // a = 1, b = mean of 10 and sqrt(101) for every point.
  const double b = (10.0 + std::sqrt(101.0)) / 2;
  CHECK(s == doctest::Approx((b - 1.0) / b));
  const std::vector<std::size_t> one = {0, 0, 0, 0};
  CHECK(silhouette(pts, one) == 0.0);
}

TEST_CASE("points CSV") {
  Matrix pts(3, 2);
  pts << 1.5, -2.25, 0.1234567, 3, -0.000001, 7;
  const std::vector<std::string> ids = {"c", "a", "b"};
  const std::vector<std::size_t> dom = {2, 0, 1};
  const std::string csv = format_points_csv(ids, pts, dom);
  CHECK(csv.rfind("doc_id,x,y,dominant_topic\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  const auto rows = parse_points_csv(csv);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].doc_id == "a");
  CHECK(rows[1].doc_id == "b");
  CHECK(rows[2].doc_id == "c");
  CHECK(std::abs(rows[0].x - 0.1234567) <= 1e-6);
  CHECK(std::abs(rows[2].y + 2.25) <= 1e-6);
  CHECK(rows[2].dominant_topic == 2);
  const std::string svg = format_points_svg(pts, dom);
  CHECK(svg.find("<circle") != std::string::npos);
}

}  // TEST_SUITE
