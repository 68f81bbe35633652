#include "topicmine/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "topicmine/error.hpp"
#include "topicmine/io_util.hpp"
#include "topicmine/random.hpp"

namespace topicmine {

namespace {

constexpr std::size_t kBisectionSteps = 50;
constexpr double kEntropyTol = 1e-5;
constexpr double kMinGain = 0.01;

Matrix squared_distances(const Matrix& x) {
  const Eigen::VectorXd norms = x.rowwise().squaredNorm();
  Matrix d = (-2.0 * x * x.transpose()).colwise() + norms;
  d.rowwise() += norms.transpose();
  d = d.cwiseMax(0.0);
  d.diagonal().setZero();
  return d;
}

}  // namespace

std::vector<FusionVector> fuse_vectors(const EmbeddingSet& embeddings, const Matrix& theta,
                                       double lambda) {
  if (!(lambda >= 0.0)) throw ConfigError(fmt::format("lambda must be non-negative (got {})", lambda));
  if (embeddings.doc_vectors.rows() != theta.rows()) {
    throw InputError(fmt::format("cannot fuse {} embeddings with {} topic rows",
                                 embeddings.doc_vectors.rows(), theta.rows()));
  }
  const auto d = embeddings.doc_vectors.cols();
  const auto K = theta.cols();
  std::vector<FusionVector> out;
  out.reserve(static_cast<std::size_t>(theta.rows()));
  for (Eigen::Index m = 0; m < theta.rows(); ++m) {
    FusionVector f;
    f.doc_id = embeddings.doc_ids.at(static_cast<std::size_t>(m));
    f.lambda = lambda;
    f.vector.resize(d + K);
    const RowVector e = embeddings.doc_vectors.row(m);
    const double norm = e.norm();
    if (norm > 0.0) {
      f.vector.head(d) = e / norm;
    } else {
      f.vector.head(d).setZero();
      f.zero_embedding = true;
    }
    f.vector.tail(K) = lambda * theta.row(m);
    out.push_back(std::move(f));
  }
  return out;
}

Matrix stack_vectors(std::span<const FusionVector> fused) {
  if (fused.empty()) return {};
  Matrix out(static_cast<Eigen::Index>(fused.size()), fused.front().vector.size());
  for (std::size_t i = 0; i < fused.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = fused[i].vector;
  return out;
}

Affinities compute_affinities(const Matrix& points, double perplexity) {
  const Eigen::Index n = points.rows();
  const Matrix dist = squared_distances(points);
  const double target = std::log(perplexity);
  Affinities a;
  a.conditional = Matrix::Zero(n, n);
  a.entropy.assign(static_cast<std::size_t>(n), 0.0);
  std::vector<double> row(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    double dmin = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) dmin = std::min(dmin, dist(i, j));
    }
    double beta = 1.0, lo = 0.0, hi = std::numeric_limits<double>::infinity();
    double entropy = 0.0;
    bool converged = false;
    for (std::size_t step = 0; step < kBisectionSteps; ++step) {
      double sum = 0.0, weighted = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        const auto jj = static_cast<std::size_t>(j);
        if (j == i) {
          row[jj] = 0.0;
          continue;
        }
        const double shifted = dist(i, j) - dmin;
        row[jj] = std::exp(-beta * shifted);
        sum += row[jj];
        weighted += shifted * row[jj];
      }
      entropy = std::log(sum) + beta * weighted / sum;
      if (std::abs(entropy - target) <= kEntropyTol) {
        converged = true;
        break;
      }
      // Entropy falls as the precision beta grows.
      if (entropy > target) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : (beta + hi) / 2.0;
      } else {
        hi = beta;
        beta = (beta + lo) / 2.0;
      }
    }
    const double sum = std::accumulate(row.begin(), row.end(), 0.0);
    for (Eigen::Index j = 0; j < n; ++j) a.conditional(i, j) = row[static_cast<std::size_t>(j)] / sum;
    a.entropy[static_cast<std::size_t>(i)] = entropy;
    if (!converged) a.unconverged.push_back(static_cast<std::size_t>(i));
  }
  a.joint = (a.conditional + a.conditional.transpose()) / (2.0 * static_cast<double>(n));
  return a;
}

Matrix student_t_affinities(const Matrix& embedding) {
  Matrix num = (1.0 + squared_distances(embedding).array()).inverse().matrix();
  num.diagonal().setZero();
  return num / num.sum();
}

double kl_divergence(const Matrix& p, const Matrix& q) {
  double kl = 0.0;
  for (Eigen::Index j = 0; j < p.cols(); ++j) {
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      if (p(i, j) > 0.0) kl += p(i, j) * std::log(p(i, j) / q(i, j));
    }
  }
  return kl;
}

Projection2D tsne(const Matrix& vectors, const TsneSettings& s) {
  const Eigen::Index n = vectors.rows();
  if (n < 4) throw ConfigError(fmt::format("t-SNE needs at least 4 points (got {})", n));
  if (!(s.perplexity > 0.0) || s.perplexity > static_cast<double>(n - 1) / 3.0) {
    throw ConfigError(fmt::format("t-SNE perplexity {} must be in (0, (M-1)/3 = {}]", s.perplexity,
                                  static_cast<double>(n - 1) / 3.0));
  }
  if (!vectors.allFinite()) throw InputError("t-SNE input contains non-finite values");
  Rng rng(s.seed);
  Projection2D out;
  out.settings = s;

  // Separate exact duplicates so every pairwise distance is positive.
  Matrix x = vectors;
  for (Eigen::Index i = 1; i < n; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      if (x.row(i) == x.row(j)) {
        for (Eigen::Index c = 0; c < x.cols(); ++c) x(i, c) += rng.normal(0.0, 1e-9);
        ++out.jittered;
        break;
      }
    }
  }

  const Affinities aff = compute_affinities(x, s.perplexity);
  out.unconverged_bandwidths = aff.unconverged;
  const Matrix& p = aff.joint;

  Matrix y(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    y(i, 0) = rng.normal(0.0, s.init_std);
    y(i, 1) = rng.normal(0.0, s.init_std);
  }
  Matrix update = Matrix::Zero(n, 2);
  Matrix gains = Matrix::Ones(n, 2);
  Matrix grad(n, 2);
  Matrix num = Matrix::Zero(n, n);  // column-major; only the upper triangle is filled
  for (std::size_t it = 0; it < s.iterations; ++it) {
    const double exaggeration = it < s.exaggeration_iterations ? s.exaggeration : 1.0;
    double z = 0.0;
    for (Eigen::Index j = 1; j < n; ++j) {
      const double yj0 = y(j, 0), yj1 = y(j, 1);
      for (Eigen::Index i = 0; i < j; ++i) {
        const double d0 = y(i, 0) - yj0, d1 = y(i, 1) - yj1;
        const double v = 1.0 / (1.0 + d0 * d0 + d1 * d1);
        num(i, j) = v;
        z += v;
      }
    }
    z *= 2.0;
    if (s.kl_every > 0 && it % s.kl_every == 0) {
      double kl = 0.0;
      for (Eigen::Index j = 1; j < n; ++j) {
        for (Eigen::Index i = 0; i < j; ++i) {
          const double q = num(i, j) / z;
          if (p(i, j) > 0.0) kl += p(i, j) * std::log(p(i, j) / q);
          if (p(j, i) > 0.0) kl += p(j, i) * std::log(p(j, i) / q);
        }
      }
      out.kl_history.push_back(kl);
      out.kl_iterations.push_back(it);
    }
    // dC/dy_i = 4 sum_j (p_ij - q_ij) (y_i - y_j) / (1 + |y_i - y_j|^2)
    grad.setZero();
    for (Eigen::Index j = 1; j < n; ++j) {
      for (Eigen::Index i = 0; i < j; ++i) {
        const double v = num(i, j);
        const double w = 4.0 * (exaggeration * p(i, j) - v / z) * v;
        const double g0 = w * (y(i, 0) - y(j, 0)), g1 = w * (y(i, 1) - y(j, 1));
        grad(i, 0) += g0;
        grad(i, 1) += g1;
        grad(j, 0) -= g0;
        grad(j, 1) -= g1;
      }
    }
    if (!grad.allFinite()) throw NumericalError(fmt::format("non-finite t-SNE gradient at iteration {}", it));

    const double momentum = it < s.momentum_switch ? s.initial_momentum : s.final_momentum;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index c = 0; c < 2; ++c) {
        const bool same_sign = (grad(i, c) > 0.0) == (update(i, c) > 0.0);
        gains(i, c) = std::max(same_sign ? gains(i, c) * 0.8 : gains(i, c) + 0.2, kMinGain);
        update(i, c) = momentum * update(i, c) - s.learning_rate * gains(i, c) * grad(i, c);
      }
    }
    y += update;
    y.rowwise() -= y.colwise().mean();
  }
  out.kl_history.push_back(kl_divergence(p, student_t_affinities(y)));
  out.kl_iterations.push_back(s.iterations);
  out.points = std::move(y);
  return out;
}

std::vector<std::size_t> dominant_topics(const Matrix& theta) {
  std::vector<std::size_t> out(static_cast<std::size_t>(theta.rows()), 0);
  for (Eigen::Index m = 0; m < theta.rows(); ++m) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < theta.cols(); ++k) {
      if (theta(m, k) > theta(m, best)) best = k;
    }
    out[static_cast<std::size_t>(m)] = static_cast<std::size_t>(best);
  }
  return out;
}

double silhouette(const Matrix& points, std::span<const std::size_t> labels) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (labels.size() != n) throw ConfigError("silhouette: label count differs from point count");
  if (n == 0) return 0.0;
  const std::size_t n_labels = *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<std::size_t> sizes(n_labels, 0);
  for (auto l : labels) ++sizes[l];
  if (std::count_if(sizes.begin(), sizes.end(), [](std::size_t s) { return s > 0; }) < 2) return 0.0;

  double total = 0.0;
  std::vector<double> sums(n_labels);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) {
        sums[labels[j]] += (points.row(static_cast<Eigen::Index>(i)) - points.row(static_cast<Eigen::Index>(j))).norm();
      }
    }
    const std::size_t own = labels[i];
    if (sizes[own] <= 1) continue;  // singleton scores 0
    const double a = sums[own] / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < n_labels; ++l) {
      if (l != own && sizes[l] > 0) b = std::min(b, sums[l] / static_cast<double>(sizes[l]));
    }
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / static_cast<double>(n);
}

std::string format_points_csv(std::span<const std::string> doc_ids, const Matrix& points,
                              std::span<const std::size_t> dominant) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (doc_ids.size() != n || dominant.size() != n) {
    throw InputError("points, ids and dominant topics differ in length");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return doc_ids[a] < doc_ids[b]; });
  std::string out = "doc_id,x,y,dominant_topic\n";
  for (std::size_t i : order) {
    const auto r = static_cast<Eigen::Index>(i);
    out += fmt::format("{},{:.6f},{:.6f},{}\n", doc_ids[i], points(r, 0), points(r, 1), dominant[i]);
  }
  return out;
}

std::vector<PointRow> parse_points_csv(const std::string& text) {
  auto lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty() || lines[0] != "doc_id,x,y,dominant_topic") {
    throw InputError("points CSV: missing header");
  }
  std::vector<PointRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    // doc ids may contain commas; the numeric columns are the last three
    auto cols = split(lines[i], ',');
    if (cols.size() < 4) throw InputError(fmt::format("points CSV line {}: expected 4 columns", i + 1));
    PointRow r;
    r.dominant_topic = static_cast<std::size_t>(parse_int(cols.back()));
    r.y = parse_double(cols[cols.size() - 2]);
    r.x = parse_double(cols[cols.size() - 3]);
    cols.resize(cols.size() - 3);
    for (std::size_t c = 0; c < cols.size(); ++c) r.doc_id += (c ? "," : "") + cols[c];
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string format_points_svg(const Matrix& points, std::span<const std::size_t> dominant) {
  static constexpr const char* palette[12] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                              "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                              "#bcbd22", "#17becf", "#393b79", "#ad494a"};
  constexpr double size = 800.0, margin = 20.0;
  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{0}\" viewBox=\"0 0 {0} {0}\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
      size);
  if (points.rows() == 0) return out + "</svg>\n";
  const double x0 = points.col(0).minCoeff(), x1 = points.col(0).maxCoeff();
  const double y0 = points.col(1).minCoeff(), y1 = points.col(1).maxCoeff();
  const double span = std::max({x1 - x0, y1 - y0, 1e-12});
  const double scale = (size - 2 * margin) / span;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"{}\"/>\n",
                       margin + (points(i, 0) - x0) * scale, margin + (points(i, 1) - y0) * scale,
                       palette[dominant[static_cast<std::size_t>(i)] % 12]);
  }
  return out + "</svg>\n";
}

}  // namespace topicmine
