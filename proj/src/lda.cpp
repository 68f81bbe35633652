#include "topicmine/lda.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "topicmine/error.hpp"
#include "topicmine/metrics.hpp"

namespace topicmine {

LdaConfig LdaConfig::defaults(std::size_t topics) {
  LdaConfig c;
  c.topics = topics;
  c.alpha = 50.0 / static_cast<double>(std::max<std::size_t>(topics, 1));
  c.beta = 0.01;
  return c;
}

void LdaConfig::validate() const {
  if (topics < 1) throw ConfigError("topic count K must be at least 1");
  if (!(alpha > 0.0)) throw ConfigError(fmt::format("alpha must be positive (got {})", alpha));
  if (!(beta > 0.0)) throw ConfigError(fmt::format("beta must be positive (got {})", beta));
  if (burn_in >= iterations) {
    throw ConfigError(fmt::format("burn_in {} must be below iterations {}", burn_in, iterations));
  }
}

std::int64_t LdaModel::total_tokens() const {
  return std::accumulate(n_k.begin(), n_k.end(), std::int64_t{0});
}

LdaModel init_assignments(const Corpus& corpus, const LdaConfig& config, Rng& rng) {
  if (config.topics < 1) throw ConfigError("topic count K must be at least 1");
  if (corpus.num_docs() == 0) throw ConfigError("cannot fit a topic model on an empty corpus");
  const std::size_t K = config.topics;
  const std::size_t V = corpus.vocab_size();
  LdaModel m;
  m.config = config;
  m.num_topics = K;
  m.vocab_size = V;
  m.n_mk.assign(corpus.num_docs() * K, 0);
  m.n_kv.assign(K * V, 0);
  m.n_k.assign(K, 0);
  m.n_m.assign(corpus.num_docs(), 0);
  m.z.resize(corpus.num_docs());
  for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
    const auto& doc = corpus.docs[d];
    m.z[d].resize(doc.size());
    m.n_m[d] = static_cast<std::int64_t>(doc.size());
    for (std::size_t n = 0; n < doc.size(); ++n) {
      const auto k = K == 1 ? std::size_t{0} : static_cast<std::size_t>(rng.below(K));
      m.z[d][n] = static_cast<std::int32_t>(k);
      ++m.n_mk[d * K + k];
      ++m.n_kv[k * V + static_cast<std::size_t>(doc[n])];
      ++m.n_k[k];
    }
  }
  return m;
}

void gibbs_sweep(LdaModel& model, const Corpus& corpus, Rng& rng) {
  const std::size_t K = model.num_topics;
  if (K == 1) return;
  const std::size_t V = model.vocab_size;
  const double alpha = model.config.alpha;
  const double beta = model.config.beta;
  const double vbeta = beta * static_cast<double>(V);
  std::vector<double> cumulative(K);
  for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
    const auto& doc = corpus.docs[d];
    std::int64_t* doc_topic = &model.n_mk[d * K];
    for (std::size_t n = 0; n < doc.size(); ++n) {
      const auto v = static_cast<std::size_t>(doc[n]);
      auto k = static_cast<std::size_t>(model.z[d][n]);
      --doc_topic[k];
      --model.n_kv[k * V + v];
      --model.n_k[k];
      double acc = 0.0;
      for (std::size_t j = 0; j < K; ++j) {
        acc += (static_cast<double>(doc_topic[j]) + alpha) *
               (static_cast<double>(model.n_kv[j * V + v]) + beta) /
               (static_cast<double>(model.n_k[j]) + vbeta);
        cumulative[j] = acc;
      }
      const double u = rng.uniform() * acc;
      k = 0;
      while (k + 1 < K && u >= cumulative[k]) ++k;
      model.z[d][n] = static_cast<std::int32_t>(k);
      ++doc_topic[k];
      ++model.n_kv[k * V + v];
      ++model.n_k[k];
    }
  }
}

std::optional<std::string> audit_counts(const LdaModel& model, const Corpus& corpus) {
  const std::size_t K = model.num_topics;
  const std::size_t V = model.vocab_size;
  if (model.num_docs() != corpus.num_docs()) return "document count differs from corpus";
  std::vector<std::int64_t> mk(model.n_mk.size(), 0), kv(model.n_kv.size(), 0), k_tot(K, 0);
  for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
    if (model.z[d].size() != corpus.doc_length(d)) return fmt::format("doc {}: z length", d);
    for (std::size_t n = 0; n < corpus.doc_length(d); ++n) {
      const auto k = static_cast<std::size_t>(model.z[d][n]);
      if (k >= K) return fmt::format("doc {} pos {}: topic {} out of range", d, n, k);
      ++mk[d * K + k];
      ++kv[k * V + static_cast<std::size_t>(corpus.docs[d][n])];
      ++k_tot[k];
    }
  }
  if (mk != model.n_mk) return "n_mk disagrees with z";
  if (kv != model.n_kv) return "n_kv disagrees with z";
  if (k_tot != model.n_k) return "n_k disagrees with z";
  std::int64_t total = 0;
  for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
    std::int64_t row = 0;
    for (std::size_t k = 0; k < K; ++k) {
      if (model.n_mk[d * K + k] < 0) return fmt::format("negative n_mk at doc {}", d);
      row += model.n_mk[d * K + k];
    }
    if (row != static_cast<std::int64_t>(corpus.doc_length(d))) {
      return fmt::format("doc {}: sum_k n_mk = {} but N_m = {}", d, row, corpus.doc_length(d));
    }
    total += row;
  }
  for (std::size_t k = 0; k < K; ++k) {
    std::int64_t row = 0;
    for (std::size_t v = 0; v < V; ++v) {
      if (model.n_kv[k * V + v] < 0) return fmt::format("negative n_kv at topic {}", k);
      row += model.n_kv[k * V + v];
    }
    if (row != model.n_k[k]) return fmt::format("topic {}: sum_v n_kv = {} but n_k = {}", k, row, model.n_k[k]);
  }
  if (model.total_tokens() != total) return "sum_k n_k differs from corpus token count";
  return std::nullopt;
}

Matrix theta_from_counts(const LdaModel& model) {
  const std::size_t K = model.num_topics;
  const double alpha = model.config.alpha;
  Matrix theta(static_cast<Eigen::Index>(model.num_docs()), static_cast<Eigen::Index>(K));
  for (std::size_t d = 0; d < model.num_docs(); ++d) {
    const double denom = static_cast<double>(model.n_m[d]) + static_cast<double>(K) * alpha;
    for (std::size_t k = 0; k < K; ++k) {
      theta(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(k)) =
          (static_cast<double>(model.doc_topic(d, k)) + alpha) / denom;
    }
  }
  return theta;
}

Matrix phi_from_counts(const LdaModel& model) {
  const std::size_t K = model.num_topics;
  const std::size_t V = model.vocab_size;
  const double beta = model.config.beta;
  Matrix phi(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(V));
  for (std::size_t k = 0; k < K; ++k) {
    const double denom = static_cast<double>(model.n_k[k]) + static_cast<double>(V) * beta;
    for (std::size_t v = 0; v < V; ++v) {
      phi(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(v)) =
          (static_cast<double>(model.topic_word(k, v)) + beta) / denom;
    }
  }
  return phi;
}

Matrix estimate_theta(const LdaModel& model) {
  if (model.samples > 0) return model.theta_sum / static_cast<double>(model.samples);
  return theta_from_counts(model);
}

Matrix estimate_phi(const LdaModel& model) {
  if (model.samples > 0) return model.phi_sum / static_cast<double>(model.samples);
  return phi_from_counts(model);
}

LdaModel fit(const Corpus& corpus, const LdaConfig& config) {
  config.validate();
  Rng rng(config.seed);
  LdaModel model = init_assignments(corpus, config, rng);
  for (std::size_t it = 0; it < config.iterations; ++it) {
    gibbs_sweep(model, corpus, rng);
    if (config.average_after_burn_in && it >= config.burn_in) {
      if (model.samples == 0) {
        model.theta_sum = theta_from_counts(model);
        model.phi_sum = phi_from_counts(model);
      } else {
        model.theta_sum += theta_from_counts(model);
        model.phi_sum += phi_from_counts(model);
      }
      ++model.samples;
    }
  }
  return model;
}

double collapsed_log_likelihood(const LdaModel& model) {
  const std::size_t K = model.num_topics;
  const std::size_t V = model.vocab_size;
  const double a = model.config.alpha;
  const double b = model.config.beta;
  const double Kd = static_cast<double>(K);
  const double Vd = static_cast<double>(V);
  double ll = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    ll += std::lgamma(Vd * b) - std::lgamma(static_cast<double>(model.n_k[k]) + Vd * b);
    for (std::size_t v = 0; v < V; ++v) {
      ll += std::lgamma(static_cast<double>(model.topic_word(k, v)) + b) - std::lgamma(b);
    }
  }
  for (std::size_t d = 0; d < model.num_docs(); ++d) {
    ll += std::lgamma(Kd * a) - std::lgamma(static_cast<double>(model.n_m[d]) + Kd * a);
    for (std::size_t k = 0; k < K; ++k) {
      ll += std::lgamma(static_cast<double>(model.doc_topic(d, k)) + a) - std::lgamma(a);
    }
  }
  return ll;
}

LdaModel relabel_topics(const LdaModel& model, std::span<const std::size_t> perm) {
  const std::size_t K = model.num_topics;
  const std::size_t V = model.vocab_size;
  if (perm.size() != K) throw ConfigError("permutation size differs from topic count");
  LdaModel out = model;
  for (std::size_t d = 0; d < model.num_docs(); ++d) {
    for (std::size_t k = 0; k < K; ++k) out.n_mk[d * K + perm[k]] = model.n_mk[d * K + k];
  }
  for (std::size_t k = 0; k < K; ++k) {
    out.n_k[perm[k]] = model.n_k[k];
    for (std::size_t v = 0; v < V; ++v) out.n_kv[perm[k] * V + v] = model.n_kv[k * V + v];
  }
  for (auto& doc : out.z) {
    for (auto& t : doc) t = static_cast<std::int32_t>(perm[static_cast<std::size_t>(t)]);
  }
  out.samples = 0;
  out.theta_sum.resize(0, 0);
  out.phi_sum.resize(0, 0);
  return out;
}

TopicKeywords top_keywords(const Matrix& phi, const Vocabulary& vocab, std::size_t topic,
                           std::size_t top_n) {
  if (topic >= static_cast<std::size_t>(phi.rows())) {
    throw ConfigError(fmt::format("topic {} out of range (K = {})", topic, phi.rows()));
  }
  const auto V = static_cast<std::size_t>(phi.cols());
  TopicKeywords out;
  out.topic_index = topic;
  if (top_n > V) {
    out.truncated = true;
    top_n = V;
  }
  std::vector<TokenId> ids(V);
  std::iota(ids.begin(), ids.end(), 0);
  const auto row = phi.row(static_cast<Eigen::Index>(topic));
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(top_n), ids.end(),
                    [&](TokenId a, TokenId b) { return row(a) != row(b) ? row(a) > row(b) : a < b; });
  for (std::size_t i = 0; i < top_n; ++i) {
    out.keywords.push_back({ids[i], vocab.surface(ids[i]), row(ids[i])});
  }
  return out;
}

TopicKeywords top_keywords(const LdaModel& model, const Vocabulary& vocab, std::size_t topic,
                           std::size_t top_n) {
  return top_keywords(estimate_phi(model), vocab, topic, top_n);
}

std::vector<TopicKeywords> topic_report(const LdaModel& model, const Vocabulary& vocab,
                                        std::size_t top_n) {
  const Matrix phi = estimate_phi(model);
  std::vector<TopicKeywords> out;
  for (std::size_t k = 0; k < model.num_topics; ++k) out.push_back(top_keywords(phi, vocab, k, top_n));
  return out;
}

std::string format_topic_report(std::span<const TopicKeywords> report) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& t : report) {
    nlohmann::ordered_json kws = nlohmann::ordered_json::array();
    for (const auto& k : t.keywords) kws.push_back({{"word", k.word}, {"prob", k.prob}});
    arr.push_back({{"topic_index", t.topic_index}, {"label", t.label}, {"keywords", kws}});
  }
  return arr.dump(2) + "\n";
}

HeldOutTheta infer_held_out(const LdaModel& model, const Corpus& held_out,
                            std::size_t fold_in_iterations, std::uint64_t seed) {
  const std::size_t K = model.num_topics;
  const std::size_t V = model.vocab_size;
  if (held_out.vocab_size() != V) {
    throw InputError(fmt::format("held-out vocabulary size {} differs from model's {}",
                                 held_out.vocab_size(), V));
  }
  const double alpha = model.config.alpha;
  const double beta = model.config.beta;
  const double vbeta = beta * static_cast<double>(V);
  Rng rng(seed);

  // Topic-word weights are fixed during fold-in.
  std::vector<double> word_weight(K * V);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t v = 0; v < V; ++v) {
      word_weight[v * K + k] = (static_cast<double>(model.topic_word(k, v)) + beta) /
                               (static_cast<double>(model.n_k[k]) + vbeta);
    }
  }
  HeldOutTheta out;
  out.converged = fold_in_iterations > 0;
  out.theta.resize(static_cast<Eigen::Index>(held_out.num_docs()), static_cast<Eigen::Index>(K));
  std::vector<double> cumulative(K);
  for (std::size_t d = 0; d < held_out.num_docs(); ++d) {
    const auto& doc = held_out.docs[d];
    std::vector<std::int64_t> counts(K, 0);
    std::vector<std::size_t> z(doc.size());
    for (std::size_t n = 0; n < doc.size(); ++n) {
      z[n] = K == 1 ? 0 : static_cast<std::size_t>(rng.below(K));
      ++counts[z[n]];
    }
    for (std::size_t it = 0; it < fold_in_iterations && K > 1; ++it) {
      for (std::size_t n = 0; n < doc.size(); ++n) {
        const double* w = &word_weight[static_cast<std::size_t>(doc[n]) * K];
        --counts[z[n]];
        double acc = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
          acc += (static_cast<double>(counts[k]) + alpha) * w[k];
          cumulative[k] = acc;
        }
        const double u = rng.uniform() * acc;
        std::size_t k = 0;
        while (k + 1 < K && u >= cumulative[k]) ++k;
        z[n] = k;
        ++counts[k];
      }
    }
    const double denom = static_cast<double>(doc.size()) + static_cast<double>(K) * alpha;
    for (std::size_t k = 0; k < K; ++k) {
      out.theta(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(k)) =
          (static_cast<double>(counts[k]) + alpha) / denom;
    }
  }
  return out;
}

void split_documents(std::size_t num_docs, double split_ratio, std::uint64_t seed,
                     std::vector<std::size_t>& train, std::vector<std::size_t>& held_out) {
  if (!(split_ratio > 0.0 && split_ratio < 1.0)) {
    throw ConfigError(fmt::format("split ratio {} outside (0, 1)", split_ratio));
  }
  std::vector<std::size_t> order(num_docs);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  const auto n_train = static_cast<std::size_t>(std::llround(split_ratio * static_cast<double>(num_docs)));
  train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(std::min(n_train, num_docs)));
  held_out.assign(order.begin() + static_cast<std::ptrdiff_t>(std::min(n_train, num_docs)), order.end());
  std::sort(train.begin(), train.end());
  std::sort(held_out.begin(), held_out.end());
}

double held_out_perplexity(const LdaModel& model, const Corpus& held_out,
                           std::size_t fold_in_iterations, HeldOutEvaluation evaluation,
                           std::uint64_t seed) {
  const Matrix phi = estimate_phi(model);
  if (evaluation == HeldOutEvaluation::full_document) {
    const HeldOutTheta t = infer_held_out(model, held_out, fold_in_iterations, seed);
    return perplexity(t.theta, phi, held_out);
  }
  Corpus observed = held_out, scored = held_out;
  for (std::size_t d = 0; d < held_out.num_docs(); ++d) {
    observed.docs[d].clear();
    scored.docs[d].clear();
    for (std::size_t n = 0; n < held_out.doc_length(d); ++n) {
      (n % 2 == 0 ? observed : scored).docs[d].push_back(held_out.docs[d][n]);
    }
  }
  const HeldOutTheta t = infer_held_out(model, observed, fold_in_iterations, seed);
  return perplexity(t.theta, phi, scored);
}

TopicSweepResult select_topic_count(const Corpus& corpus, const TopicSweepConfig& config) {
  if (config.k_min < 1 || config.k_min > config.k_max) {
    throw ConfigError(fmt::format("need 1 <= k_min <= k_max (got {}..{})", config.k_min, config.k_max));
  }
  TopicSweepResult result;
  split_documents(corpus.num_docs(), config.split_ratio, derive_seed(config.base.seed, 7),
                  result.train_docs, result.held_out_docs);
  const Corpus train = corpus.subset(result.train_docs);
  const Corpus held = corpus.subset(result.held_out_docs);
  if (held.num_docs() == 0 || held.total_tokens() == 0) throw ConfigError("held-out split is empty");
  if (train.total_tokens() == 0) throw ConfigError("training split is empty");

  const std::size_t n = config.k_max - config.k_min + 1;
  result.curve.resize(n);
  auto run = [&](std::size_t i) {
    const std::size_t K = config.k_min + i;
    LdaConfig c = config.base;
    c.topics = K;
    if (config.scale_alpha) c.alpha = 50.0 / static_cast<double>(K);
    const LdaModel model = fit(train, c);
    result.curve[i] = {K, held_out_perplexity(model, held, config.fold_in_iterations,
                                              config.evaluation, derive_seed(c.seed, 100 + K))};
  };
  config.base.validate();
  const std::size_t jobs = std::clamp<std::size_t>(config.jobs, 1, n);
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) run(i);
  } else {
    std::vector<std::exception_ptr> errors(jobs);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < jobs; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < n; i += jobs) run(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  result.best_topics = result.curve.front().topics;
  double best = result.curve.front().perplexity;
  for (const auto& p : result.curve) {
    if (p.perplexity < best) best = p.perplexity, result.best_topics = p.topics;
  }
  return result;
}

std::string format_sweep_csv(const TopicSweepResult& result) {
  std::string out = "K,perplexity\n";
  for (const auto& p : result.curve) out += fmt::format("{},{}\n", p.topics, p.perplexity);
  return out;
}

}  // namespace topicmine
