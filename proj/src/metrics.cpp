#include "topicmine/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "topicmine/error.hpp"
#include "topicmine/io_util.hpp"

namespace topicmine {

WindowMode WindowMode::parse(std::string_view text) {
  if (text == "doc" || text == "document") return document();
  if (text.starts_with("slide:")) {
    long long w = 0;
    try {
      w = parse_int(text.substr(6));
    } catch (const InputError&) {
      throw ConfigError(fmt::format("bad window '{}' (doc | slide:N)", text));
    }
    if (w < 2) throw ConfigError(fmt::format("sliding window width {} below 2", w));
    return sliding(static_cast<std::size_t>(w));
  }
  throw ConfigError(fmt::format("bad window '{}' (doc | slide:N)", text));
}

std::string WindowMode::to_string() const {
  return kind == Kind::document ? "doc" : fmt::format("slide:{}", width);
}

std::int64_t CooccurrenceStats::freq(TokenId w) const {
  const auto it = doc_freq.find(w);
  return it == doc_freq.end() ? 0 : it->second;
}

std::int64_t CooccurrenceStats::joint(TokenId a, TokenId b) const {
  if (a > b) std::swap(a, b);
  const auto it = pair_freq.find({a, b});
  return it == pair_freq.end() ? 0 : it->second;
}

CooccurrenceStats count_cooccurrence(const Corpus& corpus, WindowMode mode,
                                     std::span<const TokenId> keywords) {
  if (keywords.empty()) throw ConfigError("co-occurrence counting needs at least one keyword");
  if (mode.kind == WindowMode::Kind::sliding && mode.width < 2) {
    throw ConfigError(fmt::format("sliding window width {} below 2", mode.width));
  }
  CooccurrenceStats stats;
  stats.mode = mode;
  std::vector<bool> wanted(corpus.vocab_size(), false);
  for (TokenId k : keywords) {
    if (k < 0 || static_cast<std::size_t>(k) >= corpus.vocab_size()) {
      throw ConfigError(fmt::format("keyword id {} outside vocabulary", k));
    }
    wanted[static_cast<std::size_t>(k)] = true;
    stats.doc_freq[k] = 0;
  }
  std::vector<TokenId> present;
  auto count_window = [&](std::span<const TokenId> window) {
    present.clear();
    for (TokenId t : window) {
      if (wanted[static_cast<std::size_t>(t)]) present.push_back(t);
    }
    std::sort(present.begin(), present.end());
    present.erase(std::unique(present.begin(), present.end()), present.end());
    ++stats.n_windows;
    for (std::size_t i = 0; i < present.size(); ++i) {
      ++stats.doc_freq[present[i]];
      for (std::size_t j = i + 1; j < present.size(); ++j) ++stats.pair_freq[{present[i], present[j]}];
    }
  };
  for (const auto& doc : corpus.docs) {
    const std::span<const TokenId> all(doc);
    if (mode.kind == WindowMode::Kind::document || doc.size() <= mode.width) {
      count_window(all);
    } else {
      for (std::size_t start = 0; start + mode.width <= doc.size(); ++start) {
        count_window(all.subspan(start, mode.width));
      }
    }
  }
  return stats;
}

UMass tc_umass(const CooccurrenceStats& stats, std::span<const TokenId> keywords, double smoothing) {
  UMass out;
  std::vector<TokenId> usable;
  for (TokenId w : keywords) {
    if (stats.freq(w) >= 1) {
      usable.push_back(w);
    } else {
      ++out.skipped;
    }
  }
  const std::size_t T = usable.size();
  if (T < 2) {
    out.defined = false;
    return out;
  }
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t l = 0; l < t; ++l) {
      out.sum += std::log2((static_cast<double>(stats.joint(usable[t], usable[l])) + smoothing) /
                           static_cast<double>(stats.freq(usable[l])));
    }
  }
  out.mean = out.sum / (static_cast<double>(T) * static_cast<double>(T - 1) / 2.0);
  return out;
}

double pmi(const CooccurrenceStats& stats, TokenId a, TokenId b) {
  const auto joint = stats.joint(a, b);
  if (joint == 0) return -std::numeric_limits<double>::infinity();
  const double n = static_cast<double>(stats.n_windows);
  const double p_ab = static_cast<double>(joint) / n;
  const double p_a = static_cast<double>(stats.freq(a)) / n;
  const double p_b = static_cast<double>(stats.freq(b)) / n;
  return std::log(p_ab / (p_a * p_b));
}

double npmi(const CooccurrenceStats& stats, TokenId a, TokenId b) {
  const auto joint = stats.joint(a, b);
  if (joint == 0) return -1.0;
  if (joint == stats.n_windows) return 1.0;
  const double p_ab = static_cast<double>(joint) / static_cast<double>(stats.n_windows);
  return std::clamp(pmi(stats, a, b) / -std::log(p_ab), -1.0, 1.0);
}

CvScore c_v_score(const CooccurrenceStats& stats, std::span<const TokenId> keywords) {
  CvScore out;
  const std::size_t W = keywords.size();
  if (W < 2) {
    out.defined = false;
    return out;
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < W; ++i) {
    for (std::size_t j = i + 1; j < W; ++j) sum += npmi(stats, keywords[i], keywords[j]);
  }
  const double w = static_cast<double>(W);
  out.mean = sum / (w * (w - 1.0) / 2.0);
  // Same value as sum / |W|, derived from the mean so the two stay in
  // exact proportion.
  out.paper = out.mean * (w - 1.0) / 2.0;
  return out;
}

double perplexity(const Matrix& theta, const Matrix& phi, const Corpus& corpus) {
  if (static_cast<std::size_t>(theta.rows()) != corpus.num_docs() || theta.cols() != phi.rows() ||
      static_cast<std::size_t>(phi.cols()) != corpus.vocab_size()) {
    throw ConfigError(fmt::format("perplexity: theta {}x{}, phi {}x{} do not fit corpus M={} V={}",
                                  theta.rows(), theta.cols(), phi.rows(), phi.cols(),
                                  corpus.num_docs(), corpus.vocab_size()));
  }
  double log_lik = 0.0;
  std::size_t tokens = 0;
  for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
    const auto row = theta.row(static_cast<Eigen::Index>(d));
    for (TokenId w : corpus.docs[d]) {
      log_lik += std::log(row.dot(phi.col(w)));
    }
    tokens += corpus.doc_length(d);
  }
  if (tokens == 0) throw ConfigError("empty evaluation corpus");
  return std::exp(-log_lik / static_cast<double>(tokens));
}

CoherenceReport coherence_report(std::span<const std::vector<TokenId>> topic_keywords,
                                 const Corpus& corpus, const CoherenceSettings& settings) {
  CoherenceReport report;
  report.settings = settings;
  std::set<TokenId> all;
  for (const auto& kws : topic_keywords) all.insert(kws.begin(), kws.end());
  const std::vector<TokenId> keyword_set(all.begin(), all.end());
  if (keyword_set.empty()) throw ConfigError("no topic keywords to score");
  const CooccurrenceStats umass_stats = count_cooccurrence(corpus, settings.umass_window, keyword_set);
  const CooccurrenceStats cv_stats = settings.cv_window == settings.umass_window
                                         ? umass_stats
                                         : count_cooccurrence(corpus, settings.cv_window, keyword_set);
  for (std::size_t k = 0; k < topic_keywords.size(); ++k) {
    TopicCoherence t;
    t.topic_index = k;
    t.keywords = topic_keywords[k];
    const UMass u = tc_umass(umass_stats, t.keywords, settings.smoothing);
    const CvScore c = c_v_score(cv_stats, t.keywords);
    t.u_mass_sum = u.sum;
    t.u_mass_mean = u.mean;
    t.u_mass_defined = u.defined;
    t.c_v_paper = c.paper;
    t.c_v_mean = c.mean;
    t.c_v_defined = c.defined;
    report.u_mass_sum += t.u_mass_sum;
    report.u_mass_mean += t.u_mass_mean;
    report.c_v_paper += t.c_v_paper;
    report.c_v_mean += t.c_v_mean;
    report.topics.push_back(std::move(t));
  }
  const auto n = static_cast<double>(report.topics.size());
  if (n > 0) {
    report.u_mass_sum /= n;
    report.u_mass_mean /= n;
    report.c_v_paper /= n;
    report.c_v_mean /= n;
  }
  return report;
}

CoherenceReport coherence_report(const LdaModel& model, const Corpus& corpus,
                                 const CoherenceSettings& settings) {
  std::vector<std::vector<TokenId>> keywords;
  for (const auto& t : topic_report(model, corpus.vocab, settings.top_t)) {
    std::vector<TokenId> ids;
    for (const auto& k : t.keywords) ids.push_back(k.id);
    keywords.push_back(std::move(ids));
  }
  return coherence_report(keywords, corpus, settings);
}

std::string format_coherence_report(const CoherenceReport& report, const Vocabulary& vocab) {
  nlohmann::ordered_json topics = nlohmann::ordered_json::array();
  for (const auto& t : report.topics) {
    nlohmann::ordered_json words = nlohmann::ordered_json::array();
    for (TokenId id : t.keywords) words.push_back(vocab.surface(id));
    topics.push_back({{"topic_index", t.topic_index},
                      {"keywords", words},
                      {"u_mass_sum", t.u_mass_sum},
                      {"u_mass_mean", t.u_mass_mean},
                      {"c_v_paper", t.c_v_paper},
                      {"c_v_mean", t.c_v_mean},
                      {"u_mass_defined", t.u_mass_defined},
                      {"c_v_defined", t.c_v_defined}});
  }
  nlohmann::ordered_json j = {
      {"top_t", report.settings.top_t},
      {"umass_window", report.settings.umass_window.to_string()},
      {"cv_window", report.settings.cv_window.to_string()},
      {"smoothing", report.settings.smoothing},
      {"aggregate",
       {{"u_mass_sum", report.u_mass_sum},
        {"u_mass_mean", report.u_mass_mean},
        {"c_v_paper", report.c_v_paper},
        {"c_v_mean", report.c_v_mean}}},
      {"topics", topics}};
  return j.dump(2) + "\n";
}

}  // namespace topicmine
