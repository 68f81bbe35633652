#include "topicmine/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>
#include <json.hpp>

#include "topicmine/error.hpp"
#include "topicmine/random.hpp"

namespace topicmine {

PlantedCorpus make_planted_corpus(const PlantedSpec& spec) {
  if (spec.topics == 0 || spec.vocab_size < spec.topics || spec.docs == 0) {
    throw ConfigError("planted corpus needs K >= 1, V >= K and M >= 1");
  }
  Rng rng(spec.seed);
  const std::size_t K = spec.topics, V = spec.vocab_size;
  PlantedCorpus out;
  out.phi.resize(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(V));
  const std::size_t block = V / K;
  for (std::size_t k = 0; k < K; ++k) {
    std::vector<double> conc(V, spec.background_weight);
    const std::size_t end = k + 1 == K ? V : (k + 1) * block;
    for (std::size_t v = k * block; v < end; ++v) conc[v] = spec.anchor_weight;
    const auto row = rng.dirichlet(conc);
    for (std::size_t v = 0; v < V; ++v) out.phi(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(v)) = row[v];
  }
  out.theta.resize(static_cast<Eigen::Index>(spec.docs), static_cast<Eigen::Index>(K));
  std::vector<std::string> ids;
  std::vector<std::vector<double>> phi_rows(K, std::vector<double>(V));
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t v = 0; v < V; ++v) phi_rows[k][v] = out.phi(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(v));
  }
  std::vector<std::vector<TokenId>> encoded;
  for (std::size_t m = 0; m < spec.docs; ++m) {
    const auto theta = rng.dirichlet(K, spec.doc_concentration);
    for (std::size_t k = 0; k < K; ++k) out.theta(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k)) = theta[k];
    std::vector<TokenId> doc;
    std::vector<std::size_t> z;
    for (std::size_t n = 0; n < spec.doc_length; ++n) {
      const std::size_t k = rng.categorical(theta);
      z.push_back(k);
      doc.push_back(static_cast<TokenId>(rng.categorical(phi_rows[k])));
    }
    encoded.push_back(std::move(doc));
    out.z.push_back(std::move(z));
    ids.push_back(fmt::format("planted-{:04d}", m));
  }
  std::vector<std::string> surfaces;
  std::vector<std::int64_t> counts(V, 0);
  for (std::size_t v = 0; v < V; ++v) surfaces.push_back(fmt::format("w{:02d}", v));
  for (const auto& d : encoded) {
    for (TokenId t : d) ++counts[static_cast<std::size_t>(t)];
  }
  out.corpus.vocab = Vocabulary(std::move(surfaces), std::move(counts), 0);
  out.corpus.docs = std::move(encoded);
  out.corpus.doc_ids = std::move(ids);
  return out;
}

double best_permutation_l1(const Matrix& truth, const Matrix& estimate) {
  if (truth.rows() != estimate.rows() || truth.cols() != estimate.cols()) {
    throw ConfigError("best_permutation_l1: shape mismatch");
  }
  const auto K = static_cast<std::size_t>(truth.rows());
  std::vector<std::size_t> perm(K);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      total += (truth.row(static_cast<Eigen::Index>(k)) - estimate.row(static_cast<Eigen::Index>(perm[k])))
                   .lpNorm<1>();
    }
    best = std::min(best, total / static_cast<double>(K));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

std::string make_sample_reviews(std::size_t docs, std::uint64_t seed) {
  struct Aspect {
    std::vector<std::string> nouns;
    std::vector<std::string> phrases;
  };
  const std::vector<Aspect> aspects = {
      {{"delivery", "shipping", "courier", "package", "logistics", "arrived", "parcel", "tracking",
        "box", "days", "fast", "slow", "dispatch", "warehouse"},
       {"the package arrived", "shipping was", "the courier", "delivery took", "tracking showed",
        "the box was"}},
      {{"price", "cheap", "expensive", "discount", "value", "money", "cost", "deal", "affordable",
        "coupon", "sale", "worth", "overpriced", "bargain"},
       {"the price is", "for this money", "with the discount", "at this cost", "the deal was",
        "value for money"}},
      {{"quality", "fabric", "material", "stitching", "durable", "sturdy", "cotton", "texture",
        "flimsy", "soft", "seams", "thread", "torn", "craftsmanship"},
       {"the quality is", "the fabric feels", "the material is", "the stitching was",
        "after washing the", "the texture is"}}};
  const std::vector<std::string> filler = {"good", "great", "bad", "okay", "nice", "terrible",
                                           "excellent", "fine", "happy", "disappointed"};
  Rng rng(seed);
  std::string out;
  for (std::size_t m = 0; m < docs; ++m) {
    // Mostly one aspect per review, sometimes a second one.
    const std::size_t main = rng.below(aspects.size());
    const bool mixed = rng.uniform() < 0.3;
    const std::size_t other = (main + 1 + rng.below(aspects.size() - 1)) % aspects.size();
    const std::size_t sentences = 2 + rng.below(3);
    std::string text;
    for (std::size_t s = 0; s < sentences; ++s) {
      const Aspect& a = aspects[(mixed && s == sentences - 1) ? other : main];
      std::string sentence = a.phrases[rng.below(a.phrases.size())];
      sentence += ' ' + filler[rng.below(filler.size())];
      const std::size_t extra = 2 + rng.below(3);
      for (std::size_t e = 0; e < extra; ++e) {
        sentence += (e == 0 ? " and the " : " ") + a.nouns[rng.below(a.nouns.size())];
      }
      sentence[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(sentence[0])));
      text += sentence + (rng.uniform() < 0.2 ? "! " : ". ");
    }
    text.pop_back();
    nlohmann::ordered_json j = {{"id", fmt::format("review-{:04d}", m)}, {"text", text}};
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace topicmine
