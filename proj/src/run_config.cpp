#include "topicmine/run_config.hpp"

#include <fmt/format.h>

#include "topicmine/error.hpp"

namespace topicmine {

void RunConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (min_count < 1) fail("min_count must be >= 1");
  if (!(mask_rate >= 0.0 && mask_rate <= 1.0)) fail(fmt::format("mask_rate {} outside [0, 1]", mask_rate));
  parse_mask_strategy(strategy);
  encoder_config(2).validate();
  if (batch_size == 0) fail("batch_size must be positive");
  if (!(learning_rate > 0.0)) fail("learning_rate must be positive");
  if (kmin < 1 || kmin > kmax) fail(fmt::format("need 1 <= kmin <= kmax (got {}..{})", kmin, kmax));
  if (alpha && !(*alpha > 0.0)) fail("alpha must be positive");
  if (!(beta > 0.0)) fail("beta must be positive");
  if (iters < 1) fail("iters must be >= 1");
  if (burn_in >= iters) fail(fmt::format("burn_in {} must be below iters {}", burn_in, iters));
  if (!(split_ratio > 0.0 && split_ratio < 1.0)) fail("split_ratio must be in (0, 1)");
  if (top_t < 1) fail("top_t must be >= 1");
  WindowMode::parse(window);
  if (!(lambda >= 0.0)) fail("lambda must be non-negative");
  if (!(tsne_perplexity > 0.0)) fail("tsne_perplexity must be positive");
  if (tsne_iters < 1) fail("tsne_iters must be >= 1");
  if (!(tsne_learning_rate > 0.0)) fail("tsne_learning_rate must be positive");
  if (jobs < 1) fail("jobs must be >= 1");
  if (!from_file_tokens.empty() && from_file.empty()) fail("token vector file requires --from-file");
  if (out.empty()) fail("output directory must be set");
}

EncoderConfig RunConfig::encoder_config(std::size_t vocab_size) const {
  EncoderConfig c;
  c.vocab_size = vocab_size;
  c.dim = dim;
  c.heads = heads;
  c.layers = layers;
  c.max_len = max_len;
  return c;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig c;
  c.mask_rate = mask_rate;
  c.strategy = parse_mask_strategy(strategy);
  c.steps = steps;
  c.batch_size = batch_size;
  c.learning_rate = learning_rate;
  c.seed = seed;
  return c;
}

LdaConfig RunConfig::lda_config(std::size_t topics) const {
  LdaConfig c = LdaConfig::defaults(topics);
  if (alpha) c.alpha = *alpha;
  c.beta = beta;
  c.iterations = iters;
  c.burn_in = burn_in;
  c.average_after_burn_in = average;
  c.seed = seed;
  return c;
}

TopicSweepConfig RunConfig::sweep_config() const {
  TopicSweepConfig s;
  s.k_min = kmin;
  s.k_max = kmax;
  s.base = lda_config(kmin);
  s.scale_alpha = !alpha.has_value();
  s.split_ratio = split_ratio;
  s.fold_in_iterations = fold_in;
  s.jobs = jobs;
  return s;
}

CoherenceSettings RunConfig::coherence_settings() const {
  CoherenceSettings s;
  s.top_t = top_t;
  s.cv_window = WindowMode::parse(window);
  return s;
}

TsneSettings RunConfig::tsne_settings() const {
  TsneSettings s;
  s.perplexity = tsne_perplexity;
  s.iterations = tsne_iters;
  s.learning_rate = tsne_learning_rate;
  s.seed = seed;
  return s;
}

nlohmann::ordered_json to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["input"] = c.input;
  j["stopwords"] = c.stopwords;
  j["min_count"] = c.min_count;
  j["mask_rate"] = c.mask_rate;
  j["strategy"] = c.strategy;
  j["dim"] = c.dim;
  j["heads"] = c.heads;
  j["layers"] = c.layers;
  j["max_len"] = c.max_len;
  j["steps"] = c.steps;
  j["batch_size"] = c.batch_size;
  j["learning_rate"] = c.learning_rate;
  j["from_file"] = c.from_file;
  j["from_file_tokens"] = c.from_file_tokens;
  j["senses"] = c.senses;
  j["k"] = c.k;
  j["kmin"] = c.kmin;
  j["kmax"] = c.kmax;
  j["alpha"] = c.alpha ? nlohmann::ordered_json(*c.alpha) : nlohmann::ordered_json(nullptr);
  j["beta"] = c.beta;
  j["iters"] = c.iters;
  j["burn_in"] = c.burn_in;
  j["average"] = c.average;
  j["fold_in"] = c.fold_in;
  j["split_ratio"] = c.split_ratio;
  j["top_t"] = c.top_t;
  j["window"] = c.window;
  j["lambda"] = c.lambda;
  j["tsne_perplexity"] = c.tsne_perplexity;
  j["tsne_iters"] = c.tsne_iters;
  j["tsne_learning_rate"] = c.tsne_learning_rate;
  j["seed"] = c.seed;
  j["jobs"] = c.jobs;
  j["out"] = c.out;
  return j;
}

RunConfig run_config_from_json(const nlohmann::json& j, RunConfig c) {
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
  const nlohmann::ordered_json known = to_json(c);
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ConfigError(fmt::format("unknown config field '{}'", key));
  }
  try {
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
    };
    get("input", c.input);
    get("stopwords", c.stopwords);
    get("min_count", c.min_count);
    get("mask_rate", c.mask_rate);
    get("strategy", c.strategy);
    get("dim", c.dim);
    get("heads", c.heads);
    get("layers", c.layers);
    get("max_len", c.max_len);
    get("steps", c.steps);
    get("batch_size", c.batch_size);
    get("learning_rate", c.learning_rate);
    get("from_file", c.from_file);
    get("from_file_tokens", c.from_file_tokens);
    get("senses", c.senses);
    get("k", c.k);
    get("kmin", c.kmin);
    get("kmax", c.kmax);
    if (j.contains("alpha")) {
      if (j["alpha"].is_null()) {
        c.alpha.reset();
      } else {
        c.alpha = j["alpha"].get<double>();
      }
    }
    get("beta", c.beta);
    get("iters", c.iters);
    get("burn_in", c.burn_in);
    get("average", c.average);
    get("fold_in", c.fold_in);
    get("split_ratio", c.split_ratio);
    get("top_t", c.top_t);
    get("window", c.window);
    get("lambda", c.lambda);
    get("tsne_perplexity", c.tsne_perplexity);
    get("tsne_iters", c.tsne_iters);
    get("tsne_learning_rate", c.tsne_learning_rate);
    get("seed", c.seed);
    get("jobs", c.jobs);
    get("out", c.out);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("config file: {}", e.what()));
  }
  return c;
}

}  // namespace topicmine
