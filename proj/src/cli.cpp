#include "topicmine/cli.hpp"

#include <algorithm>
#include <functional>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include "topicmine/corpus_io.hpp"
#include "topicmine/embeddings.hpp"
#include "topicmine/error.hpp"
#include "topicmine/io_util.hpp"
#include "topicmine/synthetic.hpp"

namespace topicmine::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVocab = "vocab.tsv";
constexpr const char* kCorpus = "corpus.tsv";
constexpr const char* kSenseVocab = "sense_vocab.tsv";
constexpr const char* kSenseCorpus = "sense_corpus.tsv";
constexpr const char* kParams = "encoder.params";
constexpr const char* kDocVectors = "doc_vectors.txt";
constexpr const char* kTokenVectors = "token_vectors.txt";
constexpr const char* kModel = "model.lda";
constexpr const char* kTheta = "theta.txt";
constexpr const char* kPhi = "phi.txt";

fs::path out_path(const RunConfig& c, const char* name) { return fs::path(c.out) / name; }

void require(const fs::path& p, std::string_view produced_by) {
  if (!fs::exists(p)) {
    throw InputError(fmt::format("missing {} (run `{}` first)", p.string(), produced_by));
  }
}

Corpus load_word_corpus(const RunConfig& c) {
  require(out_path(c, kCorpus), "preprocess");
  return parse_corpus(read_file(out_path(c, kCorpus)), parse_vocabulary(read_file(out_path(c, kVocab))));
}

// The token space LDA runs on: words, or sense clusters when enabled.
Corpus load_topic_corpus(const RunConfig& c) {
  if (c.senses == 0) return load_word_corpus(c);
  require(out_path(c, kSenseCorpus), "senses");
  return parse_corpus(read_file(out_path(c, kSenseCorpus)),
                      parse_vocabulary(read_file(out_path(c, kSenseVocab))));
}

KeyedVectors matrix_rows(const std::vector<std::string>& keys, const Matrix& m) {
  return {static_cast<std::size_t>(m.cols()), keys, m};
}

std::size_t resolve_topics(const RunConfig& c) {
  if (c.k > 0) return c.k;
  const auto sweep = fs::path(c.out) / "sweep.json";
  if (!fs::exists(sweep)) throw ConfigError("no --k given and no sweep.json to take K* from");
  return nlohmann::json::parse(read_file(sweep)).at("best_k").get<std::size_t>();
}

}  // namespace

const std::vector<std::string>& artifact_names() {
  static const std::vector<std::string> names = {
      "run_config.json", "preprocess.json", kVocab,          kCorpus,         kParams,
      "mlm_loss.csv",    kDocVectors,       kTokenVectors,   "senses.json",   kSenseVocab,
      kSenseCorpus,      "perplexity.csv",  "sweep.json",    kModel,          "topics.json",
      kTheta,            kPhi,              "coherence.json", "points.csv",   "points.svg",
      "tsne.json"};
  return names;
}

void write_run_records(const RunConfig& config) {
  write_file_atomic(out_path(config, "run_config.json"), to_json(config).dump(2) + "\n");
  nlohmann::ordered_json files = nlohmann::ordered_json::array();
  for (const auto& name : artifact_names()) {
    const auto p = fs::path(config.out) / name;
    if (!fs::exists(p)) continue;
    const std::string bytes = read_file(p);
    files.push_back({{"path", name}, {"bytes", bytes.size()}, {"sha256", sha256_hex(bytes)}});
  }
  nlohmann::ordered_json manifest = {{"tool", "topicmine"}, {"files", files}};
  write_file_atomic(out_path(config, "manifest.json"), manifest.dump(2) + "\n");
}

void preprocess(const RunConfig& c, std::ostream& log) {
  if (c.input.empty()) throw ConfigError("preprocess needs --input");
  const auto docs = read_documents(c.input);
  const StopwordSet stop = c.stopwords.empty() ? default_stopwords() : read_stopwords(c.stopwords);
  const auto tokens = preprocess(docs, stop);
  const Vocabulary vocab = build_vocabulary(tokens, c.min_count);
  std::vector<std::string> ids;
  for (const auto& d : docs) ids.push_back(d.id);
  const Corpus corpus = encode_corpus(tokens, ids, vocab);

  nlohmann::ordered_json empty = nlohmann::ordered_json::array();
  for (std::size_t m : corpus.empty_docs()) empty.push_back(corpus.doc_ids[m]);
  const nlohmann::ordered_json summary = {{"documents", corpus.num_docs()},
                                          {"vocabulary", corpus.vocab_size()},
                                          {"tokens", corpus.total_tokens()},
                                          {"min_count", c.min_count},
                                          {"empty_documents", empty}};
  write_file_atomic(out_path(c, kVocab), format_vocabulary(vocab));
  write_file_atomic(out_path(c, kCorpus), format_corpus(corpus));
  write_file_atomic(out_path(c, "preprocess.json"), summary.dump(2) + "\n");
  fmt::print(log, "preprocess: {} documents, V = {}, {} tokens, {} empty\n", corpus.num_docs(),
             corpus.vocab_size(), corpus.total_tokens(), empty.size());
}

void train_mlm(const RunConfig& c, std::ostream& log) {
  const Corpus corpus = load_word_corpus(c);
  const TrainResult r = train(corpus, c.encoder_config(corpus.vocab_size()), c.train_config());
  std::string csv = "step,loss\n";
  for (std::size_t i = 0; i < r.loss_history.size(); ++i) {
    csv += fmt::format("{},{}\n", i, r.loss_history[i]);
  }
  write_file_atomic(out_path(c, kParams), format_params(r.params));
  write_file_atomic(out_path(c, "mlm_loss.csv"), csv);
  if (!r.loss_history.empty()) {
    fmt::print(log, "train-mlm: {} steps, loss {:.4f} -> {:.4f}", r.loss_history.size(),
               r.loss_history.front(), r.loss_history.back());
  } else {
    fmt::print(log, "train-mlm: 0 steps");
  }
  if (r.clamped) fmt::print(log, " ({} clamped probabilities)", r.clamped);
  fmt::print(log, "\n");
}

void embed(const RunConfig& c, std::ostream& log) {
  const Corpus corpus = load_word_corpus(c);
  EmbeddingSet e;
  if (!c.from_file.empty()) {
    std::optional<fs::path> tokens;
    if (!c.from_file_tokens.empty()) tokens = c.from_file_tokens;
    e = import_embeddings(fs::path(c.from_file), corpus, tokens);
  } else {
    require(out_path(c, kParams), "train-mlm");
    e = embed_corpus(parse_params(read_file(out_path(c, kParams))), corpus);
  }
  write_file_atomic(out_path(c, kDocVectors), format_doc_vectors(e));
  if (e.has_token_vectors()) {
    write_file_atomic(out_path(c, kTokenVectors), format_token_vectors(e));
  } else if (fs::exists(out_path(c, kTokenVectors))) {
    fs::remove(out_path(c, kTokenVectors));
  }
  fmt::print(log, "embed: {} document vectors of dim {} ({})\n", e.num_docs(), e.dim,
             e.source == EmbeddingSource::file ? "from file" : "trained encoder");
}

void senses(const RunConfig& c, std::ostream& log) {
  if (c.senses == 0) throw ConfigError("senses stage needs --senses N with N >= 1");
  const Corpus corpus = load_word_corpus(c);
  require(out_path(c, kTokenVectors), "embed");
  const EmbeddingSet e =
      import_embeddings(out_path(c, kDocVectors), corpus, std::optional<fs::path>(out_path(c, kTokenVectors)));
  const SenseAssignment s = cluster_tokens(e, c.senses, derive_seed(c.seed, 3));
  const Corpus refined = refine_corpus(corpus, s);
  write_file_atomic(out_path(c, kSenseVocab), format_vocabulary(refined.vocab));
  write_file_atomic(out_path(c, kSenseCorpus), format_corpus(refined));
  const nlohmann::ordered_json summary = {{"senses", c.senses},
                                          {"used_senses", refined.vocab_size()},
                                          {"iterations", s.clustering.iterations},
                                          {"converged", s.clustering.converged},
                                          {"reseeds", s.clustering.reseeds}};
  write_file_atomic(out_path(c, "senses.json"), summary.dump(2) + "\n");
  fmt::print(log, "senses: {} token occurrences in {} senses ({} k-means iterations)\n",
             refined.total_tokens(), refined.vocab_size(), s.clustering.iterations);
}

void sweep_k(const RunConfig& c, std::ostream& log) {
  const Corpus corpus = load_topic_corpus(c);
  const TopicSweepResult r = select_topic_count(corpus, c.sweep_config());
  nlohmann::ordered_json curve = nlohmann::ordered_json::array();
  for (const auto& p : r.curve) curve.push_back({{"K", p.topics}, {"perplexity", p.perplexity}});
  const nlohmann::ordered_json summary = {{"best_k", r.best_topics},
                                          {"train_documents", r.train_docs.size()},
                                          {"held_out_documents", r.held_out_docs.size()},
                                          {"curve", curve}};
  write_file_atomic(out_path(c, "perplexity.csv"), format_sweep_csv(r));
  write_file_atomic(out_path(c, "sweep.json"), summary.dump(2) + "\n");
  fmt::print(log, "sweep-k: K = {}..{}, K* = {}\n", c.kmin, c.kmax, r.best_topics);
}

void fit(const RunConfig& c, std::ostream& log) {
  const Corpus corpus = load_topic_corpus(c);
  const std::size_t K = resolve_topics(c);
  const LdaModel model = topicmine::fit(corpus, c.lda_config(K));
  const Matrix theta = estimate_theta(model);
  const Matrix phi = estimate_phi(model);
  std::vector<std::string> topic_keys;
  for (std::size_t k = 0; k < K; ++k) topic_keys.push_back(fmt::format("topic-{}", k));
  const auto report = topic_report(model, corpus.vocab, c.top_t);
  write_file_atomic(out_path(c, kModel), format_model(model));
  write_file_atomic(out_path(c, kTheta), format_keyed_vectors(matrix_rows(corpus.doc_ids, theta)));
  write_file_atomic(out_path(c, kPhi), format_keyed_vectors(matrix_rows(topic_keys, phi)));
  write_file_atomic(out_path(c, "topics.json"), format_topic_report(report));
  if (report.front().truncated) {
    fmt::print(log, "warning: top_t {} exceeds vocabulary size {}; truncated\n", c.top_t, corpus.vocab_size());
  }
  fmt::print(log, "fit: K = {}, {} sweeps\n", K, c.iters);
  for (const auto& t : report) {
    std::string words;
    for (std::size_t i = 0; i < std::min<std::size_t>(t.keywords.size(), 8); ++i) {
      words += (i ? ", " : "") + t.keywords[i].word;
    }
    fmt::print(log, "  topic {}: {}\n", t.topic_index, words);
  }
}

void coherence(const RunConfig& c, std::ostream& log) {
  const Corpus corpus = load_topic_corpus(c);
  require(out_path(c, kPhi), "fit");
  const KeyedVectors phi = parse_keyed_vectors(read_file(out_path(c, kPhi)));
  if (phi.dim != corpus.vocab_size()) {
    throw InputError(fmt::format("phi has {} columns but the vocabulary has {} entries", phi.dim,
                                 corpus.vocab_size()));
  }
  const CoherenceSettings settings = c.coherence_settings();
  std::vector<std::vector<TokenId>> keywords;
  for (std::size_t k = 0; k < phi.keys.size(); ++k) {
    std::vector<TokenId> ids;
    for (const auto& kw : top_keywords(phi.rows, corpus.vocab, k, settings.top_t).keywords) ids.push_back(kw.id);
    keywords.push_back(std::move(ids));
  }
  const CoherenceReport report = coherence_report(keywords, corpus, settings);
  write_file_atomic(out_path(c, "coherence.json"), format_coherence_report(report, corpus.vocab));
  fmt::print(log, "coherence: u_mass mean {:.4f}, c_v mean {:.4f} over {} topics\n",
             report.u_mass_mean, report.c_v_mean, report.topics.size());
}

void tsne(const RunConfig& c, std::ostream& log) {
  require(out_path(c, kDocVectors), "embed");
  require(out_path(c, kTheta), "fit");
  const Corpus corpus = load_word_corpus(c);
  const EmbeddingSet e = import_embeddings(out_path(c, kDocVectors), corpus);
  const KeyedVectors theta_rows = parse_keyed_vectors(read_file(out_path(c, kTheta)));
  if (theta_rows.keys != corpus.doc_ids) throw InputError("theta rows are not aligned with the corpus documents");
  const Matrix& theta = theta_rows.rows;
  const auto fused = fuse_vectors(e, theta, c.lambda);
  const Projection2D proj = topicmine::tsne(stack_vectors(fused), c.tsne_settings());
  const auto dominant = dominant_topics(theta);
  const double sil = silhouette(proj.points, dominant);
  write_file_atomic(out_path(c, "points.csv"), format_points_csv(corpus.doc_ids, proj.points, dominant));
  write_file_atomic(out_path(c, "points.svg"), format_points_svg(proj.points, dominant));
  nlohmann::ordered_json kl = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < proj.kl_history.size(); ++i) {
    kl.push_back({{"iteration", proj.kl_iterations[i]}, {"kl", proj.kl_history[i]}});
  }
  nlohmann::ordered_json flagged = nlohmann::ordered_json::array();
  for (const auto& f : fused) {
    if (f.zero_embedding) flagged.push_back(f.doc_id);
  }
  const nlohmann::ordered_json summary = {
      {"points", proj.points.rows()},
      {"silhouette_dominant_topic", sil},
      {"final_kl", proj.kl_history.back()},
      {"perplexity", c.tsne_perplexity},
      {"iterations", c.tsne_iters},
      {"learning_rate", c.tsne_learning_rate},
      {"exaggeration", proj.settings.exaggeration},
      {"exaggeration_iterations", proj.settings.exaggeration_iterations},
      {"lambda", c.lambda},
      {"jittered_duplicates", proj.jittered},
      {"unconverged_bandwidths", proj.unconverged_bandwidths.size()},
      {"zero_embedding_documents", flagged},
      {"kl_history", kl}};
  write_file_atomic(out_path(c, "tsne.json"), summary.dump(2) + "\n");
  fmt::print(log, "tsne: {} points, KL {:.4f} -> {:.4f}, silhouette {:.3f}\n", proj.points.rows(),
             proj.kl_history.front(), proj.kl_history.back(), sil);
}

void pipeline(const RunConfig& c, std::ostream& log) {
  preprocess(c, log);
  if (c.from_file.empty()) train_mlm(c, log);
  embed(c, log);
  if (c.senses > 0) senses(c, log);
  if (c.k == 0) sweep_k(c, log);
  fit(c, log);
  coherence(c, log);
  tsne(c, log);
}

namespace {

void add_common_options(CLI::App& app, RunConfig& c, double& alpha) {
  app.add_option("--config", "JSON file with RunConfig fields; flags override it");
  app.add_option("--input", c.input, "raw corpus (.jsonl with id/text, or one document per line)");
  app.add_option("--stopwords", c.stopwords, "stopword file, one per line (default: built-in list)");
  app.add_option("--min-count", c.min_count, "minimum corpus frequency for the vocabulary");
  app.add_option("--seed", c.seed, "random seed");
  app.add_option("--out", c.out, "run directory");
  app.add_option("--k", c.k, "topic count (0: use K* from sweep-k)");
  app.add_option("--kmin", c.kmin, "smallest K in the sweep");
  app.add_option("--kmax", c.kmax, "largest K in the sweep");
  app.add_option("--alpha", alpha, "Dirichlet prior on theta (default 50/K)");
  app.add_option("--beta", c.beta, "Dirichlet prior on phi");
  app.add_option("--iters", c.iters, "Gibbs sweeps");
  app.add_option("--burn-in", c.burn_in, "sweeps before averaging");
  app.add_flag("--average", c.average, "average estimators over post-burn-in sweeps");
  app.add_option("--fold-in", c.fold_in, "fold-in sweeps for held-out documents");
  app.add_option("--split-ratio", c.split_ratio, "training share of documents in the sweep");
  app.add_option("--top-t", c.top_t, "keywords per topic");
  app.add_option("--window", c.window, "c_v co-occurrence window: doc or slide:N");
  app.add_option("--mask-rate", c.mask_rate, "fraction of tokens selected for MLM prediction");
  app.add_option("--strategy", c.strategy, "pure-mask or bert-80-10-10");
  app.add_option("--steps", c.steps, "MLM training steps");
  app.add_option("--batch-size", c.batch_size, "sequences per MLM step");
  app.add_option("--learning-rate", c.learning_rate, "MLM SGD learning rate");
  app.add_option("--dim", c.dim, "encoder width");
  app.add_option("--heads", c.heads, "attention heads");
  app.add_option("--layers", c.layers, "encoder layers");
  app.add_option("--max-len", c.max_len, "longest encoded sequence");
  app.add_option("--from-file", c.from_file, "external document vectors (skips training)");
  app.add_option("--token-file", c.from_file_tokens, "external token vectors for --from-file");
  app.add_option("--senses", c.senses, "cluster token vectors into N senses for LDA (0: off)");
  app.add_option("--lambda", c.lambda, "weight of the topic block in fused vectors");
  app.add_option("--tsne-perplexity", c.tsne_perplexity, "t-SNE neighbourhood perplexity");
  app.add_option("--tsne-iters", c.tsne_iters, "t-SNE iterations");
  app.add_option("--tsne-learning-rate", c.tsne_learning_rate, "t-SNE learning rate");
  app.add_option("--jobs", c.jobs, "parallel fits in sweep-k");
}

std::string config_path_from_args(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].starts_with("--config=")) return args[i].substr(9);
  }
  return {};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    RunConfig config;
    if (const auto path = config_path_from_args(args); !path.empty()) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(read_file(path));
      } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(fmt::format("config file {}: {}", path, e.what()));
      }
      config = run_config_from_json(j, config);
    }

    CLI::App app{"topicmine: topic mining over review corpora"};
    app.require_subcommand(1);
    double alpha = config.alpha.value_or(0.0);
    using Stage = void (*)(const RunConfig&, std::ostream&);
    const std::vector<std::tuple<const char*, const char*, Stage>> stages = {
        {"preprocess", "tokenize, remove stopwords, build vocabulary and encoded corpus", &preprocess},
        {"train-mlm", "train the masked-language-model encoder", &train_mlm},
        {"embed", "write contextual token and pooled document vectors", &embed},
        {"senses", "cluster token vectors into senses for embedding-refined LDA", &senses},
        {"sweep-k", "held-out perplexity over a range of topic counts", &sweep_k},
        {"fit", "fit LDA by collapsed Gibbs sampling and report topics", &fit},
        {"coherence", "u_mass and c_v coherence of the fitted topics", &coherence},
        {"tsne", "fuse document and topic vectors and project them to 2D", &tsne},
        {"pipeline", "run every stage in order", &pipeline}};
    std::map<CLI::App*, Stage> dispatch;
    for (const auto& [name, help, fn] : stages) {
      CLI::App* sub = app.add_subcommand(name, help);
      add_common_options(*sub, config, alpha);
      dispatch[sub] = fn;
    }
    CLI::App* synth = app.add_subcommand("synth-reviews", "write the synthetic sample review corpus");
    std::size_t synth_docs = 300;
    std::string synth_out;
    synth->add_option("--docs", synth_docs, "number of reviews");
    synth->add_option("--seed", config.seed, "random seed");
    synth->add_option("--output", synth_out, "JSON-lines output file")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
      app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return 0;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return 0;
    } catch (const CLI::ParseError& e) {
      err << "error: " << e.what() << "\n";
      return static_cast<int>(ExitCode::input_error);
    }

    if (synth->parsed()) {
      write_file_atomic(synth_out, make_sample_reviews(synth_docs, config.seed));
      return 0;
    }
    for (const auto& [sub, fn] : dispatch) {
      if (!sub->parsed()) continue;
      if (sub->count("--alpha") > 0) config.alpha = alpha;
      config.validate();
      fs::create_directories(config.out);
      fn(config, err);
      write_run_records(config);
      return 0;
    }
    return static_cast<int>(ExitCode::input_error);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(e.exit_code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::input_error);
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace topicmine::cli
