#include <doctest.h>

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "helpers.hpp"
#include "topicmine/cli.hpp"
#include "topicmine/corpus_io.hpp"
#include "topicmine/io_util.hpp"
#include "topicmine/projection.hpp"

using namespace topicmine;
namespace fs = std::filesystem;

namespace {

const std::string kSample = std::string(TOPICMINE_DATA_DIR) + "/sample_reviews.jsonl";
const std::string kStopwords = std::string(TOPICMINE_DATA_DIR) + "/stopwords.txt";

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

// Small but complete settings so a pipeline run stays fast.
std::vector<std::string> fast_flags(const test::TempDir& dir) {
  return {"--input", kSample, "--stopwords", kStopwords, "--out", dir.str("run"), "--steps", "20",
          "--dim", "16", "--kmax", "5", "--iters", "40", "--tsne-iters", "300", "--tsne-perplexity", "20"};
}

std::vector<std::string> with(std::string cmd, std::vector<std::string> flags,
                              std::initializer_list<std::string> extra = {}) {
  flags.insert(flags.begin(), std::move(cmd));
  flags.insert(flags.end(), extra);
  return flags;
}

nlohmann::json manifest(const test::TempDir& dir) {
  return nlohmann::json::parse(read_file(dir.path() / "run" / "manifest.json"));
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("preprocess writes vocabulary and corpus") {
  test::TempDir dir("pre");
  const Result r = run({"preprocess", "--input", kSample, "--out", dir.str("run")});
  CHECK(r.code == 0);
  CHECK(fs::exists(dir.path() / "run" / "vocab.tsv"));
  const Corpus c = parse_corpus(read_file(dir.path() / "run" / "corpus.tsv"),
                                parse_vocabulary(read_file(dir.path() / "run" / "vocab.tsv")));
  CHECK(c.num_docs() == 300);
  CHECK(c.vocab.min_count() >= 2);
  const auto m = manifest(dir);
  CHECK(m["files"].size() >= 4);
}

TEST_CASE("malformed input exits 2 naming the line") {
  test::TempDir dir("bad");
  write_file_atomic(dir.path() / "in.jsonl", "{\"id\":\"a\",\"text\":\"good\"}\n{\"id\":\n");
  const Result r = run({"preprocess", "--input", dir.str("in.jsonl"), "--out", dir.str("run")});
  CHECK(r.code == 2);
  CHECK(r.err.find("line 2") != std::string::npos);
}

TEST_CASE("empty vocabulary exits 2") {
  test::TempDir dir("empty");
  const Result r = run({"preprocess", "--input", kSample, "--min-count", "100000", "--out", dir.str("run")});
  CHECK(r.code == 2);
  CHECK(r.err.find("vocabulary empty") != std::string::npos);
}

TEST_CASE("usage errors exit 2") {
  CHECK(run({"preprocess", "--no-such-flag"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"fit", "--k", "two"}).code == 2);
  test::TempDir dir("usage");
  CHECK(run({"preprocess", "--input", kSample, "--window", "slide:1", "--out", dir.str("run")}).code == 2);
  CHECK(run({"preprocess", "--input", kSample, "--strategy", "half", "--out", dir.str("run")}).code == 2);
  CHECK(run({"fit", "--out", dir.str("missing")}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("numerical divergence exits 3") {
  test::TempDir dir("nan");
  REQUIRE(run({"preprocess", "--input", kSample, "--out", dir.str("run")}).code == 0);
  const Result r = run({"train-mlm", "--out", dir.str("run"), "--steps", "30", "--dim", "8", "--learning-rate", "1e300"});
  CHECK(r.code == 3);
  CHECK(r.err.find("step") != std::string::npos);
}

TEST_CASE("train and embed give one vector per document, reproducibly") {
  test::TempDir dir("embed");
  const auto flags = fast_flags(dir);
  REQUIRE(run(with("preprocess", flags)).code == 0);
  REQUIRE(run(with("train-mlm", flags)).code == 0);
  REQUIRE(run(with("embed", flags)).code == 0);
  const std::string first = read_file(dir.path() / "run" / "doc_vectors.txt");
  const auto kv = parse_keyed_vectors(first);
  CHECK(kv.keys.size() == 300);
  CHECK(kv.dim == 16);

  REQUIRE(run(with("train-mlm", flags)).code == 0);
  REQUIRE(run(with("embed", flags)).code == 0);
  CHECK(read_file(dir.path() / "run" / "doc_vectors.txt") == first);
}

TEST_CASE("embed --from-file ingests external vectors") {
  test::TempDir dir("from");
  REQUIRE(run({"preprocess", "--input", kSample, "--out", dir.str("run")}).code == 0);
  const Corpus c = parse_corpus(read_file(dir.path() / "run" / "corpus.tsv"),
                                parse_vocabulary(read_file(dir.path() / "run" / "vocab.tsv")));
  KeyedVectors kv{3, c.doc_ids, Matrix::Ones(static_cast<Eigen::Index>(c.num_docs()), 3)};
  write_file_atomic(dir.path() / "ext.txt", format_keyed_vectors(kv));
  const std::string before = read_file(dir.path() / "ext.txt");
  const Result r = run({"embed", "--out", dir.str("run"), "--from-file", dir.str("ext.txt")});
  CHECK(r.code == 0);
  CHECK_FALSE(fs::exists(dir.path() / "run" / "encoder.params"));
  CHECK(parse_keyed_vectors(read_file(dir.path() / "run" / "doc_vectors.txt")).dim == 3);
  CHECK(read_file(dir.path() / "ext.txt") == before);

  kv.keys.pop_back();
  kv.rows.conservativeResize(kv.rows.rows() - 1, 3);
  write_file_atomic(dir.path() / "short.txt", format_keyed_vectors(kv));
  const Result bad = run({"embed", "--out", dir.str("run"), "--from-file", dir.str("short.txt")});
  CHECK(bad.code == 2);
  CHECK(bad.err.find(c.doc_ids.back()) != std::string::npos);
}

TEST_CASE("sweep over 1..14 writes fourteen rows") {
  test::TempDir dir("sweep");
  REQUIRE(run({"preprocess", "--input", kSample, "--out", dir.str("run")}).code == 0);
  const Result r = run({"sweep-k", "--out", dir.str("run"), "--kmin", "1", "--kmax", "14", "--iters", "10",
                        "--fold-in", "5", "--jobs", "2"});
  CHECK(r.code == 0);
  const std::string csv = read_file(dir.path() / "run" / "perplexity.csv");
  const auto lines = split(csv, '\n');
  CHECK(lines.front() == "K,perplexity");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 15);
}

TEST_CASE("pipeline on the sample corpus") {
  test::TempDir dir("pipe");
  const Result r = run(with("pipeline", fast_flags(dir)));
  INFO(r.err);
  REQUIRE(r.code == 0);
  const fs::path run_dir = dir.path() / "run";
  for (const char* f : {"manifest.json", "topics.json", "perplexity.csv", "coherence.json", "points.csv",
                        "points.svg", "run_config.json", "theta.txt", "phi.txt", "model.lda"}) {
    CHECK_MESSAGE(fs::exists(run_dir / f), f);
  }
  const auto topics = nlohmann::json::parse(read_file(run_dir / "topics.json"));
  const auto sweep = nlohmann::json::parse(read_file(run_dir / "sweep.json"));
  CHECK(topics.size() == sweep["best_k"].get<std::size_t>());
  CHECK(topics[0]["keywords"].size() == 10);
  const auto coherence = nlohmann::json::parse(read_file(run_dir / "coherence.json"));
  CHECK(coherence.dump().find("c_v_mean") != std::string::npos);
  CHECK(parse_points_csv(read_file(run_dir / "points.csv")).size() == 300);

  const auto m = manifest(dir);
  for (const auto& f : m["files"]) {
    CHECK(f["sha256"] == sha256_hex(read_file(run_dir / f["path"].get<std::string>())));
  }
}

TEST_CASE("identical reruns and config replay give identical hashes") {
  test::TempDir a("rerun-a"), b("rerun-b");
  REQUIRE(run(with("pipeline", fast_flags(a))).code == 0);
  const auto first = manifest(a);
  REQUIRE(run(with("pipeline", fast_flags(a))).code == 0);
  CHECK(manifest(a) == first);

  // Replay from the stored config into a different directory.
  auto cfg = nlohmann::json::parse(read_file(a.path() / "run" / "run_config.json"));
  cfg["out"] = b.str("run");
  write_file_atomic(b.path() / "cfg.json", cfg.dump());
  REQUIRE(run({"pipeline", "--config", b.str("cfg.json")}).code == 0);
  auto replay = manifest(b);
  auto original = first;
  // run_config.json differs only by its output directory.
  auto drop_config = [](nlohmann::json& m) {
    auto& files = m["files"];
    files.erase(std::remove_if(files.begin(), files.end(), [](const auto& f) { return f["path"] == "run_config.json"; }),
                files.end());
  };
  drop_config(replay);
  drop_config(original);
  CHECK(replay == original);
}

TEST_CASE("flags override the config file") {
  test::TempDir dir("override");
  write_file_atomic(dir.path() / "cfg.json",
                    nlohmann::json{{"input", kSample}, {"min_count", 3}, {"out", dir.str("run")}}.dump());
  REQUIRE(run({"preprocess", "--config", dir.str("cfg.json"), "--min-count", "4"}).code == 0);
  const auto stored = nlohmann::json::parse(read_file(dir.path() / "run" / "run_config.json"));
  CHECK(stored["min_count"] == 4);
  CHECK(stored["input"] == kSample);

  write_file_atomic(dir.path() / "bad.json", R"({"min_cont": 3})");
  CHECK(run({"preprocess", "--config", dir.str("bad.json")}).code == 2);
  write_file_atomic(dir.path() / "broken.json", "{");
  CHECK(run({"preprocess", "--config", dir.str("broken.json")}).code == 2);
}

TEST_CASE("sense-refined topics") {
  test::TempDir dir("senses");
  const auto flags = fast_flags(dir);
  const Result r = run(with("pipeline", flags, {"--senses", "12", "--k", "3"}));
  INFO(r.err);
  REQUIRE(r.code == 0);
  const auto topics = nlohmann::json::parse(read_file(dir.path() / "run" / "topics.json"));
  CHECK(topics.size() == 3);
  CHECK(topics[0]["keywords"][0]["word"].get<std::string>().find('#') != std::string::npos);
}

TEST_CASE("synthetic review generator") {
  test::TempDir dir("synth");
  REQUIRE(run({"synth-reviews", "--docs", "40", "--output", dir.str("r.jsonl")}).code == 0);
  CHECK(read_documents(dir.path() / "r.jsonl").size() == 40);
}

}  // TEST_SUITE
