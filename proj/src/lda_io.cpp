#include <numeric>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "topicmine/error.hpp"
#include "topicmine/io_util.hpp"
#include "topicmine/lda.hpp"

namespace topicmine {

namespace {

std::string format_rows(const std::vector<std::int64_t>& flat, std::size_t rows, std::size_t cols) {
  std::string out;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (c) out += ' ';
      out += fmt::format("{}", flat[r * cols + c]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace

std::string format_model(const LdaModel& model) {
  const std::size_t M = model.num_docs();
  const std::size_t K = model.num_topics;
  const std::size_t V = model.vocab_size;
  const std::string body = format_rows(model.n_mk, M, K) + format_rows(model.n_kv, K, V);
  const auto& c = model.config;
  nlohmann::ordered_json header = {
      {"format", "topicmine-lda-1"},
      {"config",
       {{"topics", c.topics},
        {"alpha", c.alpha},
        {"beta", c.beta},
        {"iterations", c.iterations},
        {"burn_in", c.burn_in},
        {"average_after_burn_in", c.average_after_burn_in},
        {"seed", c.seed}}},
      {"V", V},
      {"M", M},
      {"K", K},
      {"n_mk_total", std::accumulate(model.n_mk.begin(), model.n_mk.end(), std::int64_t{0})},
      {"n_kv_total", std::accumulate(model.n_kv.begin(), model.n_kv.end(), std::int64_t{0})},
      {"sha256", sha256_hex(body)}};
  return header.dump() + "\n" + body;
}

LdaModel parse_model(const std::string& text) {
  const auto newline = text.find('\n');
  if (newline == std::string::npos) throw InputError("model file: missing header line");
  LdaModel m;
  std::size_t M = 0;
  std::string expected_hash;
  std::int64_t mk_total = 0, kv_total = 0;
  try {
    const auto h = nlohmann::json::parse(text.substr(0, newline));
    if (h.at("format") != "topicmine-lda-1") throw InputError("model file: unknown format");
    const auto& c = h.at("config");
    m.config.topics = c.at("topics");
    m.config.alpha = c.at("alpha");
    m.config.beta = c.at("beta");
    m.config.iterations = c.at("iterations");
    m.config.burn_in = c.at("burn_in");
    m.config.average_after_burn_in = c.at("average_after_burn_in");
    m.config.seed = c.at("seed");
    m.vocab_size = h.at("V");
    m.num_topics = h.at("K");
    M = h.at("M");
    mk_total = h.at("n_mk_total");
    kv_total = h.at("n_kv_total");
    expected_hash = h.at("sha256");
  } catch (const nlohmann::json::exception& e) {
    throw InputError(fmt::format("model file header: {}", e.what()));
  }
  const std::string body = text.substr(newline + 1);
  if (sha256_hex(body) != expected_hash) throw InputError("model file: checksum mismatch");

  const std::size_t K = m.num_topics;
  const std::size_t V = m.vocab_size;
  auto lines = split(body, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.size() != M + K) {
    throw InputError(fmt::format("model file: expected {} matrix rows, found {}", M + K, lines.size()));
  }
  auto read_row = [&](std::size_t line, std::size_t cols, std::vector<std::int64_t>& dst) {
    const auto vals = split(lines[line], ' ');
    if (vals.size() != cols) {
      throw InputError(fmt::format("model file line {}: expected {} counts", line + 2, cols));
    }
    for (const auto& v : vals) dst.push_back(parse_int(v));
  };
  for (std::size_t r = 0; r < M; ++r) read_row(r, K, m.n_mk);
  for (std::size_t r = 0; r < K; ++r) read_row(M + r, V, m.n_kv);
  if (std::accumulate(m.n_mk.begin(), m.n_mk.end(), std::int64_t{0}) != mk_total ||
      std::accumulate(m.n_kv.begin(), m.n_kv.end(), std::int64_t{0}) != kv_total) {
    throw InputError("model file: count totals disagree with header");
  }
  m.n_k.assign(K, 0);
  m.n_m.assign(M, 0);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t v = 0; v < V; ++v) m.n_k[k] += m.n_kv[k * V + v];
  }
  for (std::size_t d = 0; d < M; ++d) {
    for (std::size_t k = 0; k < K; ++k) m.n_m[d] += m.n_mk[d * K + k];
  }
  return m;
}

}  // namespace topicmine
