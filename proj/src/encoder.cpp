#include "topicmine/encoder.hpp"

#include <cmath>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "topicmine/error.hpp"
#include "topicmine/io_util.hpp"

namespace topicmine {

namespace {

constexpr double kLayerNormEps = 1e-5;
constexpr double kProbFloor = 1e-12;
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)

struct NormCache {
  Matrix xhat;
  Eigen::VectorXd rstd;
};

Matrix layer_norm(const Matrix& x, const Matrix& gain, const Matrix& bias, NormCache& cache) {
  const auto n = x.rows();
  const auto d = static_cast<double>(x.cols());
  cache.xhat.resize(n, x.cols());
  cache.rstd.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mu = x.row(i).sum() / d;
    const RowVector centered = x.row(i).array() - mu;
    const double var = centered.squaredNorm() / d;
    cache.rstd(i) = 1.0 / std::sqrt(var + kLayerNormEps);
    cache.xhat.row(i) = centered * cache.rstd(i);
  }
  Matrix y = cache.xhat.array().rowwise() * gain.row(0).array();
  y.rowwise() += bias.row(0);
  return y;
}

Matrix layer_norm_backward(const Matrix& dy, const NormCache& cache, const Matrix& gain,
                           Matrix& dgain, Matrix& dbias) {
  const auto d = static_cast<double>(dy.cols());
  dgain.row(0) += (dy.array() * cache.xhat.array()).colwise().sum().matrix();
  dbias.row(0) += dy.colwise().sum();
  const Matrix dxhat = dy.array().rowwise() * gain.row(0).array();
  Matrix dx(dy.rows(), dy.cols());
  for (Eigen::Index i = 0; i < dy.rows(); ++i) {
    const double mean_d = dxhat.row(i).sum() / d;
    const double mean_dx = dxhat.row(i).dot(cache.xhat.row(i)) / d;
    dx.row(i) = cache.rstd(i) *
                (dxhat.row(i).array() - mean_d - cache.xhat.row(i).array() * mean_dx).matrix();
  }
  return dx;
}

double gelu(double x) { return 0.5 * x * (1.0 + std::tanh(kGeluC * (x + 0.044715 * x * x * x))); }

double gelu_grad(double x) {
  const double t = std::tanh(kGeluC * (x + 0.044715 * x * x * x));
  return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * kGeluC * (1.0 + 3.0 * 0.044715 * x * x);
}

void softmax_rows(Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double mx = m.row(i).maxCoeff();
    m.row(i) = (m.row(i).array() - mx).exp().matrix();
    m.row(i) /= m.row(i).sum();
  }
}

Matrix add_bias(Matrix m, const Matrix& bias) {
  m.rowwise() += bias.row(0);
  return m;
}

struct LayerCache {
  Matrix x_in;
  NormCache ln1;
  Matrix a, q, k, v;
  std::vector<Matrix> attn;  // per head, n x n
  Matrix o;
  Matrix x_mid;
  NormCache ln2;
  Matrix b, pre, act;
};

struct ForwardCache {
  std::vector<LayerCache> layers;
  Matrix x_out;
  NormCache final_norm;
  Matrix hidden;
};

Matrix forward(const EncoderParams& p, std::span<const TokenId> ids, ForwardCache& cache) {
  const auto& cfg = p.config;
  const auto n = static_cast<Eigen::Index>(ids.size());
  if (ids.size() > cfg.max_len) {
    throw ConfigError(
        fmt::format("sequence of length {} exceeds max_len {}", ids.size(), cfg.max_len));
  }
  const auto vocab_rows = p.token_embedding.rows();
  Matrix x(n, static_cast<Eigen::Index>(cfg.dim));
  for (Eigen::Index i = 0; i < n; ++i) {
    const TokenId id = ids[static_cast<std::size_t>(i)];
    if (id < 0 || id >= vocab_rows) throw ConfigError(fmt::format("token id {} out of range", id));
    x.row(i) = p.token_embedding.row(id) + p.position_embedding.row(i);
  }

  const auto heads = static_cast<Eigen::Index>(cfg.heads);
  const auto dh = static_cast<Eigen::Index>(cfg.dim / cfg.heads);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  cache.layers.resize(p.layers.size());
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const auto& L = p.layers[l];
    auto& c = cache.layers[l];
    c.x_in = x;
    c.a = layer_norm(x, L.ln1_gain, L.ln1_bias, c.ln1);
    c.q = add_bias(c.a * L.wq, L.bq);
    c.k = add_bias(c.a * L.wk, L.bk);
    c.v = add_bias(c.a * L.wv, L.bv);
    c.o.resize(n, static_cast<Eigen::Index>(cfg.dim));
    c.attn.resize(cfg.heads);
    for (Eigen::Index h = 0; h < heads; ++h) {
      Matrix s = c.q.middleCols(h * dh, dh) * c.k.middleCols(h * dh, dh).transpose() * scale;
      softmax_rows(s);
      c.o.middleCols(h * dh, dh) = s * c.v.middleCols(h * dh, dh);
      c.attn[static_cast<std::size_t>(h)] = std::move(s);
    }
    c.x_mid = x + add_bias(c.o * L.wo, L.bo);
    c.b = layer_norm(c.x_mid, L.ln2_gain, L.ln2_bias, c.ln2);
    c.pre = add_bias(c.b * L.w1, L.b1);
    c.act = c.pre.unaryExpr(&gelu);
    x = c.x_mid + add_bias(c.act * L.w2, L.b2);
  }
  cache.x_out = x;
  cache.hidden = layer_norm(x, p.final_gain, p.final_bias, cache.final_norm);
  return cache.hidden;
}

Matrix predict(const EncoderParams& p, const Matrix& hidden, std::span<const std::size_t> positions) {
  const auto V = static_cast<Eigen::Index>(p.config.vocab_size);
  Matrix sel(static_cast<Eigen::Index>(positions.size()), hidden.cols());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    sel.row(static_cast<Eigen::Index>(i)) = hidden.row(static_cast<Eigen::Index>(positions[i]));
  }
  Matrix logits = sel * p.token_embedding.topRows(V).transpose();
  logits.rowwise() += p.output_bias.row(0);
  softmax_rows(logits);
  return logits;
}

// Backpropagates d(loss)/d(hidden) through the network into grad.
void backward(const EncoderParams& p, std::span<const TokenId> ids, const ForwardCache& cache,
              const Matrix& dhidden, EncoderParams& g) {
  const auto& cfg = p.config;
  const auto heads = static_cast<Eigen::Index>(cfg.heads);
  const auto dh = static_cast<Eigen::Index>(cfg.dim / cfg.heads);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  Matrix dx = layer_norm_backward(dhidden, cache.final_norm, p.final_gain, g.final_gain,
                                  g.final_bias);
  for (std::size_t l = p.layers.size(); l-- > 0;) {
    const auto& L = p.layers[l];
    auto& G = g.layers[l];
    const auto& c = cache.layers[l];

    // feed-forward branch: x = x_mid + act * w2 + b2
    G.w2 += c.act.transpose() * dx;
    G.b2.row(0) += dx.colwise().sum();
    Matrix dact = dx * L.w2.transpose();
    Matrix dpre = dact.array() * c.pre.unaryExpr(&gelu_grad).array();
    G.w1 += c.b.transpose() * dpre;
    G.b1.row(0) += dpre.colwise().sum();
    Matrix db = dpre * L.w1.transpose();
    Matrix dx_mid = dx + layer_norm_backward(db, c.ln2, L.ln2_gain, G.ln2_gain, G.ln2_bias);

    // attention branch: x_mid = x_in + o * wo + bo
    G.wo += c.o.transpose() * dx_mid;
    G.bo.row(0) += dx_mid.colwise().sum();
    Matrix d_o = dx_mid * L.wo.transpose();
    Matrix dq(c.q.rows(), c.q.cols()), dk(c.k.rows(), c.k.cols()), dv(c.v.rows(), c.v.cols());
    for (Eigen::Index h = 0; h < heads; ++h) {
      const Matrix& A = c.attn[static_cast<std::size_t>(h)];
      const Matrix doh = d_o.middleCols(h * dh, dh);
      dv.middleCols(h * dh, dh) = A.transpose() * doh;
      Matrix dA = doh * c.v.middleCols(h * dh, dh).transpose();
      const Eigen::VectorXd row_dot = (dA.array() * A.array()).rowwise().sum();
      Matrix ds = (A.array() * (dA.colwise() - row_dot).array()).matrix() * scale;
      dq.middleCols(h * dh, dh) = ds * c.k.middleCols(h * dh, dh);
      dk.middleCols(h * dh, dh) = ds.transpose() * c.q.middleCols(h * dh, dh);
    }
    G.wq += c.a.transpose() * dq;
    G.wk += c.a.transpose() * dk;
    G.wv += c.a.transpose() * dv;
    G.bq.row(0) += dq.colwise().sum();
    G.bk.row(0) += dk.colwise().sum();
    G.bv.row(0) += dv.colwise().sum();
    Matrix da = dq * L.wq.transpose() + dk * L.wk.transpose() + dv * L.wv.transpose();
    dx = dx_mid + layer_norm_backward(da, c.ln1, L.ln1_gain, G.ln1_gain, G.ln1_bias);
  }
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    g.token_embedding.row(ids[i]) += dx.row(row);
    g.position_embedding.row(row) += dx.row(row);
  }
}

Matrix gaussian(Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng) {
  Matrix m(rows, cols);
  // Column-major fill order is part of the reproducibility contract.
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal(0.0, stddev);
  }
  return m;
}

}  // namespace

MaskStrategy parse_mask_strategy(std::string_view name) {
  if (name == "pure-mask") return MaskStrategy::pure_mask;
  if (name == "bert-80-10-10") return MaskStrategy::bert_80_10_10;
  throw ConfigError(fmt::format("unknown mask strategy '{}' (pure-mask | bert-80-10-10)", name));
}

std::string_view to_string(MaskStrategy s) {
  return s == MaskStrategy::pure_mask ? "pure-mask" : "bert-80-10-10";
}

std::size_t MaskedBatch::num_masked() const {
  std::size_t n = 0;
  for (const auto& p : mask_positions) n += p.size();
  return n;
}

MaskedBatch mask_tokens(std::span<const std::vector<TokenId>> sequences, std::size_t vocab_size,
                        double mask_rate, MaskStrategy strategy, Rng& rng) {
  if (!(mask_rate >= 0.0 && mask_rate <= 1.0)) {
    throw ConfigError(fmt::format("mask_rate {} outside [0, 1]", mask_rate));
  }
  MaskedBatch batch;
  batch.mask_id = static_cast<TokenId>(vocab_size);
  batch.pad_id = static_cast<TokenId>(vocab_size + 1);
  std::size_t width = 0;
  for (const auto& s : sequences) width = std::max(width, s.size());
  for (const auto& s : sequences) {
    std::vector<TokenId> row(width, batch.pad_id);
    std::copy(s.begin(), s.end(), row.begin());
    std::vector<std::size_t> positions;
    std::vector<TokenId> labels;
    std::vector<Replacement> kinds;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (rng.uniform() >= mask_rate) continue;
      positions.push_back(i);
      labels.push_back(s[i]);
      Replacement kind = Replacement::masked;
      if (strategy == MaskStrategy::bert_80_10_10) {
        const double u = rng.uniform();
        kind = u < 0.8 ? Replacement::masked : (u < 0.9 ? Replacement::random : Replacement::kept);
      }
      if (kind == Replacement::masked) {
        row[i] = batch.mask_id;
      } else if (kind == Replacement::random) {
        row[i] = static_cast<TokenId>(rng.below(vocab_size));
      }
      kinds.push_back(kind);
    }
    batch.sequences.push_back(std::move(row));
    batch.lengths.push_back(s.size());
    batch.mask_positions.push_back(std::move(positions));
    batch.labels.push_back(std::move(labels));
    batch.replacement_kinds.push_back(std::move(kinds));
  }
  return batch;
}

MaskedBatch mask_tokens(std::span<const std::vector<TokenId>> sequences, std::size_t vocab_size,
                        double mask_rate, MaskStrategy strategy, std::uint64_t seed) {
  Rng rng(seed);
  return mask_tokens(sequences, vocab_size, mask_rate, strategy, rng);
}

void EncoderConfig::validate() const {
  if (vocab_size < 2) throw ConfigError("encoder needs a vocabulary of at least 2 tokens");
  if (dim == 0 || heads == 0 || dim % heads != 0) {
    throw ConfigError(fmt::format("dim {} must be a positive multiple of heads {}", dim, heads));
  }
  if (max_len == 0) throw ConfigError("max_len must be positive");
  if (!(init_std > 0.0)) throw ConfigError("init_std must be positive");
}

std::vector<std::pair<std::string, Matrix*>> EncoderParams::tensors() {
  std::vector<std::pair<std::string, Matrix*>> out{{"token_embedding", &token_embedding},
                                                   {"position_embedding", &position_embedding}};
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto& L = layers[l];
    const std::pair<const char*, Matrix*> named[] = {
        {"wq", &L.wq},           {"bq", &L.bq},
        {"wk", &L.wk},           {"bk", &L.bk},
        {"wv", &L.wv},           {"bv", &L.bv},
        {"wo", &L.wo},           {"bo", &L.bo},
        {"w1", &L.w1},           {"b1", &L.b1},
        {"w2", &L.w2},           {"b2", &L.b2},
        {"ln1_gain", &L.ln1_gain}, {"ln1_bias", &L.ln1_bias},
        {"ln2_gain", &L.ln2_gain}, {"ln2_bias", &L.ln2_bias}};
    for (const auto& [name, m] : named) out.emplace_back(fmt::format("layer{}.{}", l, name), m);
  }
  out.emplace_back("final_gain", &final_gain);
  out.emplace_back("final_bias", &final_bias);
  out.emplace_back("output_bias", &output_bias);
  return out;
}

std::vector<std::pair<std::string, const Matrix*>> EncoderParams::tensors() const {
  std::vector<std::pair<std::string, const Matrix*>> out;
  for (auto& [name, m] : const_cast<EncoderParams*>(this)->tensors()) out.emplace_back(name, m);
  return out;
}

std::size_t EncoderParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, m] : tensors()) n += static_cast<std::size_t>(m->size());
  return n;
}

bool EncoderParams::all_finite() const {
  for (const auto& [name, m] : tensors()) {
    if (!m->allFinite()) return false;
  }
  return true;
}

EncoderParams init_params(const EncoderConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  const auto d = static_cast<Eigen::Index>(config.dim);
  const auto f = static_cast<Eigen::Index>(config.ffn());
  const auto V = static_cast<Eigen::Index>(config.vocab_size);
  const double s = config.init_std;
  EncoderParams p;
  p.config = config;
  p.token_embedding = gaussian(V + 2, d, s, rng);
  p.position_embedding = gaussian(static_cast<Eigen::Index>(config.max_len), d, s, rng);
  for (std::size_t l = 0; l < config.layers; ++l) {
    EncoderLayer L;
    L.wq = gaussian(d, d, s, rng);
    L.wk = gaussian(d, d, s, rng);
    L.wv = gaussian(d, d, s, rng);
    L.wo = gaussian(d, d, s, rng);
    L.w1 = gaussian(d, f, s, rng);
    L.w2 = gaussian(f, d, s, rng);
    L.bq = L.bk = L.bv = L.bo = L.b2 = Matrix::Zero(1, d);
    L.b1 = Matrix::Zero(1, f);
    L.ln1_gain = L.ln2_gain = Matrix::Ones(1, d);
    L.ln1_bias = L.ln2_bias = Matrix::Zero(1, d);
    p.layers.push_back(std::move(L));
  }
  p.final_gain = Matrix::Ones(1, d);
  p.final_bias = Matrix::Zero(1, d);
  p.output_bias = Matrix::Zero(1, V);
  return p;
}

EncoderParams zeros_like(const EncoderParams& params) {
  EncoderParams z = params;
  for (auto& [name, m] : z.tensors()) m->setZero();
  return z;
}

Encoding encode(const EncoderParams& params, std::span<const TokenId> ids) {
  ForwardCache cache;
  Encoding out;
  out.hidden = forward(params, ids, cache);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == params.config.mask_id()) out.predicted_at.push_back(i);
  }
  out.probabilities = predict(params, out.hidden, out.predicted_at);
  return out;
}

double mlm_loss(const Matrix& probabilities, std::span<const TokenId> labels,
                std::size_t* clamped) {
  if (static_cast<std::size_t>(probabilities.rows()) != labels.size()) {
    throw ConfigError(fmt::format("{} distributions for {} labels", probabilities.rows(),
                                  labels.size()));
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    double p = probabilities(static_cast<Eigen::Index>(i), labels[i]);
    if (p < kProbFloor) {
      p = kProbFloor;
      if (clamped) ++*clamped;
    }
    loss -= std::log(p);
  }
  return loss;
}

double mlm_loss_and_gradient(const EncoderParams& params, const MaskedBatch& batch,
                             EncoderParams* grad, double grad_scale, std::size_t* clamped) {
  const auto V = static_cast<Eigen::Index>(params.config.vocab_size);
  double total = 0.0;
  for (std::size_t s = 0; s < batch.sequences.size(); ++s) {
    const auto& positions = batch.mask_positions[s];
    if (positions.empty()) continue;
    const std::span<const TokenId> ids(batch.sequences[s].data(), batch.lengths[s]);
    ForwardCache cache;
    const Matrix hidden = forward(params, ids, cache);
    const Matrix probs = predict(params, hidden, positions);
    total += mlm_loss(probs, batch.labels[s], clamped);
    if (!grad) continue;

    // d(-log softmax)/d(logits) = p - onehot
    Matrix dlogits = probs;
    for (std::size_t i = 0; i < positions.size(); ++i) {
      dlogits(static_cast<Eigen::Index>(i), batch.labels[s][i]) -= 1.0;
    }
    dlogits *= grad_scale;
    Matrix selected(static_cast<Eigen::Index>(positions.size()), hidden.cols());
    for (std::size_t i = 0; i < positions.size(); ++i) {
      selected.row(static_cast<Eigen::Index>(i)) = hidden.row(static_cast<Eigen::Index>(positions[i]));
    }
    grad->token_embedding.topRows(V) += dlogits.transpose() * selected;
    grad->output_bias.row(0) += dlogits.colwise().sum();
    const Matrix dselected = dlogits * params.token_embedding.topRows(V);
    Matrix dhidden = Matrix::Zero(hidden.rows(), hidden.cols());
    for (std::size_t i = 0; i < positions.size(); ++i) {
      dhidden.row(static_cast<Eigen::Index>(positions[i])) += dselected.row(static_cast<Eigen::Index>(i));
    }
    backward(params, ids, cache, dhidden, *grad);
  }
  return total;
}

std::vector<std::vector<TokenId>> training_sequences(const Corpus& corpus, std::size_t max_len) {
  std::vector<std::vector<TokenId>> out;
  for (const auto& doc : corpus.docs) {
    for (std::size_t start = 0; start < doc.size(); start += max_len) {
      const std::size_t end = std::min(doc.size(), start + max_len);
      out.emplace_back(doc.begin() + static_cast<std::ptrdiff_t>(start),
                       doc.begin() + static_cast<std::ptrdiff_t>(end));
    }
  }
  return out;
}

TrainResult train(const Corpus& corpus, const EncoderConfig& model, const TrainConfig& config) {
  EncoderConfig cfg = model;
  cfg.vocab_size = corpus.vocab_size();
  cfg.validate();
  if (!(config.mask_rate >= 0.0 && config.mask_rate <= 1.0)) {
    throw ConfigError(fmt::format("mask_rate {} outside [0, 1]", config.mask_rate));
  }
  if (config.batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(config.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  const auto sequences = training_sequences(corpus, cfg.max_len);
  if (sequences.empty()) throw ConfigError("training corpus has no tokens");
  if (config.mask_rate == 0.0 && config.steps > 0) {
    throw ConfigError("mask_rate 0 leaves nothing to predict");
  }

  TrainResult result;
  result.params = init_params(cfg, derive_seed(config.seed, 0));
  Rng rng(derive_seed(config.seed, 1));
  double last_finite = 0.0;
  for (std::size_t step = 0; step < config.steps; ++step) {
    std::vector<std::vector<TokenId>> picked;
    picked.reserve(config.batch_size);
    for (std::size_t b = 0; b < config.batch_size; ++b) {
      picked.push_back(sequences[rng.below(sequences.size())]);
    }
    // Redraw the mask until at least one position is selected.
    MaskedBatch batch = mask_tokens(picked, cfg.vocab_size, config.mask_rate, config.strategy, rng);
    while (batch.num_masked() == 0) {
      batch = mask_tokens(picked, cfg.vocab_size, config.mask_rate, config.strategy, rng);
    }
    EncoderParams grad = zeros_like(result.params);
    const double loss = mlm_loss_and_gradient(result.params, batch, &grad,
                                              1.0 / static_cast<double>(batch.num_masked()),
                                              &result.clamped);
    if (!std::isfinite(loss)) {
      throw NumericalError(fmt::format("non-finite loss at step {} (last finite loss {})", step,
                                       last_finite));
    }
    last_finite = loss;
    result.loss_history.push_back(loss);
    auto params = result.params.tensors();
    auto grads = grad.tensors();
    for (std::size_t t = 0; t < params.size(); ++t) {
      *params[t].second -= config.learning_rate * *grads[t].second;
    }
    if (!result.params.all_finite()) {
      throw NumericalError(fmt::format("non-finite parameters after step {} (last finite loss {})",
                                       step, last_finite));
    }
  }
  return result;
}

RowVector pool_document(const Matrix& token_vectors) {
  if (token_vectors.rows() == 0) return RowVector::Zero(token_vectors.cols());
  return token_vectors.colwise().mean();
}

std::string format_params(const EncoderParams& params) {
  const auto& c = params.config;
  nlohmann::ordered_json header = {{"vocab_size", c.vocab_size}, {"dim", c.dim},
                                   {"heads", c.heads},           {"layers", c.layers},
                                   {"max_len", c.max_len},       {"ffn_dim", c.ffn_dim},
                                   {"init_std", c.init_std}};
  std::string out = header.dump() + "\n";
  for (const auto& [name, m] : params.tensors()) {
    out += fmt::format("{} {} {}\n", name, m->rows(), m->cols());
    for (Eigen::Index i = 0; i < m->rows(); ++i) {
      for (Eigen::Index j = 0; j < m->cols(); ++j) {
        if (j) out += ' ';
        out += format_double((*m)(i, j));
      }
      out += '\n';
    }
  }
  return out;
}

EncoderParams parse_params(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw InputError("encoder params: missing header");
  EncoderConfig c;
  try {
    const auto h = nlohmann::json::parse(line);
    c.vocab_size = h.at("vocab_size");
    c.dim = h.at("dim");
    c.heads = h.at("heads");
    c.layers = h.at("layers");
    c.max_len = h.at("max_len");
    c.ffn_dim = h.at("ffn_dim");
    c.init_std = h.at("init_std");
  } catch (const nlohmann::json::exception& e) {
    throw InputError(fmt::format("encoder params header: {}", e.what()));
  }
  EncoderParams p = init_params(c, 0);
  std::size_t line_no = 1;
  for (auto& [name, m] : p.tensors()) {
    ++line_no;
    if (!std::getline(in, line)) throw InputError(fmt::format("encoder params: missing tensor {}", name));
    const auto head = split(line, ' ');
    if (head.size() != 3 || head[0] != name || parse_int(head[1]) != m->rows() ||
        parse_int(head[2]) != m->cols()) {
      throw InputError(fmt::format("encoder params line {}: expected tensor {} {}x{}", line_no,
                                   name, m->rows(), m->cols()));
    }
    for (Eigen::Index i = 0; i < m->rows(); ++i) {
      ++line_no;
      if (!std::getline(in, line)) throw InputError(fmt::format("encoder params: truncated at line {}", line_no));
      const auto vals = split(line, ' ');
      if (static_cast<Eigen::Index>(vals.size()) != m->cols()) {
        throw InputError(fmt::format("encoder params line {}: expected {} values", line_no, m->cols()));
      }
      for (Eigen::Index j = 0; j < m->cols(); ++j) (*m)(i, j) = parse_double(vals[static_cast<std::size_t>(j)]);
    }
  }
  return p;
}

}  // namespace topicmine
