#include "llmprint/backend/toy_lm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "llmprint/core/error.hpp"
#include "llmprint/core/random.hpp"

namespace llmprint {
namespace {

constexpr double kLnEps = 1e-5;
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;
constexpr char kMagic[8] = {'L', 'M', 'P', 'T', 'O', 'Y', 'L', 'M'};
constexpr std::uint32_t kWeightFormatVersion = 1;

/// y = (x - mean) / sqrt(var + eps); returns 1 / sqrt(var + eps).
double layer_norm(const double* x, double* y, std::size_t d) {
  double mean = 0.0;
  for (std::size_t i = 0; i < d; ++i) mean += x[i];
  mean /= static_cast<double>(d);
  double var = 0.0;
  for (std::size_t i = 0; i < d; ++i) var += (x[i] - mean) * (x[i] - mean);
  var /= static_cast<double>(d);
  const double rstd = 1.0 / std::sqrt(var + kLnEps);
  for (std::size_t i = 0; i < d; ++i) y[i] = (x[i] - mean) * rstd;
  return rstd;
}

/// dx = rstd * (dy - mean(dy) - y * mean(dy * y)), y the normalized output.
void layer_norm_backward(const double* y, double rstd, const double* dy, double* dx,
                         std::size_t d) {
  double mean_dy = 0.0;
  double mean_dyy = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    mean_dy += dy[i];
    mean_dyy += dy[i] * y[i];
  }
  mean_dy /= static_cast<double>(d);
  mean_dyy /= static_cast<double>(d);
  for (std::size_t i = 0; i < d; ++i) dx[i] += rstd * (dy[i] - mean_dy - y[i] * mean_dyy);
}

/// out = in * W for row-major W[rows x cols].
void matvec(const double* in, const double* w, std::size_t rows, std::size_t cols, double* out) {
  std::fill(out, out + cols, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    const double a = in[i];
    const double* row = w + i * cols;
    for (std::size_t j = 0; j < cols; ++j) out[j] += a * row[j];
  }
}

/// din += W * dout, i.e. the transpose product of `matvec`.
void matvec_t_accumulate(const double* dout, const double* w, std::size_t rows, std::size_t cols,
                         double* din) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double* row = w + i * cols;
    double s = 0.0;
    for (std::size_t j = 0; j < cols; ++j) s += dout[j] * row[j];
    din[i] += s;
  }
}

double gelu(double u) { return 0.5 * u * (1.0 + std::tanh(kGeluC * (u + kGeluA * u * u * u))); }

double gelu_grad(double u) {
  const double t = std::tanh(kGeluC * (u + kGeluA * u * u * u));
  return 0.5 * (1.0 + t) + 0.5 * u * (1.0 - t * t) * kGeluC * (1.0 + 3.0 * kGeluA * u * u);
}

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

std::vector<std::string> layer_tensor_names(std::size_t l) {
  const std::string p = "layer" + std::to_string(l) + ".";
  return {p + "wq", p + "wk", p + "wv", p + "wo", p + "w1", p + "w2"};
}

}  // namespace

void ToyConfig::validate() const {
  if (vocab_size < 3) throw InvalidArgument("toy model vocabulary must hold at least 3 tokens");
  if (context_length < 2) throw InvalidArgument("toy model context length must be >= 2");
  if (hidden_width < 2) throw InvalidArgument("toy model hidden width must be >= 2");
  if (layers < 1) throw InvalidArgument("toy model needs at least one layer");
  if (bos_id >= vocab_size) throw InvalidArgument("toy model <bos> id outside vocabulary");
  if (end_id && *end_id >= vocab_size) throw InvalidArgument("toy model end marker outside vocabulary");
  if (context_length < (end_id ? 3u : 2u)) throw InvalidArgument("toy model context too short");
}

ToyConfig toy_config_for(const Vocabulary& vocab) {
  ToyConfig config;
  config.vocab_size = vocab.size();
  const auto bos = vocab.bos();
  if (!bos) throw InvalidArgument("toy vocabulary has no <bos> token");
  config.bos_id = *bos;
  config.end_id = vocab.find(Vocabulary::kEos);
  return config;
}

ToyLM ToyLM::init(const ToyConfig& config, std::uint64_t seed) {
  config.validate();
  ToyLM m;
  m.config_ = config;
  m.seed_ = seed;
  const std::size_t d = config.hidden_width;
  const std::size_t f = config.ffn();

  std::uint64_t stream = 0;
  auto make = [&](std::string name, std::size_t rows, std::size_t cols, double fan_in) {
    Tensor t{std::move(name), rows, cols, std::vector<double>(rows * cols)};
    Rng rng(mix_seed(seed, stream++));
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(fan_in));
    for (double& w : t.data) w = normal(rng);
    m.tensors_.push_back(std::move(t));
  };
  // An embedding lookup is a product with a one-hot vector: fan-in 1.
  make("token_embedding", config.vocab_size, d, 1.0);
  make("position_embedding", config.context_length, d, 1.0);
  for (std::size_t l = 0; l < config.layers; ++l) {
    const auto names = layer_tensor_names(l);
    make(names[0], d, d, static_cast<double>(d));
    make(names[1], d, d, static_cast<double>(d));
    make(names[2], d, d, static_cast<double>(d));
    make(names[3], d, d, static_cast<double>(d));
    make(names[4], d, f, static_cast<double>(d));
    make(names[5], f, d, static_cast<double>(f));
  }
  return m;
}

std::string ToyLM::id() const {
  return "toy-s" + std::to_string(seed_) + "-v" + std::to_string(config_.vocab_size) + "-d" +
         std::to_string(config_.hidden_width) + "-l" + std::to_string(config_.layers) + "-c" +
         std::to_string(config_.context_length) + lineage_;
}

ToyLM ToyLM::with_tensors(std::vector<Tensor> tensors, const std::string& lineage_step) const {
  if (tensors.size() != tensors_.size()) throw InvalidArgument("tensor count mismatch");
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const Tensor& a = tensors[i];
    const Tensor& b = tensors_[i];
    if (a.name != b.name || a.rows != b.rows || a.cols != b.cols ||
        a.data.size() != a.rows * a.cols) {
      throw InvalidArgument("tensor '" + a.name + "' does not match '" + b.name + "'");
    }
  }
  ToyLM m = *this;
  m.tensors_ = std::move(tensors);
  m.lineage_ += lineage_step;
  return m;
}

ToyLM::LayerWeights ToyLM::layer(std::size_t l) const {
  const std::size_t base = 2 + 6 * l;
  return {tensors_[base].data.data(),     tensors_[base + 1].data.data(),
          tensors_[base + 2].data.data(), tensors_[base + 3].data.data(),
          tensors_[base + 4].data.data(), tensors_[base + 5].data.data()};
}

void ToyLM::check_prompt(TokenSpan prompt) const {
  if (prompt.size() > max_prompt_length()) {
    throw InvalidArgument("prompt of " + std::to_string(prompt.size()) +
                          " tokens exceeds the context limit of " +
                          std::to_string(max_prompt_length()));
  }
  for (TokenId t : prompt) {
    if (t >= config_.vocab_size) {
      throw InvalidArgument("token id " + std::to_string(t) + " outside vocabulary");
    }
  }
}

void ToyLM::embed(TokenId token, std::size_t pos, double* out) const {
  const std::size_t d = config_.hidden_width;
  const double* e = token_embedding() + static_cast<std::size_t>(token) * d;
  const double* p = position_embedding() + pos * d;
  for (std::size_t i = 0; i < d; ++i) out[i] = e[i] + p[i];
}

TokenSequence ToyLM::sequence(TokenSpan prompt) const {
  TokenSequence tokens;
  tokens.reserve(prompt.size() + 2);
  tokens.push_back(config_.bos_id);
  tokens.insert(tokens.end(), prompt.begin(), prompt.end());
  if (config_.end_id) tokens.push_back(*config_.end_id);
  return tokens;
}

std::vector<double> ToyLM::embed_all(const TokenSequence& tokens) const {
  const std::size_t d = config_.hidden_width;
  std::vector<double> x(tokens.size() * d);
  for (std::size_t i = 0; i < tokens.size(); ++i) embed(tokens[i], i, x.data() + i * d);
  return x;
}

void ToyLM::layer_step(const LayerWeights& w, const double* x, std::size_t i, double* keys,
                       double* values, double* out) const {
  const std::size_t d = config_.hidden_width;
  const std::size_t f = config_.ffn();
  thread_local std::vector<double> buf;
  buf.resize(5 * d + config_.context_length + 2 * f);
  double* a = buf.data();
  double* q = a + d;
  double* o = q + d;
  double* h = o + d;
  double* b = h + d;
  double* scores = b + d;
  double* u = scores + config_.context_length;
  double* g = u + f;

  layer_norm(x, a, d);
  matvec(a, w.wk, d, d, keys + i * d);
  matvec(a, w.wv, d, d, values + i * d);
  if (out == nullptr) return;

  matvec(a, w.wq, d, d, q);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  double smax = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j <= i; ++j) {
    scores[j] = dot(q, keys + j * d, d) * scale;
    smax = std::max(smax, scores[j]);
  }
  double z = 0.0;
  for (std::size_t j = 0; j <= i; ++j) {
    scores[j] = std::exp(scores[j] - smax);
    z += scores[j];
  }
  std::fill(o, o + d, 0.0);
  for (std::size_t j = 0; j <= i; ++j) {
    const double p = scores[j] / z;
    const double* vj = values + j * d;
    for (std::size_t c = 0; c < d; ++c) o[c] += p * vj[c];
  }
  matvec(o, w.wo, d, d, h);
  for (std::size_t c = 0; c < d; ++c) h[c] += x[c];
  layer_norm(h, b, d);
  matvec(b, w.w1, d, f, u);
  for (std::size_t c = 0; c < f; ++c) g[c] = gelu(u[c]);
  matvec(g, w.w2, f, d, out);
  for (std::size_t c = 0; c < d; ++c) out[c] += h[c];
}

std::vector<double> ToyLM::head(const double* final_hidden) const {
  const std::size_t d = config_.hidden_width;
  std::vector<double> c(d);
  layer_norm(final_hidden, c.data(), d);
  std::vector<double> logits(config_.vocab_size);
  const double* e = token_embedding();
  for (std::size_t v = 0; v < logits.size(); ++v) logits[v] = dot(c.data(), e + v * d, d);
  return logits;
}

std::vector<double> ToyLM::forward(std::vector<double> x, std::size_t length) const {
  const std::size_t d = config_.hidden_width;
  const std::size_t last = config_.layers - 1;
  std::vector<double> next(length * d);
  std::vector<double> keys(length * d);
  std::vector<double> values(length * d);
  std::vector<double> final_hidden(d);
  for (std::size_t l = 0; l < config_.layers; ++l) {
    const LayerWeights w = layer(l);
    for (std::size_t i = 0; i < length; ++i) {
      double* out = nullptr;
      if (l < last) {
        out = next.data() + i * d;
      } else if (i + 1 == length) {
        out = final_hidden.data();
      }
      layer_step(w, x.data() + i * d, i, keys.data(), values.data(), out);
    }
    if (l < last) std::swap(x, next);
  }
  return head(final_hidden.data());
}

std::vector<double> ToyLM::logits(TokenSpan prompt) const {
  check_prompt(prompt);
  const TokenSequence tokens = sequence(prompt);
  return forward(embed_all(tokens), tokens.size());
}

std::vector<double> ToyLM::logits_relaxed(TokenSpan prompt, std::size_t position,
                                          std::span<const double> weights) const {
  check_prompt(prompt);
  if (position >= prompt.size()) throw InvalidArgument("relaxed position outside prompt");
  if (weights.size() != config_.vocab_size) throw LengthMismatch(config_.vocab_size, weights.size());
  const std::size_t d = config_.hidden_width;
  const TokenSequence tokens = sequence(prompt);
  const std::size_t length = tokens.size();
  std::vector<double> x = embed_all(tokens);
  double* row = x.data() + (position + 1) * d;
  const double* p = position_embedding() + (position + 1) * d;
  for (std::size_t c = 0; c < d; ++c) row[c] = p[c];
  const double* e = token_embedding();
  for (std::size_t v = 0; v < weights.size(); ++v) {
    if (weights[v] == 0.0) continue;
    for (std::size_t c = 0; c < d; ++c) row[c] += weights[v] * e[v * d + c];
  }
  return forward(std::move(x), length);
}

std::vector<std::vector<double>> ToyLM::input_gradients(TokenSpan prompt,
                                                        std::size_t first_position,
                                                        std::span<const double> dlogits) const {
  check_prompt(prompt);
  if (first_position > prompt.size()) throw InvalidArgument("gradient position outside prompt");
  if (dlogits.size() != config_.vocab_size) throw LengthMismatch(config_.vocab_size, dlogits.size());

  const std::size_t d = config_.hidden_width;
  const std::size_t f = config_.ffn();
  const TokenSequence tokens = sequence(prompt);
  const std::size_t n = tokens.size();
  const std::size_t layers = config_.layers;
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));

  // Full activation trace, every position of every layer.
  struct Trace {
    std::vector<double> x, a, q, k, v, p, o, h, b, u, g;
    std::vector<double> r1, r2;
  };
  std::vector<Trace> tr(layers);
  std::vector<double> x = embed_all(tokens);

  for (std::size_t l = 0; l < layers; ++l) {
    const LayerWeights w = layer(l);
    Trace& t = tr[l];
    t.x = x;
    t.a.assign(n * d, 0.0);
    t.q.assign(n * d, 0.0);
    t.k.assign(n * d, 0.0);
    t.v.assign(n * d, 0.0);
    t.p.assign(n * n, 0.0);
    t.o.assign(n * d, 0.0);
    t.h.assign(n * d, 0.0);
    t.b.assign(n * d, 0.0);
    t.u.assign(n * f, 0.0);
    t.g.assign(n * f, 0.0);
    t.r1.assign(n, 0.0);
    t.r2.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      t.r1[i] = layer_norm(&t.x[i * d], &t.a[i * d], d);
      matvec(&t.a[i * d], w.wq, d, d, &t.q[i * d]);
      matvec(&t.a[i * d], w.wk, d, d, &t.k[i * d]);
      matvec(&t.a[i * d], w.wv, d, d, &t.v[i * d]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      double* prow = &t.p[i * n];
      double smax = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j <= i; ++j) {
        prow[j] = dot(&t.q[i * d], &t.k[j * d], d) * scale;
        smax = std::max(smax, prow[j]);
      }
      double z = 0.0;
      for (std::size_t j = 0; j <= i; ++j) {
        prow[j] = std::exp(prow[j] - smax);
        z += prow[j];
      }
      for (std::size_t j = 0; j <= i; ++j) {
        prow[j] /= z;
        for (std::size_t c = 0; c < d; ++c) t.o[i * d + c] += prow[j] * t.v[j * d + c];
      }
      matvec(&t.o[i * d], w.wo, d, d, &t.h[i * d]);
      for (std::size_t c = 0; c < d; ++c) t.h[i * d + c] += t.x[i * d + c];
      t.r2[i] = layer_norm(&t.h[i * d], &t.b[i * d], d);
      matvec(&t.b[i * d], w.w1, d, f, &t.u[i * f]);
      for (std::size_t c = 0; c < f; ++c) t.g[i * f + c] = gelu(t.u[i * f + c]);
      matvec(&t.g[i * f], w.w2, f, d, &x[i * d]);
      for (std::size_t c = 0; c < d; ++c) x[i * d + c] += t.h[i * d + c];
    }
  }

  // Head: logits = LN(x_last) . E^T.
  const double* e = token_embedding();
  std::vector<double> c(d);
  const double rf = layer_norm(&x[(n - 1) * d], c.data(), d);
  std::vector<double> dc(d, 0.0);
  for (std::size_t vtok = 0; vtok < dlogits.size(); ++vtok) {
    const double g = dlogits[vtok];
    if (g == 0.0) continue;
    for (std::size_t j = 0; j < d; ++j) dc[j] += g * e[vtok * d + j];
  }
  std::vector<double> dx(n * d, 0.0);
  layer_norm_backward(c.data(), rf, dc.data(), &dx[(n - 1) * d], d);

  std::vector<double> dh(d), dg(f), du(f), db(d), dout(d), da(d);
  for (std::size_t l = layers; l-- > 0;) {
    const LayerWeights w = layer(l);
    const Trace& t = tr[l];
    std::vector<double> dx_in(n * d, 0.0);
    std::vector<double> dq(n * d, 0.0), dk(n * d, 0.0), dv(n * d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double* dy = &dx[i * d];
      bool nonzero = false;
      for (std::size_t j = 0; j < d && !nonzero; ++j) nonzero = dy[j] != 0.0;
      if (!nonzero) continue;
      // Feed-forward residual branch.
      std::copy(dy, dy + d, dh.begin());
      std::fill(dg.begin(), dg.end(), 0.0);
      matvec_t_accumulate(dy, w.w2, f, d, dg.data());
      for (std::size_t j = 0; j < f; ++j) du[j] = dg[j] * gelu_grad(t.u[i * f + j]);
      std::fill(db.begin(), db.end(), 0.0);
      matvec_t_accumulate(du.data(), w.w1, d, f, db.data());
      layer_norm_backward(&t.b[i * d], t.r2[i], db.data(), dh.data(), d);
      // Attention residual branch.
      for (std::size_t j = 0; j < d; ++j) dx_in[i * d + j] += dh[j];
      std::fill(dout.begin(), dout.end(), 0.0);
      matvec_t_accumulate(dh.data(), w.wo, d, d, dout.data());
      const double* prow = &t.p[i * n];
      double weighted = 0.0;
      std::vector<double> dp(i + 1);
      for (std::size_t j = 0; j <= i; ++j) {
        dp[j] = dot(dout.data(), &t.v[j * d], d);
        weighted += prow[j] * dp[j];
        for (std::size_t c2 = 0; c2 < d; ++c2) dv[j * d + c2] += prow[j] * dout[c2];
      }
      for (std::size_t j = 0; j <= i; ++j) {
        const double ds = prow[j] * (dp[j] - weighted) * scale;
        for (std::size_t c2 = 0; c2 < d; ++c2) {
          dq[i * d + c2] += ds * t.k[j * d + c2];
          dk[j * d + c2] += ds * t.q[i * d + c2];
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      std::fill(da.begin(), da.end(), 0.0);
      matvec_t_accumulate(&dq[i * d], w.wq, d, d, da.data());
      matvec_t_accumulate(&dk[i * d], w.wk, d, d, da.data());
      matvec_t_accumulate(&dv[i * d], w.wv, d, d, da.data());
      layer_norm_backward(&t.a[i * d], t.r1[i], da.data(), &dx_in[i * d], d);
    }
    dx = std::move(dx_in);
  }

  std::vector<std::vector<double>> grads;
  grads.reserve(prompt.size() - first_position);
  for (std::size_t pos = first_position; pos < prompt.size(); ++pos) {
    const double* g = &dx[(pos + 1) * d];
    std::vector<double> row(config_.vocab_size);
    for (std::size_t vtok = 0; vtok < row.size(); ++vtok) row[vtok] = dot(g, e + vtok * d, d);
    grads.push_back(std::move(row));
  }
  return grads;
}

ToyLM::Substitutions::Substitutions(const ToyLM& model, TokenSpan prompt) : model_(model) {
  model.check_prompt(prompt);
  tokens_ = model.sequence(prompt);
  prompt_size_ = prompt.size();
  const std::size_t d = model.config_.hidden_width;
  const std::size_t n = tokens_.size();
  const std::size_t layers = model.config_.layers;
  base_x_.assign(layers * n * d, 0.0);
  base_k_.assign(layers * n * d, 0.0);
  base_v_.assign(layers * n * d, 0.0);
  out_.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) model.embed(tokens_[i], i, &base_x_[i * d]);
  for (std::size_t l = 0; l < layers; ++l) {
    const LayerWeights w = model.layer(l);
    for (std::size_t i = 0; i < n; ++i) {
      double* out = nullptr;
      if (l + 1 < layers) {
        out = &base_x_[((l + 1) * n + i) * d];
      } else if (i + 1 == n) {
        out = out_.data();
      }
      model.layer_step(w, &base_x_[(l * n + i) * d], i, &base_k_[l * n * d], &base_v_[l * n * d],
                       out);
    }
  }
  x_ = base_x_;
  k_ = base_k_;
  v_ = base_v_;
  dirty_from_ = n;
}

std::vector<double> ToyLM::Substitutions::logits_with(std::size_t position, TokenId token) {
  const std::size_t n = tokens_.size();
  if (position >= prompt_size_) throw InvalidArgument("substitution position outside prompt");
  if (token >= model_.config_.vocab_size) throw InvalidArgument("substitution token outside vocabulary");
  const std::size_t d = model_.config_.hidden_width;
  const std::size_t layers = model_.config_.layers;
  const std::size_t start = position + 1;

  if (dirty_from_ < n) {
    for (std::size_t l = 0; l < layers; ++l) {
      const std::size_t off = (l * n + dirty_from_) * d;
      const std::size_t len = (n - dirty_from_) * d;
      std::memcpy(&x_[off], &base_x_[off], len * sizeof(double));
      std::memcpy(&k_[off], &base_k_[off], len * sizeof(double));
      std::memcpy(&v_[off], &base_v_[off], len * sizeof(double));
    }
  }
  dirty_from_ = start;

  model_.embed(token, start, &x_[start * d]);
  for (std::size_t l = 0; l < layers; ++l) {
    const LayerWeights w = model_.layer(l);
    for (std::size_t i = start; i < n; ++i) {
      double* out = nullptr;
      if (l + 1 < layers) {
        out = &x_[((l + 1) * n + i) * d];
      } else if (i + 1 == n) {
        out = out_.data();
      }
      model_.layer_step(w, &x_[(l * n + i) * d], i, &k_[l * n * d], &v_[l * n * d], out);
    }
  }
  return model_.head(out_.data());
}

void ToyLM::save(const std::filesystem::path& path) const {
  static_assert(std::endian::native == std::endian::little, "weight dumps assume little-endian");
  nlohmann::json header = {
      {"version", kWeightFormatVersion},
      {"seed", seed_},
      {"lineage", lineage_},
      {"config",
       {{"vocab_size", config_.vocab_size},
        {"context_length", config_.context_length},
        {"hidden_width", config_.hidden_width},
        {"layers", config_.layers},
        {"ffn_width", config_.ffn_width},
        {"bos_id", config_.bos_id},
        {"end_id", config_.end_id ? nlohmann::json(*config_.end_id) : nlohmann::json(nullptr)}}},
  };
  nlohmann::json shapes = nlohmann::json::array();
  for (const auto& t : tensors_) shapes.push_back({{"name", t.name}, {"rows", t.rows}, {"cols", t.cols}});
  header["tensors"] = shapes;
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out.write(kMagic, sizeof kMagic);
  const std::uint64_t len = text.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof len);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& t : tensors_) {
    out.write(reinterpret_cast<const char*>(t.data.data()),
              static_cast<std::streamsize>(t.data.size() * sizeof(double)));
  }
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

ToyLM ToyLM::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  char magic[sizeof kMagic];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw FormatError("'" + path.string() + "' is not a toy model weight dump");
  }
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof len);
  if (!in || len > (1u << 24)) throw FormatError("corrupt weight dump header");
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
    if (header.at("version").get<std::uint32_t>() != kWeightFormatVersion) {
      throw FormatError("unsupported weight dump version " + header.at("version").dump());
    }
    const auto& c = header.at("config");
    ToyConfig config;
    config.vocab_size = c.at("vocab_size").get<std::size_t>();
    config.context_length = c.at("context_length").get<std::size_t>();
    config.hidden_width = c.at("hidden_width").get<std::size_t>();
    config.layers = c.at("layers").get<std::size_t>();
    config.ffn_width = c.at("ffn_width").get<std::size_t>();
    config.bos_id = c.at("bos_id").get<TokenId>();
    if (!c.at("end_id").is_null()) config.end_id = c.at("end_id").get<TokenId>();
    // Shapes come from a fresh init so a dump can only load into the
    // architecture it was written from.
    ToyLM m = init(config, header.at("seed").get<std::uint64_t>());
    m.lineage_ = header.at("lineage").get<std::string>();
    const auto& shapes = header.at("tensors");
    if (shapes.size() != m.tensors_.size()) throw FormatError("weight dump tensor count mismatch");
    for (std::size_t i = 0; i < shapes.size(); ++i) {
      Tensor& t = m.tensors_[i];
      if (shapes[i].at("name").get<std::string>() != t.name ||
          shapes[i].at("rows").get<std::size_t>() != t.rows ||
          shapes[i].at("cols").get<std::size_t>() != t.cols) {
        throw FormatError("weight dump tensor " + std::to_string(i) + " has an unexpected shape");
      }
      in.read(reinterpret_cast<char*>(t.data.data()),
              static_cast<std::streamsize>(t.data.size() * sizeof(double)));
    }
    if (!in) throw FormatError("weight dump is truncated");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("corrupt weight dump header: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("invalid weight dump: ") + e.what());
  }
}

ToyBackend::ToyBackend(std::shared_ptr<const ToyLM> model, std::shared_ptr<const Vocabulary> vocab)
    : model_(std::move(model)), vocab_(std::move(vocab)) {
  if (!model_ || !vocab_) throw InvalidArgument("toy backend needs a model and a vocabulary");
  if (vocab_->size() != model_->config().vocab_size) {
    throw LengthMismatch(model_->config().vocab_size, vocab_->size());
  }
}

LogitVector ToyBackend::first_token_logits(TokenSpan prompt) const {
  return LogitVector(model_->logits(prompt));
}

std::vector<std::vector<double>> ToyBackend::logit_vjp(TokenSpan prompt, std::size_t first_position,
                                                       std::span<const double> dlogits) const {
  return model_->input_gradients(prompt, first_position, dlogits);
}

namespace {

class ToySubstitutionEvaluator final : public SubstitutionEvaluator {
 public:
  ToySubstitutionEvaluator(std::shared_ptr<const ToyLM> model, TokenSpan prompt)
      : model_(std::move(model)), subs_(*model_, prompt) {}

  LogitVector logits_with(std::size_t position, TokenId token) override {
    return LogitVector(subs_.logits_with(position, token));
  }

 private:
  std::shared_ptr<const ToyLM> model_;
  ToyLM::Substitutions subs_;
};

}  // namespace

std::unique_ptr<SubstitutionEvaluator> ToyBackend::substitution_evaluator(TokenSpan prompt) const {
  return std::make_unique<ToySubstitutionEvaluator>(model_, prompt);
}

}  // namespace llmprint
