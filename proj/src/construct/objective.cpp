#include "llmprint/construct/objective.hpp"

#include <cmath>
#include <limits>

#include "llmprint/core/error.hpp"

namespace llmprint::construct {
namespace {

void check_pair(const LogitVector& logits, const TokenPair& pair) {
  if (logits.size() < 3) {
    throw InvalidArgument("robustness loss needs a vocabulary of at least 3 tokens");
  }
  validate_pair(pair);
  if (pair.positive.id >= logits.size() || pair.negative.id >= logits.size()) {
    throw InvalidArgument("token pair outside the logit vector");
  }
}

/// logsumexp over every entry except the pair, and its maximum.
double others_logsumexp(const LogitVector& logits, const TokenPair& pair) {
  const auto v = logits.values();
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k == pair.positive.id || k == pair.negative.id) continue;
    m = std::max(m, v[k]);
  }
  double s = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k == pair.positive.id || k == pair.negative.id) continue;
    s += std::exp(v[k] - m);
  }
  return m + std::log(s);
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

double softplus(double x) {
  if (x > 0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double uniqueness_loss(double z_plus, double z_minus, double alpha) {
  if (!std::isfinite(z_plus) || !std::isfinite(z_minus) || !std::isfinite(alpha)) {
    throw InvalidArgument("uniqueness loss inputs must be finite");
  }
  if (alpha < 0) throw InvalidArgument("alpha must be >= 0");
  const double margin = z_plus - z_minus;
  return softplus(-margin) + alpha * std::abs(margin);
}

double robustness_loss(const LogitVector& logits, const TokenPair& pair) {
  check_pair(logits, pair);
  return std::max(0.0, others_logsumexp(logits, pair) - logits[pair.positive.id]);
}

double total_loss(const LogitVector& logits, const TokenPair& pair, double alpha, double beta) {
  if (!std::isfinite(beta) || beta < 0) throw InvalidArgument("beta must be finite and >= 0");
  const double u = uniqueness_loss(logits[pair.positive.id], logits[pair.negative.id], alpha);
  return u + beta * robustness_loss(logits, pair);
}

double total_loss(const LogitVector& logits, const LossSpec& spec) {
  return total_loss(logits, spec.pair, spec.alpha, spec.beta);
}

std::vector<double> total_loss_gradient(const LogitVector& logits, const LossSpec& spec) {
  check_pair(logits, spec.pair);
  const TokenId p = spec.pair.positive.id;
  const TokenId n = spec.pair.negative.id;
  std::vector<double> g(logits.size(), 0.0);

  const double margin = logits[p] - logits[n];
  const double sign = margin > 0 ? 1.0 : (margin < 0 ? -1.0 : 0.0);
  const double dm = -sigmoid(-margin) + spec.alpha * sign;
  g[p] += dm;
  g[n] -= dm;

  const double lse = others_logsumexp(logits, spec.pair);
  if (spec.beta != 0.0 && lse - logits[p] > 0.0) {
    const auto v = logits.values();
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (k == p || k == n) continue;
      g[k] += spec.beta * std::exp(v[k] - lse);
    }
    g[p] -= spec.beta;
  }
  return g;
}

std::vector<std::vector<double>> suffix_token_gradients(const ModelBackend& backend,
                                                        const FingerprintPrompt& prompt,
                                                        const LossSpec& spec) {
  if (!backend.capabilities().has(Capability::kTokenGradient)) {
    throw CapabilityError("backend '" + backend.id() + "' does not provide token gradients");
  }
  const TokenSequence full = prompt.full();
  const LogitVector logits = backend.first_token_logits(full);
  const auto dz = total_loss_gradient(logits, spec);
  return backend.logit_vjp(full, prompt.suffix_offset(), dz);
}

std::vector<double> token_gradient(const ModelBackend& backend, const FingerprintPrompt& prompt,
                                   std::size_t position, const LossSpec& spec) {
  if (position >= prompt.suffix.size()) {
    throw InvalidArgument("gradient position " + std::to_string(position) +
                          " outside the suffix of length " + std::to_string(prompt.suffix.size()));
  }
  if (!backend.capabilities().has(Capability::kTokenGradient)) {
    throw CapabilityError("backend '" + backend.id() + "' does not provide token gradients");
  }
  const TokenSequence full = prompt.full();
  const LogitVector logits = backend.first_token_logits(full);
  const auto dz = total_loss_gradient(logits, spec);
  auto rows = backend.logit_vjp(full, prompt.suffix_offset() + position, dz);
  return std::move(rows.front());
}

}  // namespace llmprint::construct
