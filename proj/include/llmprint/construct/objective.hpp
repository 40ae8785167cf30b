#pragma once

#include <span>
#include <vector>

#include "llmprint/backend/backend.hpp"
#include "llmprint/backend/logits.hpp"
#include "llmprint/core/types.hpp"

namespace llmprint::construct {

/// The fingerprint objective instantiated for one token pair.
struct LossSpec {
  TokenPair pair;
  double alpha = 0.5;
  double beta = 1.0;
};

/// log(1 + e^x) without overflow.
double softplus(double x);

/// -log sigmoid(z+ - z-) + alpha * |z+ - z-|.
/// Throws InvalidArgument for non-finite inputs or negative alpha.
double uniqueness_loss(double z_plus, double z_minus, double alpha);

/// max(0, logsumexp of every logit except the pair's - z+).
/// Throws InvalidArgument when the vocabulary has fewer than 3 tokens.
double robustness_loss(const LogitVector& logits, const TokenPair& pair);

/// uniqueness_loss + beta * robustness_loss with z+ and z- read from `logits`.
double total_loss(const LogitVector& logits, const TokenPair& pair, double alpha, double beta);
double total_loss(const LogitVector& logits, const LossSpec& spec);

/// d(total_loss)/d(logits). The kinks of |m| at m = 0 and of the hinge at
/// its boundary take subgradient 0.
std::vector<double> total_loss_gradient(const LogitVector& logits, const LossSpec& spec);

/// Gradient of the total loss w.r.t. the one-hot token indicator at suffix
/// `position`, one entry per vocabulary token. Requires kTokenGradient.
std::vector<double> token_gradient(const ModelBackend& backend, const FingerprintPrompt& prompt,
                                   std::size_t position, const LossSpec& spec);

/// token_gradient for every suffix position from a single backward pass.
std::vector<std::vector<double>> suffix_token_gradients(const ModelBackend& backend,
                                                        const FingerprintPrompt& prompt,
                                                        const LossSpec& spec);

}  // namespace llmprint::construct
