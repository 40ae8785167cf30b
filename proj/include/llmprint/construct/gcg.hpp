#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "llmprint/backend/backend.hpp"
#include "llmprint/construct/objective.hpp"
#include "llmprint/core/types.hpp"

namespace llmprint::construct {

enum class ProposalMode {
  kAuto,        // gradient-guided when the backend has gradients, else random
  kGradient,    // top-k tokens per position by most negative one-hot gradient
  kRandom,      // uniform position and token
  kExhaustive,  // every position x every allowed token
};

ProposalMode parse_proposal_mode(const std::string& text);
std::string to_string(ProposalMode mode);

struct ConstructionConfig {
  double alpha = 0.5;
  double beta = 1.0;
  std::size_t suffix_length = 20;
  std::size_t iterations = 1000;
  std::size_t candidates_per_position = 64;
  std::size_t batch_size = 64;
  /// Placeholder surface the suffix starts from.
  std::string init_token = "x";
  std::uint64_t seed = 0;
  ProposalMode proposals = ProposalMode::kAuto;
  /// Stop after this many consecutive iterations without improvement;
  /// 0 runs all iterations. Exhaustive proposals always stop at a fixed point.
  std::size_t patience = 0;

  /// Throws InvalidArgument when a count is zero or a weight is negative.
  void validate() const;
};

struct Substitution {
  std::size_t iteration = 0;
  std::size_t position = 0;
  TokenId old_token = 0;
  TokenId new_token = 0;
};

struct OptimizationTrace {
  double initial_loss = 0.0;
  /// Best loss after each completed iteration; non-increasing.
  std::vector<double> best_loss;
  std::vector<Substitution> accepted;
  TokenSequence final_suffix;
};

struct GcgResult {
  TokenSequence suffix;
  double loss = 0.0;
  OptimizationTrace trace;
};

/// Greedy coordinate search over a fixed-length suffix appended to
/// `base_instruction`. Each iteration scores a batch of single-token
/// substitutions exactly and keeps the best one only if it strictly lowers
/// the loss. Requires kLogits (and kTokenGradient for gradient proposals).
GcgResult gcg_optimize(const ModelBackend& backend, const TokenSequence& base_instruction,
                       const TokenPair& pair, const ConstructionConfig& config);

/// Brute-force oracle: repeatedly applies the single substitution (over all
/// positions and allowed tokens) that most lowers the loss until none does.
/// Starts from `initial_suffix`, or from the placeholder suffix when empty.
struct DescentLimits {
  std::size_t max_combinations_per_pass = 10000;
  std::size_t max_passes = 100000;
};
TokenSequence exhaustive_descent(const ModelBackend& backend, const TokenSequence& base_instruction,
                                 const TokenPair& pair, const ConstructionConfig& config,
                                 const TokenSequence& initial_suffix = {},
                                 const DescentLimits& limits = {});

/// Tokens eligible for suffix positions: every non-special vocabulary token.
std::vector<TokenId> suffix_alphabet(const Vocabulary& vocab);

}  // namespace llmprint::construct
