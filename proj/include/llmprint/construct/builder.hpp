#pragma once

#include <optional>
#include <string>
#include <vector>

#include "llmprint/backend/backend.hpp"
#include "llmprint/construct/gcg.hpp"
#include "llmprint/core/fingerprint.hpp"

namespace llmprint::construct {

struct BuildFailure {
  std::size_t index = 0;
  TokenPair pair;
  std::string message;
};

struct BuildResult {
  /// Successful entries in input order; empty when every pair failed.
  std::optional<FingerprintSet> set;
  std::vector<BuildFailure> failures;
  /// One trace per input pair (empty for failed pairs).
  std::vector<OptimizationTrace> traces;
};

/// Optimizes one suffix per pair (independently, on up to `workers`
/// threads) and records each entry's reference bit 1[z+ >= z-] under
/// `backend`. Pair j uses the optimizer seed mix_seed(config.seed, j), so
/// the result does not depend on scheduling.
BuildResult build_fingerprints(const ModelBackend& backend, const std::vector<TokenPair>& pairs,
                               const TokenSequence& base_instruction,
                               const ConstructionConfig& config, std::size_t workers = 1);

/// 1[z+ >= z-] for `prompt` on `backend`.
std::uint8_t preference_bit(const ModelBackend& backend, const FingerprintPrompt& prompt,
                            const TokenPair& pair);

}  // namespace llmprint::construct
