#pragma once

#include <cstdint>
#include <vector>

#include "llmprint/core/error.hpp"
#include "llmprint/core/types.hpp"
#include "llmprint/core/vocabulary.hpp"
#include "llmprint/pairs/catalog.hpp"

namespace llmprint::pairs {

/// Rejection sampling gave up before collecting the requested pairs.
class PairExhaustion : public Error {
 public:
  PairExhaustion(std::size_t requested, std::vector<TokenPair> achieved);

  std::size_t requested() const { return requested_; }
  /// Pairs collected before giving up.
  const std::vector<TokenPair>& achieved() const { return achieved_; }

 private:
  std::size_t requested_;
  std::vector<TokenPair> achieved_;
};

inline constexpr std::size_t kAttemptsPerPair = 1000;

/// Draws `n` unique unordered within-category pairs whose words are each a
/// single token of `vocab`. Each attempt picks a category uniformly, then two
/// distinct words uniformly; the first-drawn word becomes the positive token.
/// Throws PairExhaustion after kAttemptsPerPair * n attempts.
std::vector<TokenPair> sample_token_pairs(const CategoryCatalog& catalog, const Vocabulary& vocab,
                                          std::size_t n, std::uint64_t seed);

}  // namespace llmprint::pairs
