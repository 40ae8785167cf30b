#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "llmprint/backend/backend.hpp"
#include "llmprint/backend/toy_lm.hpp"
#include "llmprint/core/fingerprint.hpp"

namespace llmprint::test {

/// "<bos>", "<eos>", then "t0" ... up to `size` tokens.
std::shared_ptr<const Vocabulary> tiny_vocab(std::size_t size);

TokenPair pair_of(const Vocabulary& vocab, TokenId positive, TokenId negative);

ToyConfig tiny_config(const Vocabulary& vocab, std::size_t width = 16, std::size_t context = 16);

std::shared_ptr<const ToyBackend> tiny_toy(std::shared_ptr<const Vocabulary> vocab,
                                           std::uint64_t seed, std::size_t width = 16,
                                           std::size_t context = 16);

/// Backend returning `logits` for every prompt.
std::shared_ptr<const FunctionBackend> constant_backend(std::shared_ptr<const Vocabulary> vocab,
                                                        std::vector<double> logits,
                                                        std::string id = "stub");

/// One entry per pair with a one-token instruction and suffix; every
/// reference bit set to `bit`.
FingerprintSet stub_set(const std::vector<TokenPair>& pairs, std::uint8_t bit = 1);

}  // namespace llmprint::test
