#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace llmprint {

using TokenId = std::uint32_t;
using TokenSpan = std::span<const TokenId>;
using TokenSequence = std::vector<TokenId>;

struct Token {
  TokenId id = 0;
  std::string surface;

  friend bool operator==(const Token&, const Token&) = default;
};

/// (w+, w-) with the category both words were drawn from.
struct TokenPair {
  Token positive;
  Token negative;
  std::string category;

  friend bool operator==(const TokenPair&, const TokenPair&) = default;
};

/// Throws InvalidArgument when the two tokens share an id or a surface is empty.
void validate_pair(const TokenPair& pair);

/// A fixed instruction template followed by an optimizable suffix.
struct FingerprintPrompt {
  TokenSequence base_instruction;
  TokenSequence suffix;

  TokenSequence full() const;
  std::size_t suffix_offset() const { return base_instruction.size(); }

  friend bool operator==(const FingerprintPrompt&, const FingerprintPrompt&) = default;
};

}  // namespace llmprint
