#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "llmprint/core/types.hpp"

namespace llmprint {

/// Ordered token list with an exact-surface lookup and a word-level tokenizer.
///
/// Tokenization splits on whitespace. A word with an exact vocabulary entry
/// becomes one token; any other word falls back to one token per character,
/// and characters without an entry map to the unknown token when one exists.
class Vocabulary {
 public:
  Vocabulary() = default;
  /// `special` marks surfaces (e.g. "<bos>") that never appear in suffixes.
  Vocabulary(std::vector<std::string> surfaces, std::vector<std::string> special);

  std::size_t size() const { return surfaces_.size(); }
  const std::string& surface(TokenId id) const;
  Token token(TokenId id) const { return Token{id, surface(id)}; }
  std::optional<TokenId> find(std::string_view surface) const;
  TokenId require(std::string_view surface) const;

  bool is_special(TokenId id) const;
  const std::vector<TokenId>& special_ids() const { return special_ids_; }
  /// Every non-special token id, ascending.
  std::vector<TokenId> ordinary_ids() const;

  /// Begin-of-sequence id when the vocabulary defines "<bos>".
  std::optional<TokenId> bos() const { return find(kBos); }

  TokenSequence tokenize(std::string_view text) const;
  /// Surfaces joined by single spaces.
  std::string render(TokenSpan ids) const;

  const std::vector<std::string>& surfaces() const { return surfaces_; }

  static constexpr std::string_view kBos = "<bos>";
  static constexpr std::string_view kEos = "<eos>";
  static constexpr std::string_view kUnk = "<unk>";

 private:
  std::vector<std::string> surfaces_;
  std::unordered_map<std::string, TokenId> index_;
  std::vector<TokenId> special_ids_;
  std::vector<bool> special_mask_;
};

}  // namespace llmprint
