#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "llmprint/core/bitstring.hpp"
#include "llmprint/core/types.hpp"

namespace llmprint {

/// Settings recorded with every constructed fingerprint.
struct ConstructionMeta {
  double alpha = 0.5;
  double beta = 1.0;
  std::size_t iterations = 0;
  std::uint64_t seed = 0;
  std::string model_id;

  friend bool operator==(const ConstructionMeta&, const ConstructionMeta&) = default;
};

struct FingerprintEntry {
  TokenPair pair;
  FingerprintPrompt prompt;
  std::uint8_t reference_bit = 0;
  double final_loss = 0.0;
  ConstructionMeta meta;

  friend bool operator==(const FingerprintEntry&, const FingerprintEntry&) = default;
};

/// Ordered, non-empty list of entries sharing one base instruction.
///
/// Invariants checked on construction: n >= 1, pairwise-distinct unordered
/// token pairs, all entries share one base instruction and suffix length,
/// every reference bit is 0 or 1.
class FingerprintSet {
 public:
  explicit FingerprintSet(std::vector<FingerprintEntry> entries,
                          std::string base_instruction_text = {});

  std::size_t size() const { return entries_.size(); }
  const std::vector<FingerprintEntry>& entries() const { return entries_; }
  const FingerprintEntry& operator[](std::size_t i) const { return entries_[i]; }

  const TokenSequence& base_instruction() const { return entries_.front().prompt.base_instruction; }
  const std::string& base_instruction_text() const { return base_instruction_text_; }
  const ConstructionMeta& meta() const { return entries_.front().meta; }

  /// Reference bits as stored at construction time.
  BitString reference_bits() const;

  /// First `n` entries; used for fingerprint-count sweeps.
  FingerprintSet prefix(std::size_t n) const;

  friend bool operator==(const FingerprintSet&, const FingerprintSet&) = default;

 private:
  std::vector<FingerprintEntry> entries_;
  std::string base_instruction_text_;
};

}  // namespace llmprint
