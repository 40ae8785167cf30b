#include "llmprint/core/fingerprint.hpp"

#include <algorithm>
#include <set>
#include <utility>

#include "llmprint/core/error.hpp"

namespace llmprint {

void validate_pair(const TokenPair& pair) {
  if (pair.positive.id == pair.negative.id) {
    throw InvalidArgument("token pair uses the same token id " + std::to_string(pair.positive.id) +
                          " twice");
  }
  if (pair.positive.surface.empty() || pair.negative.surface.empty()) {
    throw InvalidArgument("token pair has an empty surface");
  }
}

TokenSequence FingerprintPrompt::full() const {
  TokenSequence out;
  out.reserve(base_instruction.size() + suffix.size());
  out.insert(out.end(), base_instruction.begin(), base_instruction.end());
  out.insert(out.end(), suffix.begin(), suffix.end());
  return out;
}

FingerprintSet::FingerprintSet(std::vector<FingerprintEntry> entries,
                               std::string base_instruction_text)
    : entries_(std::move(entries)), base_instruction_text_(std::move(base_instruction_text)) {
  if (entries_.empty()) throw InvalidArgument("fingerprint set must contain at least one entry");
  std::set<std::pair<TokenId, TokenId>> seen;
  const auto& first = entries_.front();
  for (std::size_t j = 0; j < entries_.size(); ++j) {
    const auto& e = entries_[j];
    validate_pair(e.pair);
    if (e.reference_bit > 1) {
      throw InvalidArgument("entry " + std::to_string(j) + " has reference bit " +
                            std::to_string(e.reference_bit));
    }
    if (e.prompt.base_instruction != first.prompt.base_instruction) {
      throw InvalidArgument("entry " + std::to_string(j) + " uses a different base instruction");
    }
    if (!(e.meta == first.meta)) {
      throw InvalidArgument("entry " + std::to_string(j) + " has different construction settings");
    }
    if (e.prompt.suffix.size() != first.prompt.suffix.size()) {
      throw InvalidArgument("entry " + std::to_string(j) + " has a different suffix length");
    }
    auto key = std::minmax(e.pair.positive.id, e.pair.negative.id);
    if (!seen.insert(key).second) {
      throw InvalidArgument("token pair (" + e.pair.positive.surface + ", " +
                            e.pair.negative.surface + ") appears twice");
    }
  }
}

BitString FingerprintSet::reference_bits() const {
  std::vector<std::uint8_t> bits;
  bits.reserve(entries_.size());
  for (const auto& e : entries_) bits.push_back(e.reference_bit);
  return BitString(std::move(bits));
}

FingerprintSet FingerprintSet::prefix(std::size_t n) const {
  if (n == 0 || n > entries_.size()) {
    throw InvalidArgument("prefix length " + std::to_string(n) + " outside [1, " +
                          std::to_string(entries_.size()) + "]");
  }
  return FingerprintSet(std::vector<FingerprintEntry>(entries_.begin(), entries_.begin() + n),
                        base_instruction_text_);
}

}  // namespace llmprint
