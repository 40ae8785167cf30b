#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace llmprint {

/// Explicit 0/1 sequence. Every stored element is 0 or 1.
class BitString {
 public:
  BitString() = default;
  explicit BitString(std::vector<std::uint8_t> bits);
  BitString(std::initializer_list<int> bits);

  /// Parses "1010"-style text.
  static BitString from_string(std::string_view text);

  std::size_t size() const { return bits_.size(); }
  bool empty() const { return bits_.empty(); }
  std::uint8_t operator[](std::size_t i) const { return bits_[i]; }
  std::span<const std::uint8_t> bits() const { return bits_; }

  BitString complement() const;
  std::size_t count_ones() const;
  std::string to_string() const;

  friend bool operator==(const BitString&, const BitString&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

/// Fraction of positions where the two strings agree.
/// Throws LengthMismatch on unequal lengths and InvalidArgument when empty.
double bitwise_accuracy(const BitString& reference, const BitString& predicted);

}  // namespace llmprint
