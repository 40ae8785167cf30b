#include "llmprint/core/bitstring.hpp"

#include <algorithm>

#include "llmprint/core/error.hpp"

namespace llmprint {

BitString::BitString(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  for (auto b : bits_) {
    if (b > 1) throw InvalidArgument("bit value " + std::to_string(b) + " is not 0 or 1");
  }
}

BitString::BitString(std::initializer_list<int> bits) {
  bits_.reserve(bits.size());
  for (int b : bits) {
    if (b != 0 && b != 1) throw InvalidArgument("bit value " + std::to_string(b) + " is not 0 or 1");
    bits_.push_back(static_cast<std::uint8_t>(b));
  }
}

BitString BitString::from_string(std::string_view text) {
  std::vector<std::uint8_t> bits;
  bits.reserve(text.size());
  for (char c : text) {
    if (c != '0' && c != '1') throw InvalidArgument("bit string contains '" + std::string(1, c) + "'");
    bits.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  return BitString(std::move(bits));
}

BitString BitString::complement() const {
  std::vector<std::uint8_t> out(bits_.size());
  std::transform(bits_.begin(), bits_.end(), out.begin(),
                 [](std::uint8_t b) { return static_cast<std::uint8_t>(1 - b); });
  return BitString(std::move(out));
}

std::size_t BitString::count_ones() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::string BitString::to_string() const {
  std::string s(bits_.size(), '0');
  for (std::size_t i = 0; i < bits_.size(); ++i) s[i] = static_cast<char>('0' + bits_[i]);
  return s;
}

double bitwise_accuracy(const BitString& reference, const BitString& predicted) {
  if (reference.size() != predicted.size()) {
    throw LengthMismatch(reference.size(), predicted.size());
  }
  if (reference.empty()) throw InvalidArgument("bitwise accuracy of empty bit strings");
  std::size_t matches = 0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    matches += reference[i] == predicted[i] ? 1 : 0;
  }
  return static_cast<double>(matches) / static_cast<double>(reference.size());
}

}  // namespace llmprint
