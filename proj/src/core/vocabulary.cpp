#include "llmprint/core/vocabulary.hpp"

#include <algorithm>
#include <sstream>

#include "llmprint/core/error.hpp"

namespace llmprint {

Vocabulary::Vocabulary(std::vector<std::string> surfaces, std::vector<std::string> special)
    : surfaces_(std::move(surfaces)), special_mask_(surfaces_.size(), false) {
  for (std::size_t i = 0; i < surfaces_.size(); ++i) {
    if (surfaces_[i].empty()) {
      throw InvalidArgument("vocabulary surface " + std::to_string(i) + " is empty");
    }
    auto [it, inserted] = index_.emplace(surfaces_[i], static_cast<TokenId>(i));
    if (!inserted) {
      throw InvalidArgument("duplicate vocabulary surface '" + surfaces_[i] + "'");
    }
  }
  for (const auto& s : special) {
    const TokenId id = require(s);
    if (!special_mask_[id]) {
      special_mask_[id] = true;
      special_ids_.push_back(id);
    }
  }
  std::sort(special_ids_.begin(), special_ids_.end());
}

const std::string& Vocabulary::surface(TokenId id) const {
  if (id >= surfaces_.size()) {
    throw InvalidArgument("token id " + std::to_string(id) + " outside vocabulary of size " +
                          std::to_string(surfaces_.size()));
  }
  return surfaces_[id];
}

std::optional<TokenId> Vocabulary::find(std::string_view surface) const {
  auto it = index_.find(std::string(surface));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TokenId Vocabulary::require(std::string_view surface) const {
  if (auto id = find(surface)) return *id;
  throw InvalidArgument("surface '" + std::string(surface) + "' not in vocabulary");
}

bool Vocabulary::is_special(TokenId id) const {
  return id < special_mask_.size() && special_mask_[id];
}

std::vector<TokenId> Vocabulary::ordinary_ids() const {
  std::vector<TokenId> out;
  out.reserve(surfaces_.size());
  for (TokenId id = 0; id < surfaces_.size(); ++id) {
    if (!special_mask_[id]) out.push_back(id);
  }
  return out;
}

TokenSequence Vocabulary::tokenize(std::string_view text) const {
  TokenSequence out;
  std::istringstream in{std::string(text)};
  std::string word;
  const auto unk = find(kUnk);
  while (in >> word) {
    if (auto id = find(word)) {
      out.push_back(*id);
      continue;
    }
    for (char c : word) {
      if (auto id = find(std::string_view(&c, 1))) {
        out.push_back(*id);
      } else if (unk) {
        out.push_back(*unk);
      } else {
        throw InvalidArgument("cannot tokenize character '" + std::string(1, c) + "'");
      }
    }
  }
  return out;
}

std::string Vocabulary::render(TokenSpan ids) const {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i > 0) out += ' ';
    out += surface(ids[i]);
  }
  return out;
}

}  // namespace llmprint
