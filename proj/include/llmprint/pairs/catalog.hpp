#pragma once

#include <memory>
#include <string>
#include <vector>

#include "llmprint/core/vocabulary.hpp"

namespace llmprint::pairs {

struct Category {
  std::string name;
  std::vector<std::string> words;
};

/// Named word lists that token pairs are drawn from.
class CategoryCatalog {
 public:
  /// Throws InvalidArgument on an empty catalog, an empty category, or a
  /// repeated word inside one category.
  explicit CategoryCatalog(std::vector<Category> categories);

  /// The 20 x 20 semantic catalog (animals, fruits, ..., occupations).
  static const CategoryCatalog& standard();

  const std::vector<Category>& categories() const { return categories_; }
  std::size_t size() const { return categories_.size(); }
  /// Distinct words across all categories, in first-appearance order.
  std::vector<std::string> unique_words() const;
  /// Catalog restricted to the named categories.
  CategoryCatalog subset(const std::vector<std::string>& names) const;

 private:
  std::vector<Category> categories_;
};

/// Default instruction template placed before every fingerprint suffix.
inline constexpr const char* kDefaultInstruction = "Randomly output a word from your vocabulary";
/// Placeholder token the suffix is initialized with.
inline constexpr const char* kPlaceholderToken = "x";

/// Desk-scale vocabulary: <bos>, <eos>, <unk>, single letters a-z, the
/// default instruction words, and every catalog word as a single token.
std::shared_ptr<const Vocabulary> make_toy_vocabulary(
    const CategoryCatalog& catalog = CategoryCatalog::standard());

}  // namespace llmprint::pairs
