#include "llmprint/pairs/sampler.hpp"

#include <algorithm>
#include <set>

#include "llmprint/core/random.hpp"

namespace llmprint::pairs {
namespace {

std::optional<TokenId> single_token(const Vocabulary& vocab, const std::string& word) {
  const TokenSequence ids = vocab.tokenize(word);
  if (ids.size() != 1) return std::nullopt;
  if (vocab.is_special(ids.front())) return std::nullopt;
  return ids.front();
}

}  // namespace

PairExhaustion::PairExhaustion(std::size_t requested, std::vector<TokenPair> achieved)
    : Error("could only form " + std::to_string(achieved.size()) + " of " +
            std::to_string(requested) + " unique token pairs"),
      requested_(requested),
      achieved_(std::move(achieved)) {}

std::vector<TokenPair> sample_token_pairs(const CategoryCatalog& catalog, const Vocabulary& vocab,
                                          std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InvalidArgument("requested zero token pairs");
  Rng rng(seed);
  std::vector<TokenPair> out;
  out.reserve(n);
  std::set<std::pair<TokenId, TokenId>> seen;
  const auto& cats = catalog.categories();
  const std::size_t budget = kAttemptsPerPair * n;
  for (std::size_t attempt = 0; attempt < budget && out.size() < n; ++attempt) {
    const Category& c = cats[uniform_index(rng, cats.size())];
    if (c.words.size() < 2) continue;
    const std::size_t i = uniform_index(rng, c.words.size());
    std::size_t j = uniform_index(rng, c.words.size() - 1);
    if (j >= i) ++j;
    const auto pos = single_token(vocab, c.words[i]);
    const auto neg = single_token(vocab, c.words[j]);
    if (!pos || !neg || *pos == *neg) continue;
    if (!seen.insert(std::minmax(*pos, *neg)).second) continue;
    out.push_back(TokenPair{vocab.token(*pos), vocab.token(*neg), c.name});
  }
  if (out.size() < n) throw PairExhaustion(n, std::move(out));
  return out;
}

}  // namespace llmprint::pairs
