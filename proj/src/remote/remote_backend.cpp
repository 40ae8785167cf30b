#include "llmprint/remote/remote_backend.hpp"

#include <set>

namespace llmprint::remote {
namespace {

std::string drop_leading_space(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  return begin == std::string::npos ? std::string() : s.substr(begin);
}

}  // namespace

RemoteBackend::RemoteBackend(EndpointSpec endpoint, std::shared_ptr<const Vocabulary> vocab,
                             const EnvLookup& env)
    : vocab_(std::move(vocab)),
      client_(std::make_unique<CompletionClient>(std::move(endpoint), env)) {
  if (!vocab_) throw InvalidArgument("remote backend needs a vocabulary");
}

std::string RemoteBackend::id() const {
  return "remote:" + client_->endpoint().model + "@" + client_->endpoint().base_url;
}

std::vector<TopLogprob> RemoteBackend::first_token_top_logprobs(TokenSpan prompt,
                                                                std::size_t k) const {
  require(Capability::kTopLogprobs, "top-k log-probabilities");
  check_prompt(prompt);
  const auto listed = remote_topk_logprobs(*client_, vocab_->render(prompt), k);
  std::vector<TopLogprob> out;
  out.reserve(listed.size());
  std::set<TokenId> seen;
  for (const auto& e : listed) {
    TopLogprob t{e.surface, std::nullopt, e.logprob};
    // Only the highest-ranked spelling of a surface maps to its id.
    if (auto id = vocab_->find(drop_leading_space(e.surface)); id && seen.insert(*id).second) {
      t.id = id;
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<std::optional<TokenId>> RemoteBackend::sample_first_tokens(TokenSpan prompt,
                                                                       double temperature,
                                                                       std::uint64_t seed,
                                                                       std::size_t count) const {
  require(Capability::kSample, "sampling");
  check_prompt(prompt);
  auto sampled = remote_sample_texts(*client_, vocab_->render(prompt), count, temperature, seed);
  if (!sampled.errors.empty()) {
    throw RemoteError(0, std::to_string(sampled.errors.size()) + " sampling request(s) failed; first: " +
                             sampled.errors.front());
  }
  std::vector<std::optional<TokenId>> out;
  out.reserve(count);
  for (const auto& text : sampled.texts) out.push_back(vocab_->find(first_word(*text)));
  return out;
}

}  // namespace llmprint::remote
