#pragma once

#include <memory>

#include "llmprint/backend/backend.hpp"
#include "llmprint/remote/client.hpp"

namespace llmprint::remote {

/// Completion endpoint as a ModelBackend. Prompts are rendered to text by
/// joining token surfaces with single spaces; returned text is mapped back
/// to `vocab` by exact surface match after dropping leading whitespace.
/// Offers top-k log-probabilities and sampling, never full logits.
class RemoteBackend final : public ModelBackend {
 public:
  RemoteBackend(EndpointSpec endpoint, std::shared_ptr<const Vocabulary> vocab,
                const EnvLookup& env = process_env);

  CapabilitySet capabilities() const override {
    return {Capability::kTopLogprobs, Capability::kSample};
  }
  const Vocabulary& vocabulary() const override { return *vocab_; }
  std::string id() const override;
  std::size_t max_prompt_length() const override { return kMaxPromptTokens; }

  std::vector<TopLogprob> first_token_top_logprobs(TokenSpan prompt, std::size_t k) const override;
  /// Throws RemoteError when any sampling request fails.
  std::vector<std::optional<TokenId>> sample_first_tokens(TokenSpan prompt, double temperature,
                                                          std::uint64_t seed,
                                                          std::size_t count) const override;

  CompletionClient& client() const { return *client_; }

  static constexpr std::size_t kMaxPromptTokens = 1u << 16;

 private:
  std::shared_ptr<const Vocabulary> vocab_;
  std::unique_ptr<CompletionClient> client_;
};

}  // namespace llmprint::remote
