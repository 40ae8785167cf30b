#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "llmprint/backend/logits.hpp"
#include "llmprint/core/types.hpp"
#include "llmprint/core/vocabulary.hpp"

namespace llmprint {

enum class Capability : unsigned {
  kLogits = 1u << 0,         // full first-token logits
  kTopLogprobs = 1u << 1,    // top-k first-token log-probabilities only
  kSample = 1u << 2,         // sampled first tokens
  kTokenGradient = 1u << 3,  // gradient w.r.t. one-hot prompt tokens
};

class CapabilitySet {
 public:
  constexpr CapabilitySet() = default;
  constexpr CapabilitySet(std::initializer_list<Capability> caps) {
    for (auto c : caps) bits_ |= static_cast<unsigned>(c);
  }
  constexpr bool has(Capability c) const { return (bits_ & static_cast<unsigned>(c)) != 0; }
  std::string to_string() const;

 private:
  unsigned bits_ = 0;
};

struct TopLogprob {
  std::string surface;
  /// Vocabulary id when the surface matches an entry exactly.
  std::optional<TokenId> id;
  double logprob = 0.0;
};

/// Scores single-token substitutions of one fixed prompt. Not thread-safe;
/// each optimizer owns its own instance.
class SubstitutionEvaluator {
 public:
  virtual ~SubstitutionEvaluator() = default;
  /// Logits of the prompt with `position` replaced by `token`.
  virtual LogitVector logits_with(std::size_t position, TokenId token) = 0;
};

/// Uniform query surface over local toy models and remote endpoints.
///
/// Prompts are token ids in `vocabulary()`; a begin-of-sequence marker, when
/// the model uses one, is added by the backend and never appears in prompts.
class ModelBackend {
 public:
  virtual ~ModelBackend() = default;

  virtual CapabilitySet capabilities() const = 0;
  virtual const Vocabulary& vocabulary() const = 0;
  virtual std::string id() const = 0;
  /// Longest prompt accepted, in tokens.
  virtual std::size_t max_prompt_length() const = 0;

  /// Requires kLogits.
  virtual LogitVector first_token_logits(TokenSpan prompt) const;

  /// Top-k first-token log-probabilities in descending order (ties by id).
  /// Defaults to deriving them from full logits.
  virtual std::vector<TopLogprob> first_token_top_logprobs(TokenSpan prompt, std::size_t k) const;

  /// `count` seeded first-token draws. nullopt marks an output that matches
  /// no vocabulary surface (remote backends only). Defaults to sampling from
  /// full logits.
  virtual std::vector<std::optional<TokenId>> sample_first_tokens(TokenSpan prompt,
                                                                  double temperature,
                                                                  std::uint64_t seed,
                                                                  std::size_t count) const;

  /// Vector-Jacobian product of the first-token logits: given dL/dlogits,
  /// returns dL/d(one-hot indicator) for every prompt position from
  /// `first_position` to the end, one row of vocabulary size per position.
  /// Requires kTokenGradient.
  virtual std::vector<std::vector<double>> logit_vjp(TokenSpan prompt, std::size_t first_position,
                                                     std::span<const double> dlogits) const;

  /// Defaults to one full forward pass per substitution. Requires kLogits.
  virtual std::unique_ptr<SubstitutionEvaluator> substitution_evaluator(TokenSpan prompt) const;

 protected:
  void require(Capability c, const char* what) const;
  void check_prompt(TokenSpan prompt) const;
};

/// Logits from a deterministic backend for `prompt`. Throws CapabilityError
/// or InvalidArgument (prompt too long).
LogitVector first_token_logits(const ModelBackend& backend, TokenSpan prompt);

/// One draw from softmax(logits / temperature); temperature 0 is argmax with
/// lowest-id ties. Throws InvalidArgument for negative temperature.
Token sample_first_token(const ModelBackend& backend, TokenSpan prompt, double temperature,
                         std::uint64_t rng_seed);

/// Inverse-CDF draws from a logit vector; shared by local backends.
std::vector<TokenId> sample_from_logits(const LogitVector& logits, double temperature,
                                        std::uint64_t seed, std::size_t count);

/// Stub backend whose logits come from a callback; used for fixtures and
/// hand-constructed distributions.
class FunctionBackend final : public ModelBackend {
 public:
  using LogitFn = std::function<std::vector<double>(TokenSpan)>;

  FunctionBackend(std::shared_ptr<const Vocabulary> vocab, LogitFn fn, std::string id,
                  std::size_t max_prompt_length = 1024);

  CapabilitySet capabilities() const override {
    return {Capability::kLogits, Capability::kTopLogprobs, Capability::kSample};
  }
  const Vocabulary& vocabulary() const override { return *vocab_; }
  std::string id() const override { return id_; }
  std::size_t max_prompt_length() const override { return max_len_; }
  LogitVector first_token_logits(TokenSpan prompt) const override;

 private:
  std::shared_ptr<const Vocabulary> vocab_;
  LogitFn fn_;
  std::string id_;
  std::size_t max_len_;
};

}  // namespace llmprint
