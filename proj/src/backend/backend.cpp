#include "llmprint/backend/backend.hpp"

#include <algorithm>
#include <numeric>

#include "llmprint/core/error.hpp"
#include "llmprint/core/random.hpp"

namespace llmprint {

std::string CapabilitySet::to_string() const {
  std::string out;
  auto add = [&](Capability c, const char* name) {
    if (!has(c)) return;
    if (!out.empty()) out += ",";
    out += name;
  };
  add(Capability::kLogits, "logits");
  add(Capability::kTopLogprobs, "top_logprobs");
  add(Capability::kSample, "sample");
  add(Capability::kTokenGradient, "token_gradient");
  return out;
}

void ModelBackend::require(Capability c, const char* what) const {
  if (!capabilities().has(c)) {
    throw CapabilityError("backend '" + id() + "' cannot serve " + what + " (capabilities: " +
                          capabilities().to_string() + ")");
  }
}

void ModelBackend::check_prompt(TokenSpan prompt) const {
  if (prompt.size() > max_prompt_length()) {
    throw InvalidArgument("prompt of " + std::to_string(prompt.size()) +
                          " tokens exceeds the backend limit of " +
                          std::to_string(max_prompt_length()));
  }
  const std::size_t v = vocabulary().size();
  for (TokenId t : prompt) {
    if (t >= v) throw InvalidArgument("prompt token id " + std::to_string(t) + " outside vocabulary");
  }
}

LogitVector ModelBackend::first_token_logits(TokenSpan) const {
  require(Capability::kLogits, "logits");
  throw CapabilityError("backend '" + id() + "' advertises logits but does not implement them");
}

std::vector<TopLogprob> ModelBackend::first_token_top_logprobs(TokenSpan prompt,
                                                               std::size_t k) const {
  require(Capability::kLogits, "top-k log-probabilities");
  const auto logprobs = first_token_logits(prompt).log_softmax();
  std::vector<TokenId> order(logprobs.size());
  std::iota(order.begin(), order.end(), TokenId{0});
  k = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](TokenId a, TokenId b) {
                      if (logprobs[a] != logprobs[b]) return logprobs[a] > logprobs[b];
                      return a < b;
                    });
  std::vector<TopLogprob> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    out.push_back({vocabulary().surface(order[i]), order[i], logprobs[order[i]]});
  }
  return out;
}

std::vector<std::optional<TokenId>> ModelBackend::sample_first_tokens(TokenSpan prompt,
                                                                      double temperature,
                                                                      std::uint64_t seed,
                                                                      std::size_t count) const {
  require(Capability::kSample, "samples");
  const auto draws = sample_from_logits(first_token_logits(prompt), temperature, seed, count);
  return {draws.begin(), draws.end()};
}

std::vector<std::vector<double>> ModelBackend::logit_vjp(TokenSpan, std::size_t,
                                                         std::span<const double>) const {
  require(Capability::kTokenGradient, "token gradients");
  throw CapabilityError("backend '" + id() + "' advertises gradients but does not implement them");
}

namespace {

class FullPassEvaluator final : public SubstitutionEvaluator {
 public:
  FullPassEvaluator(const ModelBackend& backend, TokenSpan prompt)
      : backend_(backend), prompt_(prompt.begin(), prompt.end()) {}

  LogitVector logits_with(std::size_t position, TokenId token) override {
    if (position >= prompt_.size()) throw InvalidArgument("substitution position outside prompt");
    TokenSequence p = prompt_;
    p[position] = token;
    return backend_.first_token_logits(p);
  }

 private:
  const ModelBackend& backend_;
  TokenSequence prompt_;
};

}  // namespace

std::unique_ptr<SubstitutionEvaluator> ModelBackend::substitution_evaluator(TokenSpan prompt) const {
  require(Capability::kLogits, "logits");
  check_prompt(prompt);
  return std::make_unique<FullPassEvaluator>(*this, prompt);
}

LogitVector first_token_logits(const ModelBackend& backend, TokenSpan prompt) {
  return backend.first_token_logits(prompt);
}

std::vector<TokenId> sample_from_logits(const LogitVector& logits, double temperature,
                                        std::uint64_t seed, std::size_t count) {
  if (!(temperature >= 0.0)) throw InvalidArgument("sampling temperature must be >= 0");
  if (temperature == 0.0) return std::vector<TokenId>(count, logits.argmax());
  const auto probs = logits.softmax(temperature);
  std::vector<double> cdf(probs.size());
  std::partial_sum(probs.begin(), probs.end(), cdf.begin());
  Rng rng(seed);
  std::vector<TokenId> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double u = unit_uniform(rng) * cdf.back();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    out.push_back(static_cast<TokenId>(it - cdf.begin()));
  }
  return out;
}

Token sample_first_token(const ModelBackend& backend, TokenSpan prompt, double temperature,
                         std::uint64_t rng_seed) {
  if (!(temperature >= 0.0)) throw InvalidArgument("sampling temperature must be >= 0");
  const auto draws = backend.sample_first_tokens(prompt, temperature, rng_seed, 1);
  if (draws.empty() || !draws.front()) {
    throw Error("backend '" + backend.id() + "' produced a token outside its vocabulary");
  }
  return backend.vocabulary().token(*draws.front());
}

FunctionBackend::FunctionBackend(std::shared_ptr<const Vocabulary> vocab, LogitFn fn,
                                 std::string id, std::size_t max_prompt_length)
    : vocab_(std::move(vocab)), fn_(std::move(fn)), id_(std::move(id)), max_len_(max_prompt_length) {
  if (!vocab_) throw InvalidArgument("function backend needs a vocabulary");
}

LogitVector FunctionBackend::first_token_logits(TokenSpan prompt) const {
  check_prompt(prompt);
  LogitVector out(fn_(prompt));
  if (out.size() != vocab_->size()) throw LengthMismatch(vocab_->size(), out.size());
  return out;
}

}  // namespace llmprint
