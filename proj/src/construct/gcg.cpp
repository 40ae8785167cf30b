#include "llmprint/construct/gcg.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "llmprint/core/error.hpp"
#include "llmprint/core/random.hpp"

namespace llmprint::construct {
namespace {

struct Proposal {
  std::size_t position;
  TokenId token;
};

TokenId resolve_init_token(const Vocabulary& vocab, const std::string& surface) {
  const auto id = vocab.find(surface);
  if (!id) throw InvalidArgument("init token '" + surface + "' not in vocabulary");
  if (vocab.is_special(*id)) throw InvalidArgument("init token '" + surface + "' is special");
  return *id;
}

void check_fits(const ModelBackend& backend, std::size_t length) {
  if (length > backend.max_prompt_length()) {
    throw InvalidArgument("fingerprint prompt of " + std::to_string(length) +
                          " tokens overflows the context limit of " +
                          std::to_string(backend.max_prompt_length()));
  }
}

/// Top-k allowed tokens by ascending gradient, ties toward lower ids.
std::vector<std::vector<TokenId>> top_candidates(const std::vector<std::vector<double>>& grads,
                                                 const std::vector<TokenId>& alphabet,
                                                 const TokenSequence& suffix, std::size_t k) {
  std::vector<std::vector<TokenId>> out(grads.size());
  for (std::size_t pos = 0; pos < grads.size(); ++pos) {
    std::vector<TokenId> ids;
    ids.reserve(alphabet.size());
    for (TokenId t : alphabet) {
      if (t != suffix[pos]) ids.push_back(t);
    }
    const std::size_t take = std::min(k, ids.size());
    const auto& g = grads[pos];
    std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(take), ids.end(),
                      [&](TokenId a, TokenId b) {
                        if (g[a] != g[b]) return g[a] < g[b];
                        return a < b;
                      });
    ids.resize(take);
    out[pos] = std::move(ids);
  }
  return out;
}

}  // namespace

ProposalMode parse_proposal_mode(const std::string& text) {
  if (text == "auto") return ProposalMode::kAuto;
  if (text == "gradient") return ProposalMode::kGradient;
  if (text == "random") return ProposalMode::kRandom;
  if (text == "exhaustive") return ProposalMode::kExhaustive;
  throw InvalidArgument("unknown proposal mode '" + text + "'");
}

std::string to_string(ProposalMode mode) {
  switch (mode) {
    case ProposalMode::kAuto: return "auto";
    case ProposalMode::kGradient: return "gradient";
    case ProposalMode::kRandom: return "random";
    case ProposalMode::kExhaustive: return "exhaustive";
  }
  return "auto";
}

void ConstructionConfig::validate() const {
  if (!(alpha >= 0) || !(beta >= 0)) throw InvalidArgument("alpha and beta must be >= 0");
  if (suffix_length == 0) throw InvalidArgument("suffix_length must be >= 1");
  if (candidates_per_position == 0) throw InvalidArgument("candidates_per_position must be >= 1");
  if (batch_size == 0) throw InvalidArgument("batch_size must be >= 1");
  if (init_token.empty()) throw InvalidArgument("init_token must be non-empty");
}

std::vector<TokenId> suffix_alphabet(const Vocabulary& vocab) { return vocab.ordinary_ids(); }

GcgResult gcg_optimize(const ModelBackend& backend, const TokenSequence& base_instruction,
                       const TokenPair& pair, const ConstructionConfig& config) {
  config.validate();
  validate_pair(pair);
  if (!backend.capabilities().has(Capability::kLogits)) {
    throw CapabilityError("fingerprint construction needs logits from '" + backend.id() + "'");
  }
  ProposalMode mode = config.proposals;
  if (mode == ProposalMode::kAuto) {
    mode = backend.capabilities().has(Capability::kTokenGradient) ? ProposalMode::kGradient
                                                                   : ProposalMode::kRandom;
  }
  if (mode == ProposalMode::kGradient && !backend.capabilities().has(Capability::kTokenGradient)) {
    throw CapabilityError("gradient proposals need token gradients from '" + backend.id() + "'");
  }

  const Vocabulary& vocab = backend.vocabulary();
  const LossSpec spec{pair, config.alpha, config.beta};
  const std::vector<TokenId> alphabet = suffix_alphabet(vocab);
  FingerprintPrompt prompt{base_instruction,
                           TokenSequence(config.suffix_length,
                                         resolve_init_token(vocab, config.init_token))};
  check_fits(backend, base_instruction.size() + config.suffix_length);
  const std::size_t offset = prompt.suffix_offset();

  GcgResult result;
  double best = total_loss(backend.first_token_logits(prompt.full()), spec);
  result.trace.initial_loss = best;
  Rng rng(config.seed);

  std::unique_ptr<SubstitutionEvaluator> evaluator;
  std::vector<std::vector<TokenId>> candidates;
  bool stale = true;
  std::size_t since_improvement = 0;
  std::vector<Proposal> proposals;

  for (std::size_t it = 0; it < config.iterations; ++it) {
    if (stale) {
      evaluator = backend.substitution_evaluator(prompt.full());
      if (mode == ProposalMode::kGradient) {
        candidates = top_candidates(suffix_token_gradients(backend, prompt, spec), alphabet,
                                    prompt.suffix, config.candidates_per_position);
      }
      stale = false;
    }

    proposals.clear();
    if (mode == ProposalMode::kExhaustive) {
      for (std::size_t pos = 0; pos < prompt.suffix.size(); ++pos) {
        for (TokenId t : alphabet) {
          if (t != prompt.suffix[pos]) proposals.push_back({pos, t});
        }
      }
    } else {
      std::set<std::pair<std::size_t, TokenId>> seen;
      for (std::size_t b = 0; b < config.batch_size; ++b) {
        const std::size_t pos = uniform_index(rng, prompt.suffix.size());
        TokenId t;
        if (mode == ProposalMode::kGradient) {
          const auto& c = candidates[pos];
          if (c.empty()) continue;
          t = c[uniform_index(rng, c.size())];
        } else {
          t = alphabet[uniform_index(rng, alphabet.size())];
          if (t == prompt.suffix[pos]) continue;
        }
        if (seen.insert({pos, t}).second) proposals.push_back({pos, t});
      }
    }

    double batch_best = std::numeric_limits<double>::infinity();
    std::size_t batch_arg = proposals.size();
    for (std::size_t i = 0; i < proposals.size(); ++i) {
      const double loss =
          total_loss(evaluator->logits_with(offset + proposals[i].position, proposals[i].token), spec);
      if (loss < batch_best) {
        batch_best = loss;
        batch_arg = i;
      }
    }

    bool improved = false;
    if (batch_arg < proposals.size() && batch_best < best) {
      const Proposal& p = proposals[batch_arg];
      result.trace.accepted.push_back({it, p.position, prompt.suffix[p.position], p.token});
      prompt.suffix[p.position] = p.token;
      best = batch_best;
      stale = true;
      improved = true;
    }
    result.trace.best_loss.push_back(best);

    if (improved) {
      since_improvement = 0;
    } else {
      ++since_improvement;
      if (mode == ProposalMode::kExhaustive) break;
      if (config.patience > 0 && since_improvement >= config.patience) break;
    }
  }

  result.suffix = prompt.suffix;
  result.loss = best;
  result.trace.final_suffix = prompt.suffix;
  return result;
}

TokenSequence exhaustive_descent(const ModelBackend& backend, const TokenSequence& base_instruction,
                                 const TokenPair& pair, const ConstructionConfig& config,
                                 const TokenSequence& initial_suffix, const DescentLimits& limits) {
  config.validate();
  validate_pair(pair);
  const Vocabulary& vocab = backend.vocabulary();
  const LossSpec spec{pair, config.alpha, config.beta};
  const std::vector<TokenId> alphabet = suffix_alphabet(vocab);

  TokenSequence suffix = initial_suffix;
  if (suffix.empty()) {
    suffix.assign(config.suffix_length, resolve_init_token(vocab, config.init_token));
  }
  const std::size_t per_pass = suffix.size() * alphabet.size();
  if (per_pass > limits.max_combinations_per_pass) {
    throw InvalidArgument("exhaustive descent budget exceeded: " + std::to_string(per_pass) +
                          " substitutions per pass > " +
                          std::to_string(limits.max_combinations_per_pass));
  }
  check_fits(backend, base_instruction.size() + suffix.size());

  TokenSequence prompt = base_instruction;
  prompt.insert(prompt.end(), suffix.begin(), suffix.end());
  const std::size_t offset = base_instruction.size();
  double current = total_loss(backend.first_token_logits(prompt), spec);

  for (std::size_t pass = 0; pass < limits.max_passes; ++pass) {
    double best = current;
    std::size_t best_pos = 0;
    TokenId best_tok = 0;
    bool found = false;
    for (std::size_t pos = 0; pos < suffix.size(); ++pos) {
      const TokenId keep = prompt[offset + pos];
      for (TokenId t : alphabet) {
        if (t == keep) continue;
        prompt[offset + pos] = t;
        const double loss = total_loss(backend.first_token_logits(prompt), spec);
        if (loss < best) {
          best = loss;
          best_pos = pos;
          best_tok = t;
          found = true;
        }
      }
      prompt[offset + pos] = keep;
    }
    if (!found) return TokenSequence(prompt.begin() + static_cast<std::ptrdiff_t>(offset), prompt.end());
    prompt[offset + best_pos] = best_tok;
    current = best;
  }
  throw InvalidArgument("exhaustive descent did not converge within " +
                        std::to_string(limits.max_passes) + " passes");
}

}  // namespace llmprint::construct
