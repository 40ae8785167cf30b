#include "llmprint/construct/builder.hpp"

#include "llmprint/core/error.hpp"
#include "llmprint/core/parallel.hpp"
#include "llmprint/core/random.hpp"

namespace llmprint::construct {

std::uint8_t preference_bit(const ModelBackend& backend, const FingerprintPrompt& prompt,
                            const TokenPair& pair) {
  const LogitVector logits = backend.first_token_logits(prompt.full());
  return logits[pair.positive.id] >= logits[pair.negative.id] ? 1 : 0;
}

BuildResult build_fingerprints(const ModelBackend& backend, const std::vector<TokenPair>& pairs,
                               const TokenSequence& base_instruction,
                               const ConstructionConfig& config, std::size_t workers) {
  if (pairs.empty()) throw InvalidArgument("no token pairs to build fingerprints for");
  config.validate();

  const ConstructionMeta meta{config.alpha, config.beta, config.iterations, config.seed,
                              backend.id()};
  std::vector<std::optional<FingerprintEntry>> entries(pairs.size());
  std::vector<std::string> errors(pairs.size());
  BuildResult result;
  result.traces.resize(pairs.size());

  parallel_for(pairs.size(), workers, [&](std::size_t j) {
    try {
      ConstructionConfig local = config;
      local.seed = mix_seed(config.seed, j);
      GcgResult r = gcg_optimize(backend, base_instruction, pairs[j], local);
      FingerprintEntry e;
      e.pair = pairs[j];
      e.prompt = FingerprintPrompt{base_instruction, r.suffix};
      e.reference_bit = preference_bit(backend, e.prompt, pairs[j]);
      e.final_loss = r.loss;
      e.meta = meta;
      entries[j] = std::move(e);
      result.traces[j] = std::move(r.trace);
    } catch (const std::exception& ex) {
      errors[j] = ex.what();
    }
  });

  std::vector<FingerprintEntry> ok;
  for (std::size_t j = 0; j < pairs.size(); ++j) {
    if (entries[j]) {
      ok.push_back(std::move(*entries[j]));
    } else {
      result.failures.push_back({j, pairs[j], errors[j]});
    }
  }
  if (!ok.empty()) {
    result.set.emplace(std::move(ok), backend.vocabulary().render(base_instruction));
  }
  return result;
}

}  // namespace llmprint::construct
