#include "llmprint/harness/family.hpp"

#include "llmprint/backend/derive.hpp"

namespace llmprint::harness {

std::string to_string(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::kPostTraining: return "post_training";
    case FamilyKind::kQuantization: return "quantization";
    case FamilyKind::kNegative: return "negative";
  }
  return "negative";
}

FamilyKind parse_family_kind(const std::string& text) {
  if (text == "post_training") return FamilyKind::kPostTraining;
  if (text == "quantization") return FamilyKind::kQuantization;
  if (text == "negative") return FamilyKind::kNegative;
  throw InvalidArgument("unknown suspect family '" + text + "'");
}

std::vector<Suspect> make_suspect_family(const ToyLM& base, const FamilySpec& spec) {
  std::vector<Suspect> out;
  for (int bits : spec.bits) {
    auto m = std::make_shared<const ToyLM>(quantize_weights(base, bits));
    out.push_back({m->id(), FamilyKind::kQuantization, true, m});
  }
  for (double sigma : spec.sigmas) {
    for (std::uint64_t seed : spec.perturbation_seeds) {
      auto m = std::make_shared<const ToyLM>(perturb_weights(base, sigma, seed));
      out.push_back({m->id(), FamilyKind::kPostTraining, true, m});
    }
  }
  for (const auto& m : make_independent_models(base.config(), spec.negative_seeds)) {
    out.push_back({m->id(), FamilyKind::kNegative, false, m});
  }
  return out;
}

std::vector<std::shared_ptr<const ToyLM>> make_independent_models(
    const ToyConfig& config, const std::vector<std::uint64_t>& seeds) {
  std::vector<std::shared_ptr<const ToyLM>> out;
  out.reserve(seeds.size());
  for (auto s : seeds) out.push_back(std::make_shared<const ToyLM>(ToyLM::init(config, s)));
  return out;
}

}  // namespace llmprint::harness
