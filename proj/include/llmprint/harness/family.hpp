#pragma once

#include <memory>
#include <string>
#include <vector>

#include "llmprint/backend/toy_lm.hpp"
#include "llmprint/harness/config.hpp"

namespace llmprint::harness {

enum class FamilyKind { kPostTraining, kQuantization, kNegative };
std::string to_string(FamilyKind kind);
FamilyKind parse_family_kind(const std::string& text);

struct Suspect {
  std::string name;
  FamilyKind kind = FamilyKind::kNegative;
  /// Ground truth: derived from the base.
  bool positive = false;
  std::shared_ptr<const ToyLM> model;
};

/// Quantized copies (kQuantization), perturbed copies standing in for
/// post-training (kPostTraining), then independent models (kNegative).
std::vector<Suspect> make_suspect_family(const ToyLM& base, const FamilySpec& spec);

/// Independently seeded models with the base's architecture.
std::vector<std::shared_ptr<const ToyLM>> make_independent_models(
    const ToyConfig& config, const std::vector<std::uint64_t>& seeds);

}  // namespace llmprint::harness
