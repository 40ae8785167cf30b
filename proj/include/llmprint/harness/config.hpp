#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "llmprint/backend/toy_lm.hpp"
#include "llmprint/construct/gcg.hpp"
#include "llmprint/verify/verify.hpp"

namespace llmprint::harness {

/// Toy architecture shared by the base, its derivatives and every
/// independently seeded model.
struct Architecture {
  std::size_t hidden_width = 48;
  std::size_t layers = 2;
  std::size_t context_length = 32;
  std::size_t ffn_width = 0;

  ToyConfig resolve(const Vocabulary& vocab) const;
};

/// Positives: one quantized copy per bit width and one perturbed copy per
/// (sigma, seed). Negatives: one independently initialized model per seed.
struct FamilySpec {
  std::vector<int> bits = {4, 5, 6, 7, 8};
  std::vector<double> sigmas = {0.005, 0.01, 0.02};
  std::vector<std::uint64_t> perturbation_seeds = {1, 2, 3, 4, 5};
  std::vector<std::uint64_t> negative_seeds = {1001, 1002, 1003, 1004, 1005, 1006, 1007,
                                               1008, 1009, 1010, 1011, 1012, 1013, 1014,
                                               1015, 1016, 1017, 1018, 1019, 1020};
};

/// Extra evaluation points. n and z reuse the main construction; T applies
/// to black-box modes; alpha and beta rebuild the fingerprints.
struct SweepSpec {
  std::vector<std::size_t> n;
  std::vector<double> alpha;
  std::vector<double> beta;
  std::vector<std::size_t> samples;
  std::vector<double> z;

  bool empty() const {
    return n.empty() && alpha.empty() && beta.empty() && samples.empty() && z.empty();
  }
};

/// Construction settings sized for a laptop run over a few hundred pairs.
construct::ConstructionConfig desk_construction();

/// grayfull, graytopk (k = 20) and blackbox (T = 100) with z = 1.64.
std::vector<verify::VerifyConfig> default_modes();

struct ExperimentConfig {
  std::uint64_t base_seed = 1;
  Architecture architecture;
  FamilySpec family;
  std::vector<std::uint64_t> validation_seeds = {2001, 2002, 2003, 2004, 2005, 2006, 2007,
                                                 2008, 2009, 2010, 2011, 2012, 2013};
  std::size_t n = 300;
  std::uint64_t pair_seed = 7;
  std::string instruction;  // empty selects the default instruction
  construct::ConstructionConfig construction = desk_construction();
  std::vector<verify::VerifyConfig> modes = default_modes();
  SweepSpec sweeps;
  /// 0 uses every hardware thread.
  std::size_t workers = 0;
  /// Reports and the fingerprint set are written here when non-empty.
  std::string output_dir;

  /// Throws InvalidArgument, e.g. when validation seeds overlap the
  /// negative family or the base seed.
  void validate() const;
  /// Fingerprints needed by the main run and the n sweep.
  std::size_t constructed_count() const;
  std::string resolved_instruction() const;
};

nlohmann::json to_json(const construct::ConstructionConfig& c);
construct::ConstructionConfig construction_from_json(const nlohmann::json& j,
                                                     construct::ConstructionConfig base = {});
nlohmann::json to_json(const verify::VerifyConfig& c);
verify::VerifyConfig verify_config_from_json(const nlohmann::json& j,
                                             verify::VerifyConfig base = {});

/// Every field, defaults included.
nlohmann::json to_json(const ExperimentConfig& c);
/// Missing keys keep their defaults; unknown keys are errors.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);

}  // namespace llmprint::harness
