#include "llmprint/harness/config.hpp"

#include <algorithm>
#include <set>

#include "llmprint/pairs/catalog.hpp"

namespace llmprint::harness {
namespace {

using nlohmann::json;

void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* where) {
  if (!j.is_object()) throw InvalidArgument(std::string(where) + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) ==
        allowed.end()) {
      throw InvalidArgument("unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

std::string absent_name(verify::AbsentPolicy p) {
  return p == verify::AbsentPolicy::kLiteralZero ? "literal" : "residual";
}

verify::AbsentPolicy parse_absent(const std::string& s) {
  if (s == "literal") return verify::AbsentPolicy::kLiteralZero;
  if (s == "residual") return verify::AbsentPolicy::kResidualMass;
  throw InvalidArgument("absent policy must be 'literal' or 'residual', got '" + s + "'");
}

}  // namespace

ToyConfig Architecture::resolve(const Vocabulary& vocab) const {
  ToyConfig c = toy_config_for(vocab);
  c.hidden_width = hidden_width;
  c.layers = layers;
  c.context_length = context_length;
  c.ffn_width = ffn_width;
  c.validate();
  return c;
}

construct::ConstructionConfig desk_construction() {
  construct::ConstructionConfig c;
  c.iterations = 50;
  c.batch_size = 32;
  c.seed = 11;
  return c;
}

std::vector<verify::VerifyConfig> default_modes() {
  std::vector<verify::VerifyConfig> modes(3);
  modes[0].mode = verify::Mode::kGrayFull;
  modes[1].mode = verify::Mode::kGrayTopK;
  modes[2].mode = verify::Mode::kBlackBox;
  for (auto& m : modes) m.seed = 23;
  return modes;
}

void ExperimentConfig::validate() const {
  if (n == 0) throw InvalidArgument("experiment needs n >= 1");
  if (validation_seeds.size() < 2) throw InvalidArgument("calibration needs at least 2 validation seeds");
  if (modes.empty()) throw InvalidArgument("experiment needs at least one verification mode");
  construction.validate();
  for (const auto& m : modes) m.validate();
  for (int b : family.bits) {
    if (b < 2) throw InvalidArgument("quantization bit width must be >= 2");
  }
  for (double s : family.sigmas) {
    if (!(s >= 0.0)) throw InvalidArgument("perturbation sigma must be >= 0");
  }
  if (!family.sigmas.empty() && family.perturbation_seeds.empty()) {
    throw InvalidArgument("perturbation sigmas given without perturbation seeds");
  }
  std::set<std::uint64_t> negatives(family.negative_seeds.begin(), family.negative_seeds.end());
  if (negatives.size() != family.negative_seeds.size()) throw InvalidArgument("repeated negative seed");
  std::set<std::uint64_t> validation(validation_seeds.begin(), validation_seeds.end());
  if (validation.size() != validation_seeds.size()) throw InvalidArgument("repeated validation seed");
  for (auto s : validation_seeds) {
    if (negatives.count(s)) {
      throw InvalidArgument("validation seed " + std::to_string(s) + " is also a negative suspect");
    }
    if (s == base_seed) throw InvalidArgument("validation seed equals the base seed");
  }
  if (negatives.count(base_seed)) throw InvalidArgument("negative seed equals the base seed");
  for (auto v : sweeps.n) {
    if (v == 0) throw InvalidArgument("n sweep values must be >= 1");
  }
  for (auto v : sweeps.samples) {
    if (v == 0) throw InvalidArgument("T sweep values must be >= 1");
  }
}

std::size_t ExperimentConfig::constructed_count() const {
  std::size_t count = n;
  for (auto v : sweeps.n) count = std::max(count, v);
  return count;
}

std::string ExperimentConfig::resolved_instruction() const {
  return instruction.empty() ? std::string(pairs::kDefaultInstruction) : instruction;
}

json to_json(const construct::ConstructionConfig& c) {
  return {{"alpha", c.alpha},
          {"beta", c.beta},
          {"suffix_length", c.suffix_length},
          {"iterations", c.iterations},
          {"candidates_per_position", c.candidates_per_position},
          {"batch_size", c.batch_size},
          {"init_token", c.init_token},
          {"seed", c.seed},
          {"proposals", construct::to_string(c.proposals)},
          {"patience", c.patience}};
}

construct::ConstructionConfig construction_from_json(const json& j, construct::ConstructionConfig c) {
  check_keys(j,
             {"alpha", "beta", "suffix_length", "iterations", "candidates_per_position",
              "batch_size", "init_token", "seed", "proposals", "patience"},
             "construction");
  read(j, "alpha", c.alpha);
  read(j, "beta", c.beta);
  read(j, "suffix_length", c.suffix_length);
  read(j, "iterations", c.iterations);
  read(j, "candidates_per_position", c.candidates_per_position);
  read(j, "batch_size", c.batch_size);
  read(j, "init_token", c.init_token);
  read(j, "seed", c.seed);
  if (j.contains("proposals")) c.proposals = construct::parse_proposal_mode(j.at("proposals").get<std::string>());
  read(j, "patience", c.patience);
  return c;
}

json to_json(const verify::VerifyConfig& c) {
  return {{"mode", verify::to_string(c.mode)},
          {"top_k", c.top_k},
          {"T", c.samples},
          {"temperature", c.temperature},
          {"z", c.z},
          {"seed", c.seed},
          {"absent_logprob_floor", absent_name(c.absent)},
          {"workers", c.workers}};
}

verify::VerifyConfig verify_config_from_json(const json& j, verify::VerifyConfig c) {
  check_keys(j, {"mode", "top_k", "T", "temperature", "z", "seed", "absent_logprob_floor", "workers"},
             "verify config");
  if (j.contains("mode")) c.mode = verify::parse_mode(j.at("mode").get<std::string>());
  read(j, "top_k", c.top_k);
  read(j, "T", c.samples);
  read(j, "temperature", c.temperature);
  read(j, "z", c.z);
  read(j, "seed", c.seed);
  if (j.contains("absent_logprob_floor")) c.absent = parse_absent(j.at("absent_logprob_floor").get<std::string>());
  read(j, "workers", c.workers);
  return c;
}

json to_json(const ExperimentConfig& c) {
  json modes = json::array();
  for (const auto& m : c.modes) modes.push_back(to_json(m));
  return {
      {"base_seed", c.base_seed},
      {"architecture",
       {{"hidden_width", c.architecture.hidden_width},
        {"layers", c.architecture.layers},
        {"context_length", c.architecture.context_length},
        {"ffn_width", c.architecture.ffn_width}}},
      {"family",
       {{"bits", c.family.bits},
        {"sigmas", c.family.sigmas},
        {"perturbation_seeds", c.family.perturbation_seeds},
        {"negative_seeds", c.family.negative_seeds}}},
      {"validation_seeds", c.validation_seeds},
      {"n", c.n},
      {"pair_seed", c.pair_seed},
      {"instruction", c.resolved_instruction()},
      {"construction", to_json(c.construction)},
      {"modes", modes},
      {"sweeps",
       {{"n", c.sweeps.n},
        {"alpha", c.sweeps.alpha},
        {"beta", c.sweeps.beta},
        {"T", c.sweeps.samples},
        {"z", c.sweeps.z}}},
      {"workers", c.workers},
      {"output_dir", c.output_dir},
  };
}

ExperimentConfig experiment_config_from_json(const json& j) {
  ExperimentConfig c;
  try {
    check_keys(j,
               {"base_seed", "architecture", "family", "validation_seeds", "n", "pair_seed",
                "instruction", "construction", "modes", "sweeps", "workers", "output_dir"},
               "experiment config");
    read(j, "base_seed", c.base_seed);
    if (j.contains("architecture")) {
      const auto& a = j.at("architecture");
      check_keys(a, {"hidden_width", "layers", "context_length", "ffn_width"}, "architecture");
      read(a, "hidden_width", c.architecture.hidden_width);
      read(a, "layers", c.architecture.layers);
      read(a, "context_length", c.architecture.context_length);
      read(a, "ffn_width", c.architecture.ffn_width);
    }
    if (j.contains("family")) {
      const auto& f = j.at("family");
      check_keys(f, {"bits", "sigmas", "perturbation_seeds", "negative_seeds"}, "family");
      read(f, "bits", c.family.bits);
      read(f, "sigmas", c.family.sigmas);
      read(f, "perturbation_seeds", c.family.perturbation_seeds);
      read(f, "negative_seeds", c.family.negative_seeds);
    }
    read(j, "validation_seeds", c.validation_seeds);
    read(j, "n", c.n);
    read(j, "pair_seed", c.pair_seed);
    read(j, "instruction", c.instruction);
    if (j.contains("construction")) c.construction = construction_from_json(j.at("construction"), c.construction);
    if (j.contains("modes")) {
      c.modes.clear();
      for (const auto& m : j.at("modes")) c.modes.push_back(verify_config_from_json(m));
    }
    if (j.contains("sweeps")) {
      const auto& s = j.at("sweeps");
      check_keys(s, {"n", "alpha", "beta", "T", "z"}, "sweeps");
      read(s, "n", c.sweeps.n);
      read(s, "alpha", c.sweeps.alpha);
      read(s, "beta", c.sweeps.beta);
      read(s, "T", c.sweeps.samples);
      read(s, "z", c.sweeps.z);
    }
    read(j, "workers", c.workers);
    read(j, "output_dir", c.output_dir);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace llmprint::harness
