#include "llmprint/verify/verify.hpp"

#include <cmath>
#include <set>

#include "llmprint/core/parallel.hpp"
#include "llmprint/core/random.hpp"

namespace llmprint::verify {
namespace {

constexpr double kLogprobSlack = 1e-9;
constexpr double kMassSlack = 1e-6;

std::vector<std::uint8_t> per_entry(const FingerprintSet& set, std::size_t workers,
                                    const std::function<std::uint8_t(std::size_t)>& fn) {
  std::vector<std::uint8_t> bits(set.size());
  parallel_for(set.size(), workers, [&](std::size_t j) { bits[j] = fn(j); });
  return bits;
}

template <typename F>
auto staged(const char* stage, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

}  // namespace

Mode parse_mode(const std::string& text) {
  if (text == "grayfull") return Mode::kGrayFull;
  if (text == "graytopk") return Mode::kGrayTopK;
  if (text == "blackbox") return Mode::kBlackBox;
  throw InvalidArgument("unknown verification mode '" + text + "'");
}

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::kGrayFull: return "grayfull";
    case Mode::kGrayTopK: return "graytopk";
    case Mode::kBlackBox: return "blackbox";
  }
  return "grayfull";
}

void VerifyConfig::validate() const {
  if (samples == 0) throw InvalidArgument("black-box query count T must be >= 1");
  if (top_k == 0) throw InvalidArgument("top_k must be >= 1");
  if (!(temperature >= 0.0)) throw InvalidArgument("temperature must be >= 0");
  if (!std::isfinite(z)) throw InvalidArgument("z must be finite");
}

BitString reference_bits(const ModelBackend& backend, const FingerprintSet& set) {
  if (!backend.capabilities().has(Capability::kLogits)) {
    throw CapabilityError("reference bits need logits from '" + backend.id() + "'");
  }
  std::vector<std::uint8_t> bits(set.size());
  for (std::size_t j = 0; j < set.size(); ++j) {
    const auto& e = set[j];
    const LogitVector z = backend.first_token_logits(e.prompt.full());
    bits[j] = z[e.pair.positive.id] >= z[e.pair.negative.id] ? 1 : 0;
  }
  return BitString(std::move(bits));
}

std::uint8_t topk_bit(const std::vector<TopLogprob>& top, const TokenPair& pair,
                      AbsentPolicy absent) {
  double mass = 0.0;
  std::set<std::string> surfaces;
  std::optional<double> lp_plus;
  std::optional<double> lp_minus;
  for (const auto& t : top) {
    if (!std::isfinite(t.logprob) && t.logprob != -std::numeric_limits<double>::infinity()) {
      throw MalformedDistribution("top-k entry '" + t.surface + "' has a non-finite log-probability");
    }
    if (t.logprob > kLogprobSlack) {
      throw MalformedDistribution("top-k entry '" + t.surface + "' has log-probability > 0");
    }
    if (!surfaces.insert(t.surface).second) {
      throw MalformedDistribution("top-k list repeats '" + t.surface + "'");
    }
    mass += std::exp(t.logprob);
    const bool is_plus = t.id ? *t.id == pair.positive.id : t.surface == pair.positive.surface;
    const bool is_minus = t.id ? *t.id == pair.negative.id : t.surface == pair.negative.surface;
    if (is_plus) lp_plus = t.logprob;
    if (is_minus) lp_minus = t.logprob;
  }
  if (mass > 1.0 + kMassSlack) throw MalformedDistribution("top-k probabilities sum above 1");

  double fallback = 0.0;
  if (absent == AbsentPolicy::kResidualMass) {
    fallback = std::log(std::max(0.0, 1.0 - mass));
  }
  const double plus = lp_plus.value_or(fallback);
  const double minus = lp_minus.value_or(fallback);
  return plus >= minus ? 1 : 0;
}

BitString graybox_bits(const ModelBackend& backend, const FingerprintSet& set,
                       const VerifyConfig& config) {
  config.validate();
  if (config.mode == Mode::kGrayFull) {
    if (!backend.capabilities().has(Capability::kLogits)) {
      throw CapabilityError("full-distribution gray-box mode needs logits from '" + backend.id() +
                            "'");
    }
    return BitString(per_entry(set, config.workers, [&](std::size_t j) -> std::uint8_t {
      const auto& e = set[j];
      const auto logprobs = backend.first_token_logits(e.prompt.full()).log_softmax();
      return logprobs[e.pair.positive.id] >= logprobs[e.pair.negative.id] ? 1 : 0;
    }));
  }
  if (config.mode != Mode::kGrayTopK) throw InvalidArgument("graybox_bits called in black-box mode");
  if (!backend.capabilities().has(Capability::kTopLogprobs) &&
      !backend.capabilities().has(Capability::kLogits)) {
    throw CapabilityError("top-k gray-box mode needs log-probabilities from '" + backend.id() + "'");
  }
  return BitString(per_entry(set, config.workers, [&](std::size_t j) {
    const auto& e = set[j];
    return topk_bit(backend.first_token_top_logprobs(e.prompt.full(), config.top_k), e.pair,
                    config.absent);
  }));
}

std::pair<BitString, SampleCounts> blackbox_bits(const ModelBackend& backend,
                                                 const FingerprintSet& set,
                                                 const VerifyConfig& config) {
  config.validate();
  if (!backend.capabilities().has(Capability::kSample)) {
    throw CapabilityError("black-box mode needs samples from '" + backend.id() + "'");
  }
  SampleCounts counts(set.size());
  auto bits = per_entry(set, config.workers, [&](std::size_t j) -> std::uint8_t {
    const auto& e = set[j];
    const auto draws = backend.sample_first_tokens(e.prompt.full(), config.temperature,
                                                   mix_seed(config.seed, j), config.samples);
    EntryCounts c;
    c.total = config.samples;
    for (const auto& d : draws) {
      if (!d) continue;
      if (*d == e.pair.positive.id) ++c.c_plus;
      if (*d == e.pair.negative.id) ++c.c_minus;
    }
    counts[j] = c;
    return c.c_plus >= c.c_minus ? 1 : 0;
  });
  return {BitString(std::move(bits)), std::move(counts)};
}

SuspectBits suspect_bits(const ModelBackend& backend, const FingerprintSet& set,
                         const VerifyConfig& config) {
  if (config.mode == Mode::kBlackBox) {
    auto [bits, counts] = blackbox_bits(backend, set, config);
    return {std::move(bits), std::move(counts)};
  }
  return {graybox_bits(backend, set, config), std::nullopt};
}

CalibrationModel calibrate(const BitString& reference, const FingerprintSet& set,
                           const std::vector<const ModelBackend*>& validation,
                           const VerifyConfig& config) {
  config.validate();
  if (validation.size() < 2) {
    throw InvalidArgument("calibration needs at least 2 validation models, got " +
                          std::to_string(validation.size()));
  }
  std::vector<double> accuracies(validation.size());
  for (std::size_t i = 0; i < validation.size(); ++i) {
    if (validation[i] == nullptr) throw InvalidArgument("null validation backend");
    accuracies[i] = bitwise_accuracy(reference, suspect_bits(*validation[i], set, config).bits);
  }
  return CalibrationModel::fit(std::move(accuracies), config.z, to_string(config.mode));
}

CalibrationModel calibrate(const ModelBackend& base, const FingerprintSet& set,
                           const std::vector<const ModelBackend*>& validation,
                           const VerifyConfig& config) {
  return calibrate(reference_bits(base, set), set, validation, config);
}

VerificationReport verify_with(const BitString& reference, const ModelBackend& suspect,
                               const FingerprintSet& set, const CalibrationModel& calibration,
                               const VerifyConfig& config) {
  if (!calibration.mode().empty() && calibration.mode() != to_string(config.mode)) {
    throw StageError("calibration", "threshold was calibrated in mode '" + calibration.mode() +
                                        "' but verification runs in '" + to_string(config.mode) +
                                        "'");
  }
  VerificationReport report{suspect.id(), config.mode, reference, {}, std::nullopt, 0.0,
                            calibration, {}};
  auto bits = staged("suspect bits", [&] { return suspect_bits(suspect, set, config); });
  report.predicted = std::move(bits.bits);
  report.counts = std::move(bits.counts);
  report.accuracy = staged("accuracy", [&] { return bitwise_accuracy(reference, report.predicted); });
  report.verdict = decide(report.accuracy, calibration);
  return report;
}

VerificationReport verify(const ModelBackend& base, const ModelBackend& suspect,
                          const FingerprintSet& set,
                          const std::vector<const ModelBackend*>& validation,
                          const VerifyConfig& config) {
  const BitString reference = staged("reference bits", [&] { return reference_bits(base, set); });
  const CalibrationModel calibration =
      staged("calibration", [&] { return calibrate(reference, set, validation, config); });
  return verify_with(reference, suspect, set, calibration, config);
}

}  // namespace llmprint::verify
