#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "llmprint/backend/backend.hpp"
#include "llmprint/core/bitstring.hpp"
#include "llmprint/core/calibration.hpp"
#include "llmprint/core/error.hpp"
#include "llmprint/core/fingerprint.hpp"

namespace llmprint::verify {

enum class Mode { kGrayFull, kGrayTopK, kBlackBox };

Mode parse_mode(const std::string& text);
std::string to_string(Mode mode);

/// How a token missing from a top-k list is scored.
enum class AbsentPolicy {
  kLiteralZero,    // log-probability 0
  kResidualMass,   // log of the probability mass the list leaves unreported
};

struct VerifyConfig {
  Mode mode = Mode::kGrayFull;
  std::size_t top_k = 20;
  /// Black-box queries per fingerprint prompt (T).
  std::size_t samples = 100;
  double temperature = 1.0;
  double z = 1.64;
  std::uint64_t seed = 0;
  AbsentPolicy absent = AbsentPolicy::kLiteralZero;
  /// Concurrent per-entry queries.
  std::size_t workers = 1;

  void validate() const;
};

struct EntryCounts {
  std::size_t c_plus = 0;
  std::size_t c_minus = 0;
  std::size_t total = 0;
};
using SampleCounts = std::vector<EntryCounts>;

/// Backend returned an unusable probability list.
class MalformedDistribution : public Error {
 public:
  using Error::Error;
};

/// Failure inside verify(), labelled with the stage it happened in.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& message)
      : Error(stage + ": " + message), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

/// b_j = 1[z+ >= z-] on the base model. Requires kLogits.
BitString reference_bits(const ModelBackend& backend, const FingerprintSet& set);

/// Gray-box bit from a top-k list: reported log-probability when the token
/// is listed, otherwise the `absent` policy's value; ties give 1.
std::uint8_t topk_bit(const std::vector<TopLogprob>& top, const TokenPair& pair,
                      AbsentPolicy absent);

/// Full-distribution (kGrayFull) or top-k (kGrayTopK) bits.
BitString graybox_bits(const ModelBackend& backend, const FingerprintSet& set,
                       const VerifyConfig& config);

/// T seeded draws per prompt; bit = 1[c+ >= c-], so 0-0 gives 1.
std::pair<BitString, SampleCounts> blackbox_bits(const ModelBackend& backend,
                                                 const FingerprintSet& set,
                                                 const VerifyConfig& config);

struct SuspectBits {
  BitString bits;
  std::optional<SampleCounts> counts;
};

/// Bits in the configured mode.
SuspectBits suspect_bits(const ModelBackend& backend, const FingerprintSet& set,
                         const VerifyConfig& config);

/// Accuracy of every validation model against `reference`, then
/// mu, sigma (k-1 divisor) and tau = mu + z sigma. Requires k >= 2.
CalibrationModel calibrate(const BitString& reference, const FingerprintSet& set,
                           const std::vector<const ModelBackend*>& validation,
                           const VerifyConfig& config);
CalibrationModel calibrate(const ModelBackend& base, const FingerprintSet& set,
                           const std::vector<const ModelBackend*>& validation,
                           const VerifyConfig& config);

struct VerificationReport {
  std::string suspect_id;
  Mode mode = Mode::kGrayFull;
  BitString reference;
  BitString predicted;
  std::optional<SampleCounts> counts;
  double accuracy = 0.0;
  CalibrationModel calibration;
  Verdict verdict;
};

/// Reference bits, suspect bits, accuracy and verdict against an existing
/// calibration. Throws StageError when the calibration was measured in a
/// different mode.
VerificationReport verify_with(const BitString& reference, const ModelBackend& suspect,
                               const FingerprintSet& set, const CalibrationModel& calibration,
                               const VerifyConfig& config);

/// Full pipeline: reference bits from `base`, calibration over
/// `validation`, suspect bits, accuracy, verdict.
VerificationReport verify(const ModelBackend& base, const ModelBackend& suspect,
                          const FingerprintSet& set,
                          const std::vector<const ModelBackend*>& validation,
                          const VerifyConfig& config);

}  // namespace llmprint::verify
