#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "llmprint/core/calibration.hpp"
#include "llmprint/core/fingerprint.hpp"
#include "llmprint/harness/config.hpp"
#include "llmprint/harness/family.hpp"

namespace llmprint::harness {

struct Rates {
  std::size_t positives = 0;
  std::size_t detected_positives = 0;
  std::size_t negatives = 0;
  std::size_t detected_negatives = 0;

  /// 0 when the denominator is 0.
  double tpr() const;
  double fpr() const;
  friend bool operator==(const Rates&, const Rates&) = default;
};

struct SuspectOutcome {
  std::string name;
  FamilyKind kind = FamilyKind::kNegative;
  bool positive = false;
  double accuracy = 0.0;
  double threshold = 0.0;
  bool detected = false;
  /// Non-empty when the suspect could not be queried; it then counts as
  /// not detected.
  std::string error;
};

/// Rates over the post-training positives, the quantization positives and
/// all positives; FPR always comes from the shared negative set.
struct FamilyRates {
  Rates post_training;
  Rates quantization;
  Rates overall;
};

struct ModeResult {
  verify::VerifyConfig config;
  CalibrationModel calibration;
  std::vector<SuspectOutcome> suspects;
  FamilyRates rates;
};

struct SweepPoint {
  std::string axis;  // "n", "alpha", "beta", "T" or "z"
  double value = 0.0;
  verify::Mode mode = verify::Mode::kGrayFull;
  double tau = 0.0;
  FamilyRates rates;
};

struct FingerprintSummary {
  std::size_t count = 0;
  std::size_t failures = 0;
  double mean_final_loss = 0.0;
};

struct DetectionReport {
  nlohmann::json config;
  FingerprintSummary fingerprints;
  std::vector<ModeResult> modes;
  std::vector<SweepPoint> sweeps;
};

/// Aggregates outcomes by ground-truth label. Outcomes are reduced in name
/// order so the result does not depend on evaluation order.
FamilyRates aggregate(std::vector<SuspectOutcome> outcomes);

using Progress = std::function<void(const std::string& message)>;

/// Builds the base, its fingerprints (unless `prebuilt` is given), the
/// suspect family and the validation models; calibrates and verifies once
/// per mode, then evaluates the sweeps. Writes report.{json,csv,md} and
/// fingerprints.json to `output_dir` when set. Deterministic for a fixed
/// config.
DetectionReport run_experiment(const ExperimentConfig& config,
                               const std::optional<FingerprintSet>& prebuilt = std::nullopt,
                               const Progress& progress = {});

/// The base model, fingerprint set and vocabulary run_experiment would use.
struct ExperimentWorld {
  std::shared_ptr<const Vocabulary> vocab;
  ToyConfig architecture;
  std::shared_ptr<const ToyLM> base;
};
ExperimentWorld make_world(const ExperimentConfig& config);
FingerprintSet build_experiment_fingerprints(const ExperimentWorld& world,
                                             const ExperimentConfig& config,
                                             const construct::ConstructionConfig& construction,
                                             std::size_t count, FingerprintSummary* summary);

}  // namespace llmprint::harness
