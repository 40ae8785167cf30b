#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace llmprint {

/// Gaussian model of negative-suspect accuracies and the derived threshold.
///
/// `tau == mu + z * sigma` holds exactly (same expression, same rounding);
/// sigma uses the unbiased k-1 divisor.
class CalibrationModel {
 public:
  /// Fits mu and sigma to at least two validation accuracies.
  static CalibrationModel fit(std::vector<double> validation_accuracies, double z,
                              std::string mode = {});

  /// Reconstructs a stored model; checks every invariant including tau.
  static CalibrationModel restore(double mu, double sigma, std::size_t k, double z, double tau,
                                  std::vector<double> validation_accuracies, std::string mode);

  double mu() const { return mu_; }
  double sigma() const { return sigma_; }
  std::size_t k() const { return k_; }
  double z() const { return z_; }
  double tau() const { return tau_; }
  const std::vector<double>& validation_accuracies() const { return accuracies_; }
  /// Verification mode the accuracies were measured in; empty when unknown.
  const std::string& mode() const { return mode_; }

  friend bool operator==(const CalibrationModel&, const CalibrationModel&) = default;

 private:
  CalibrationModel() = default;

  double mu_ = 0.0;
  double sigma_ = 0.0;
  std::size_t k_ = 0;
  double z_ = 0.0;
  double tau_ = 0.0;
  std::vector<double> accuracies_;
  std::string mode_;
};

enum class Decision { kNegative, kPositive };

struct Verdict {
  double accuracy = 0.0;
  double threshold = 0.0;
  Decision decision = Decision::kNegative;

  bool positive() const { return decision == Decision::kPositive; }
};

/// Positive iff accuracy >= tau, compared exactly.
Verdict decide(double accuracy, const CalibrationModel& calibration);

std::string to_string(Decision d);

}  // namespace llmprint
