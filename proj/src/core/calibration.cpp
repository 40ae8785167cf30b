#include "llmprint/core/calibration.hpp"

#include <cmath>

#include "llmprint/core/error.hpp"

namespace llmprint {
namespace {

double threshold(double mu, double z, double sigma) { return mu + z * sigma; }

}  // namespace

CalibrationModel CalibrationModel::fit(std::vector<double> validation_accuracies, double z,
                                       std::string mode) {
  const std::size_t k = validation_accuracies.size();
  if (k < 2) {
    throw InvalidArgument("calibration needs at least 2 validation models, got " + std::to_string(k));
  }
  if (!std::isfinite(z)) throw InvalidArgument("z-score must be finite");
  double sum = 0.0;
  for (double a : validation_accuracies) {
    if (!(a >= 0.0 && a <= 1.0)) throw InvalidArgument("validation accuracy outside [0, 1]");
    sum += a;
  }
  const double mu = sum / static_cast<double>(k);
  double ss = 0.0;
  for (double a : validation_accuracies) ss += (a - mu) * (a - mu);

  CalibrationModel m;
  m.mu_ = mu;
  m.sigma_ = std::sqrt(ss / static_cast<double>(k - 1));
  m.k_ = k;
  m.z_ = z;
  m.tau_ = threshold(m.mu_, z, m.sigma_);
  m.accuracies_ = std::move(validation_accuracies);
  m.mode_ = std::move(mode);
  return m;
}

CalibrationModel CalibrationModel::restore(double mu, double sigma, std::size_t k, double z,
                                           double tau, std::vector<double> validation_accuracies,
                                           std::string mode) {
  if (k < 2) throw InvalidArgument("calibration k must be >= 2");
  if (!(sigma >= 0.0)) throw InvalidArgument("calibration sigma must be >= 0");
  if (!std::isfinite(mu) || !std::isfinite(z) || !std::isfinite(tau)) {
    throw InvalidArgument("calibration values must be finite");
  }
  if (tau != threshold(mu, z, sigma)) throw InvalidArgument("calibration tau != mu + z*sigma");
  if (!validation_accuracies.empty() && validation_accuracies.size() != k) {
    throw InvalidArgument("calibration k does not match the number of validation accuracies");
  }
  CalibrationModel m;
  m.mu_ = mu;
  m.sigma_ = sigma;
  m.k_ = k;
  m.z_ = z;
  m.tau_ = tau;
  m.accuracies_ = std::move(validation_accuracies);
  m.mode_ = std::move(mode);
  return m;
}

Verdict decide(double accuracy, const CalibrationModel& calibration) {
  Verdict v;
  v.accuracy = accuracy;
  v.threshold = calibration.tau();
  v.decision = accuracy >= calibration.tau() ? Decision::kPositive : Decision::kNegative;
  return v;
}

std::string to_string(Decision d) { return d == Decision::kPositive ? "positive" : "negative"; }

}  // namespace llmprint
