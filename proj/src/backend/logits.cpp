#include "llmprint/backend/logits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "llmprint/core/error.hpp"

namespace llmprint {

LogitVector::LogitVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw InvalidArgument("logit vector is empty");
  for (double v : values_) {
    if (!std::isfinite(v)) throw InvalidArgument("logit vector contains a non-finite entry");
  }
}

TokenId LogitVector::argmax() const {
  return static_cast<TokenId>(std::max_element(values_.begin(), values_.end()) - values_.begin());
}

double logsumexp(std::span<const double> values) {
  if (values.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(values.begin(), values.end());
  double s = 0.0;
  for (double v : values) s += std::exp(v - m);
  return m + std::log(s);
}

double LogitVector::logsumexp() const { return llmprint::logsumexp(values_); }

std::vector<double> LogitVector::log_softmax() const {
  const double lse = logsumexp();
  std::vector<double> out(values_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = values_[i] - lse;
  return out;
}

std::vector<double> LogitVector::softmax(double temperature) const {
  if (!(temperature > 0.0)) throw InvalidArgument("softmax temperature must be positive");
  std::vector<double> out(values_.size());
  const double m = *std::max_element(values_.begin(), values_.end());
  double s = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::exp((values_[i] - m) / temperature);
    s += out[i];
  }
  for (double& p : out) p /= s;
  return out;
}

}  // namespace llmprint
