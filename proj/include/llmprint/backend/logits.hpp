#pragma once

#include <span>
#include <vector>

#include "llmprint/core/types.hpp"

namespace llmprint {

/// First-token logits over a vocabulary; every entry finite.
class LogitVector {
 public:
  LogitVector() = default;
  explicit LogitVector(std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  double operator[](TokenId id) const { return values_[id]; }
  std::span<const double> values() const { return values_; }

  /// Lowest id among the maximal entries.
  TokenId argmax() const;
  double logsumexp() const;
  std::vector<double> log_softmax() const;
  std::vector<double> softmax(double temperature = 1.0) const;

  friend bool operator==(const LogitVector&, const LogitVector&) = default;

 private:
  std::vector<double> values_;
};

/// Max-shifted log(sum(exp(x))); -inf for an empty range.
double logsumexp(std::span<const double> values);

}  // namespace llmprint
