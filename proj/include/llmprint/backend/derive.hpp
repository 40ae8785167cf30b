#pragma once

#include <cstdint>

#include "llmprint/backend/toy_lm.hpp"

namespace llmprint {

/// Rounds every weight to the nearest level of a symmetric per-tensor grid
/// with 2^bits levels spanning [-max|w|, +max|w|]. Idempotent.
/// Throws InvalidArgument for bits < 2.
ToyLM quantize_weights(const ToyLM& model, int bits);

/// Adds seeded Gaussian noise with standard deviation sigma * (tensor std)
/// to every weight. sigma == 0 returns an identical model.
/// Throws InvalidArgument for negative sigma.
ToyLM perturb_weights(const ToyLM& model, double sigma, std::uint64_t seed);

}  // namespace llmprint
