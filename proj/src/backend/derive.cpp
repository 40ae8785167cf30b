#include "llmprint/backend/derive.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "llmprint/core/error.hpp"
#include "llmprint/core/random.hpp"

namespace llmprint {
namespace {

void quantize_tensor(std::vector<double>& data, double steps) {
  double max_abs = 0.0;
  for (double w : data) max_abs = std::max(max_abs, std::abs(w));
  if (max_abs == 0.0) return;
  const double half = steps / 2.0;
  for (double& w : data) {
    // Level index in [0, steps]; values are rebuilt from the index so the
    // extreme levels land exactly on +-max and the grid is sign-symmetric.
    const double index = std::clamp(std::round((w / max_abs + 1.0) * half), 0.0, steps);
    w = max_abs * ((2.0 * index - steps) / steps);
  }
}

}  // namespace

ToyLM quantize_weights(const ToyLM& model, int bits) {
  if (bits < 2) throw InvalidArgument("quantization needs at least 2 bits, got " + std::to_string(bits));
  const double steps = std::ldexp(1.0, std::min(bits, 1023)) - 1.0;
  std::vector<Tensor> tensors = model.tensors();
  for (auto& t : tensors) quantize_tensor(t.data, steps);
  return model.with_tensors(std::move(tensors), "/q" + std::to_string(bits));
}

ToyLM perturb_weights(const ToyLM& model, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw InvalidArgument("perturbation sigma must be finite and >= 0");
  }
  std::ostringstream step;
  step << "/p" << sigma << "@" << seed;
  if (sigma == 0.0) return model.with_tensors(model.tensors(), step.str());

  std::vector<Tensor> tensors = model.tensors();
  for (std::size_t ti = 0; ti < tensors.size(); ++ti) {
    auto& data = tensors[ti].data;
    double mean = 0.0;
    for (double w : data) mean += w;
    mean /= static_cast<double>(data.size());
    double var = 0.0;
    for (double w : data) var += (w - mean) * (w - mean);
    const double scale = sigma * std::sqrt(var / static_cast<double>(data.size()));
    Rng rng(mix_seed(seed, ti));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& w : data) w += scale * normal(rng);
  }
  return model.with_tensors(std::move(tensors), step.str());
}

}  // namespace llmprint
